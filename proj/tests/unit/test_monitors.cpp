#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ringsync/experiments.hpp"
#include "ringsync/monitors.hpp"

using namespace ringsync;

namespace {

RingState random_state(int n, std::uint64_t seed) {
    auto rng = stream_for(seed, 0);
    return sample_initial_condition(n, rng);
}

// Smallest sup-norm distance from the differences to a constant 2*pi*q/n profile over stable q.
double distance_to_twists(const RingState& s) {
    const auto d = to_diffs(s);
    const int n = static_cast<int>(s.size());
    double best = 1e300;
    for (int q = -n / 4; q <= n / 4; ++q) {
        if (!is_stable_twist(n, q)) continue;
        const double gap = kTwoPi * q / n;
        double worst = 0.0;
        for (double e : d.diffs()) worst = std::max(worst, std::abs(wrap_to_pi(e - gap)));
        best = std::min(best, worst);
    }
    return best;
}

}  // namespace

TEST(WatchTrajectory, StartAtAttractor) {
    const auto ev = watch_trajectory(twisted_state({8, 1, 0.0}), 0.01, 2.0);
    EXPECT_EQ(ev.t_s, 0.0);
    EXPECT_EQ(ev.t_e, 0.0);
    ASSERT_TRUE(ev.final_q);
    EXPECT_EQ(*ev.final_q, 1);
    EXPECT_TRUE(ev.converged);
    ASSERT_EQ(ev.q_timeline.size(), 1u);
    EXPECT_EQ(ev.q_timeline[0], (QChange{0.0, 1}));
}

TEST(WatchTrajectory, StartInsideInvariantRegionKeepsWinding) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 40, q = trial % 5 - 2;
        auto base = twisted_state({n, q, 0.0});
        std::vector<double> p(base.phases().begin(), base.phases().end());
        // Perturb phases while keeping every difference inside (-pi/2, pi/2).
        for (double& x : p) x += 0.3 * (uniform01(rng) - 0.5);
        const RingState s(p);
        ASSERT_LT(max_abs(to_diffs(s).diffs()), kHalfPi);
        const auto ev = watch_trajectory(s, 0.01, 20.0);
        EXPECT_EQ(ev.t_e, 0.0);
        EXPECT_EQ(ev.t_s, 0.0);
        ASSERT_TRUE(ev.final_q);
        EXPECT_EQ(*ev.final_q, q);
        EXPECT_EQ(ev.exit_violations, 0);
    }
}

TEST(WatchTrajectory, HalfTheCoordinatesStartInside) {
    WatchOptions opts;
    opts.stop = StopRule::entry;
    const auto ev = watch_trajectory(random_state(1280, 4), 0.01, 50.0, opts);
    const auto zeros = std::count(ev.entry_times.begin(), ev.entry_times.end(), 0.0);
    // Binomial(1280, 1/2): 4 sigma is about 0.056.
    EXPECT_NEAR(static_cast<double>(zeros) / 1280.0, 0.5, 0.056);
    EXPECT_TRUE(ev.converged);
}

TEST(WatchTrajectory, EventInvariants) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const RingState init = random_state(60, seed);
        const auto ev = watch_trajectory(init, 0.01, 30.0);
        ASSERT_TRUE(ev.entered()) << seed;
        EXPECT_LE(ev.t_s, ev.t_e);
        EXPECT_EQ(ev.t_e, *std::max_element(ev.entry_times.begin(), ev.entry_times.end()));
        const auto d0 = to_diffs(init);
        for (std::size_t i = 0; i < init.size(); ++i)
            EXPECT_EQ(ev.entry_times[i] == 0.0, std::abs(d0[i]) < kHalfPi);
        for (const auto& c : ev.q_timeline) EXPECT_LE(c.t, ev.t_e);
        EXPECT_EQ(ev.exit_violations, 0);
        EXPECT_EQ(ev.q_timeline.back().q, *ev.final_q);
    }
}

TEST(WatchTrajectory, EntryStopEndsOneStepAfterEntry) {
    WatchOptions opts;
    opts.stop = StopRule::entry;
    const RingState init = random_state(80, 9);
    const auto stopped = watch_trajectory(init, 0.01, 50.0, opts);
    const auto full = watch_trajectory(init, 0.01, 50.0);
    ASSERT_TRUE(stopped.converged);
    EXPECT_EQ(stopped.t_e, full.t_e);
    EXPECT_EQ(stopped.t_s, full.t_s);
    EXPECT_EQ(stopped.entry_times, full.entry_times);
    EXPECT_EQ(stopped.final_q, full.final_q);
    EXPECT_GE(stopped.t_stop, stopped.t_e);
    EXPECT_LE(stopped.t_stop, stopped.t_e + 0.02 + 1e-12);
}

TEST(WatchTrajectory, EntryTimesAreInterpolatedWithinTheStep) {
    const RingState init = random_state(40, 21);
    std::vector<std::vector<double>> abs_eta;
    std::vector<double> times;
    const auto ev = watch_trajectory(init, 0.01, 20.0, WatchOptions{}, [&](const StepView& v) {
        times.push_back(v.t);
        std::vector<double> a;
        for (double d : v.diffs) a.push_back(std::abs(d));
        abs_eta.push_back(std::move(a));
    });
    for (std::size_t i = 0; i < init.size(); ++i) {
        const double te = ev.entry_times[i];
        if (te == 0.0) continue;
        const auto k = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), te) - times.begin());
        ASSERT_GT(k, 0u);
        ASSERT_LT(k, times.size());
        EXPECT_GE(abs_eta[k - 1][i], kHalfPi);
        EXPECT_LT(abs_eta[k][i], kHalfPi);
    }
}

TEST(WatchTrajectory, Deterministic) {
    const RingState init = random_state(80, 33);
    EXPECT_EQ(watch_trajectory(init, 0.01, 15.0), watch_trajectory(init, 0.01, 15.0));
}

TEST(WatchTrajectory, NotConvergedWhenHorizonTooShort) {
    const auto ev = watch_trajectory(random_state(80, 3), 0.01, 0.5);
    EXPECT_FALSE(ev.converged);
    WatchOptions opts;
    opts.stop = StopRule::entry;
    EXPECT_FALSE(watch_trajectory(random_state(1280, 3), 0.01, 0.5, opts).converged);
}

TEST(ClassifyAttractor, Examples) {
    EXPECT_EQ(classify_attractor(RingState::sync(10, 0.5), 1e-8), 0);
    EXPECT_EQ(classify_attractor(twisted_state({40, 3, 0.0}), 1e-8), 3);
    EXPECT_EQ(classify_attractor(twisted_state({40, -7, 2.0}), 1e-8), -7);
    // Transient at t = 0.1: velocity is O(1), far above tolerance.
    const RingState transient = integrate(random_state(40, 8), 0.01, 0.1);
    EXPECT_GT(max_abs(theta_rhs(transient)), 1e-2);
    EXPECT_FALSE(classify_attractor(transient, 1e-8));
}

TEST(Integrate, RandomStartSettlesOnATwistedState) {
    // The slowest relaxation mode on a ring of 80 decays like exp(-4 sin^2(pi/80) t), so the
    // 1e-6 closeness needs a horizon of a few thousand time units.
    const RingState out = integrate(random_state(80, 12), 0.01, 50.0);
    const double at_50 = distance_to_twists(out);
    const RingState settled = integrate(out, 0.01, 3000.0);
    const double at_3050 = distance_to_twists(settled);
    EXPECT_LT(at_3050, 1e-6);
    EXPECT_LT(at_3050, at_50);
    EXPECT_TRUE(classify_attractor(settled, 1e-7).has_value());
}
