#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "ringsync/rng.hpp"
#include "ringsync/stats.hpp"

using namespace ringsync;
using namespace ringsync::stats;

namespace {

std::vector<double> uniform_sample(std::size_t n, std::mt19937_64& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform01(rng);
    return v;
}

}  // namespace

TEST(Pearson, PerfectCorrelation) {
    const std::vector<double> x{1.0, 2.0, 4.0, 8.0, 3.0};
    std::vector<double> neg(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
    EXPECT_DOUBLE_EQ(pearson_r(x, x), 1.0);
    EXPECT_DOUBLE_EQ(pearson_r(x, neg), -1.0);
}

TEST(Pearson, Errors) {
    const std::vector<double> a{1.0, 2.0, 3.0}, flat{2.0, 2.0, 2.0}, short_v{1.0, 2.0};
    EXPECT_THROW(pearson_r(a, flat), DegenerateData);
    EXPECT_THROW(pearson_r(short_v, short_v), InvalidArgument);
    EXPECT_THROW(pearson_r(a, short_v), InvalidArgument);
}

TEST(Pearson, SymmetricAndAffineInvariant) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        auto x = uniform_sample(200, rng), y = uniform_sample(200, rng);
        for (std::size_t i = 0; i < x.size(); ++i) y[i] += 0.3 * x[i];
        const double r = pearson_r(x, y);
        EXPECT_NEAR(pearson_r(y, x), r, 1e-14);
        std::vector<double> xs(x.size()), ys(y.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            xs[i] = 3.5 * x[i] - 7.0;
            ys[i] = 0.25 * y[i] + 100.0;
        }
        EXPECT_NEAR(pearson_r(xs, ys), r, 1e-12);
    }
}

TEST(Pearson, IndependentSamplesMatchNullBand) {
    // Mean |r| over 400 independent pairs of length 1e5; relative standard error ~3.8%.
    std::mt19937_64 rng(2);
    const std::size_t len = 100000;
    double total = 0.0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        const auto x = uniform_sample(len, rng), y = uniform_sample(len, rng);
        total += std::abs(pearson_r(x, y));
    }
    EXPECT_NEAR(total / reps / null_abs_r(len), 1.0, 0.12);
    EXPECT_NEAR(null_abs_r(1280), 0.0223, 5e-5);
}

TEST(FitLinear, ExactLine) {
    const std::vector<double> x{0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<double> y;
    for (double v : x) y.push_back(2.0 * v + 1.0);
    const auto f = fit_linear(x, y);
    EXPECT_NEAR(f.slope(), 2.0, 1e-14);
    EXPECT_NEAR(f.intercept(), 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(f.r_squared, 1.0);
    EXPECT_NEAR(f.residual_ss, 0.0, 1e-25);
    EXPECT_EQ(f.n_points, 5u);
}

TEST(FitLinear, ConstantY) {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0}, y{5.0, 5.0, 5.0, 5.0};
    const auto f = fit_linear(x, y);
    EXPECT_EQ(f.slope(), 0.0);
    EXPECT_EQ(f.intercept(), 5.0);
}

TEST(FitLinear, NoisyLineWithinThreeStandardErrors) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.5);
    std::vector<double> x, y;
    for (int i = 0; i < 500; ++i) {
        x.push_back(0.02 * i);
        y.push_back(-1.5 * x.back() + 0.7 + noise(rng));
    }
    const auto f = fit_linear(x, y);
    EXPECT_LT(std::abs(f.slope() + 1.5), 3.0 * f.slope_stderr);
    EXPECT_GT(f.slope_stderr, 0.0);
}

TEST(FitLinear, WeightsPullTowardsHeavyPoints) {
    const std::vector<double> x{0.0, 1.0, 2.0, 3.0}, y{0.0, 1.0, 2.0, 10.0};
    const std::vector<double> light_outlier{1.0, 1.0, 1.0, 1e-6};
    const auto f = fit_linear(x, y, std::span<const double>(light_outlier));
    EXPECT_NEAR(f.slope(), 1.0, 1e-4);
    const std::vector<double> bad{1.0, 0.0, 1.0, 1.0};
    EXPECT_THROW(fit_linear(x, y, std::span<const double>(bad)), InvalidArgument);
}

TEST(FitLinear, SingularDesign) {
    const std::vector<double> x{2.0, 2.0, 2.0}, y{1.0, 2.0, 3.0};
    EXPECT_THROW(fit_linear(x, y), DegenerateData);
    EXPECT_THROW(fit_linear(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 2.0}), InvalidArgument);
}

TEST(ExponentialTail, RecoversRate) {
    std::mt19937_64 rng(4);
    std::exponential_distribution<double> exp2(2.0);
    std::vector<double> s(100000);
    for (double& v : s) v = exp2(rng);
    const auto f = fit_exponential_tail(s);
    EXPECT_GE(f.rate, 1.96);
    EXPECT_LE(f.rate, 2.04);
    EXPECT_FALSE(f.degenerate);
    EXPECT_GT(f.survival_r2, 0.99);
    EXPECT_NEAR(-f.survival_slope, 2.0, 0.1);
}

TEST(ExponentialTail, NonExponentialHasWorseSurvivalFit) {
    // Uniform samples: log-survival log(1 - t) bends sharply near the top.
    std::mt19937_64 rng(5);
    const auto u = uniform_sample(20000, rng);
    std::vector<double> pos;
    for (double v : u)
        if (v > 0.0) pos.push_back(v);
    EXPECT_LT(fit_exponential_tail(pos).survival_r2, 0.9);
}

TEST(ExponentialTail, PreconditionsAndDegenerate) {
    EXPECT_THROW(fit_exponential_tail(std::vector<double>(50, 1.0)), InvalidArgument);
    std::vector<double> with_zero(200, 1.0);
    with_zero[7] = 0.0;
    EXPECT_THROW(fit_exponential_tail(with_zero), InvalidArgument);
    const auto f = fit_exponential_tail(std::vector<double>(200, 3.0));
    EXPECT_TRUE(f.degenerate);
    EXPECT_DOUBLE_EQ(f.rate, 1.0 / 3.0);
}

TEST(Histogram, Integers) {
    const std::vector<int> s{0, 0, 1, -1};
    const auto h = histogram(s);
    EXPECT_EQ(h, (std::map<long, long>{{-1, 1}, {0, 2}, {1, 1}}));
    EXPECT_THROW(histogram(std::vector<int>{}), InvalidArgument);
}

TEST(Histogram, SingleBin) {
    const std::vector<double> s(17, 0.42);
    const auto h = histogram(s, {0.0, 1.0, 10});
    EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), 0L), 17);
    EXPECT_EQ(std::count_if(h.counts.begin(), h.counts.end(), [](long c) { return c > 0; }), 1);
    EXPECT_EQ(h.counts[4], 17);
}

TEST(Histogram, UniformWithinMultinomialBound) {
    std::mt19937_64 rng(6);
    const auto s = uniform_sample(1000000, rng);
    const auto h = histogram(s, {0.0, 1.0, 10});
    const double sigma = std::sqrt(1e6 * 0.1 * 0.9);
    long total = 0;
    for (long c : h.counts) {
        EXPECT_LT(std::abs(static_cast<double>(c) - 1e5), 4.0 * sigma);
        total += c;
    }
    EXPECT_EQ(total, 1000000);
}

TEST(Histogram, PermutationInvariantAndRangeChecked) {
    std::mt19937_64 rng(7);
    auto s = uniform_sample(1000, rng);
    const auto a = histogram(s, {0.0, 1.0, 7});
    std::shuffle(s.begin(), s.end(), rng);
    EXPECT_EQ(histogram(s, {0.0, 1.0, 7}).counts, a.counts);
    EXPECT_EQ(histogram(std::vector<double>{1.0}, {0.0, 1.0, 4}).counts[3], 1);
    EXPECT_THROW(histogram(std::vector<double>{1.5}, {0.0, 1.0, 4}), InvalidArgument);
    EXPECT_THROW(histogram(std::vector<double>{0.5}, {0.0, 1.0, 0}), InvalidArgument);
}

TEST(Moments, NormalSample) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(3.0, 2.0);
    std::vector<double> s(200000);
    for (double& v : s) v = g(rng);
    const auto m = moments(s);
    EXPECT_NEAR(m.mean, 3.0, 0.02);
    EXPECT_NEAR(m.variance, 4.0, 0.05);
    EXPECT_NEAR(m.skewness, 0.0, 0.03);
    EXPECT_NEAR(m.excess_kurtosis, 0.0, 0.06);
}

TEST(Moments, ExponentialSample) {
    std::mt19937_64 rng(9);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> s(400000);
    for (double& v : s) v = e(rng);
    const auto m = moments(s);
    EXPECT_NEAR(m.skewness, 2.0, 0.1);
    EXPECT_NEAR(m.excess_kurtosis, 6.0, 0.6);
}
