#pragma once

// Online event detection along one RK4 trajectory: winding-number change points,
// per-coordinate entry times into |eta_i| < pi/2, entry into the invariant region
// (all coordinates inside) and terminal classification.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "ringsync/ring_dynamics.hpp"

namespace ringsync {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct QChange {
    double t;
    int q;
    friend bool operator==(const QChange&, const QChange&) = default;
};

struct TrajectoryEvents {
    double t_s = 0.0;                  // time of the last observed winding-number change
    double t_e = kNever;               // max of entry_times; kNever if some coordinate never entered
    std::vector<double> entry_times;   // per-coordinate entry into |eta_i| < pi/2
    std::optional<int> final_q;
    bool converged = false;
    std::vector<QChange> q_timeline;   // change points only; first entry is the initial q

    // Diagnostics.
    double t_stop = 0.0;
    long steps = 0;
    long ill_defined_steps = 0;
    long exit_violations = 0;          // samples with |eta_i| >= pi/2 after coordinate i entered

    bool entered() const noexcept { return std::isfinite(t_e); }

    friend bool operator==(const TrajectoryEvents&, const TrajectoryEvents&) = default;
};

enum class StopRule {
    horizon,  // integrate to t_end; converged iff the terminal gradient is below tolerance
    entry,    // stop `entry_margin_steps` after every coordinate is inside; q is frozen from there on
};

struct WatchOptions {
    StopRule stop = StopRule::horizon;
    double conv_tol = 1e-8;
    int entry_margin_steps = 1;
    double tol_pi = kDefaultTolPi;
};

/// What a step hook sees after each integration step.
struct StepView {
    long k;
    double t;
    const RingState& state;
    std::span<const double> diffs;
    std::optional<int> q;
    bool q_changed;
    bool just_entered;  // first step at which every coordinate is inside
};

namespace detail {
struct NoHook {
    void operator()(const StepView&) const noexcept {}
};
}  // namespace detail

/// Integrate from `initial` with fixed-step RK4 and record trajectory events. `hook(view)` runs
/// after every step (and once for the initial state with k = 0); returning false stops the run.
template <typename Hook>
TrajectoryEvents watch_trajectory(const RingState& initial, double h, double t_end, const WatchOptions& opts,
                                  Hook&& hook) {
    const std::size_t n = initial.size();
    TrajectoryEvents ev;
    ev.entry_times.assign(n, kNever);

    std::vector<double> diffs(n), prev_abs(n);
    detail::diffs_into(initial.phases(), diffs);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < n; ++i) {
        prev_abs[i] = std::abs(diffs[i]);
        if (prev_abs[i] < kHalfPi) {
            ev.entry_times[i] = 0.0;
            ++inside;
        }
    }
    std::optional<int> current_q = detail::winding_from_diffs(diffs, opts.tol_pi);
    if (current_q) ev.q_timeline.push_back({0.0, *current_q});
    else ++ev.ill_defined_steps;
    if (inside == n) ev.t_e = 0.0;

    auto call_hook = [&](const StepView& view) -> bool {
        if constexpr (std::is_same_v<std::invoke_result_t<Hook&, const StepView&>, bool>) {
            return hook(view);
        } else {
            hook(view);
            return true;
        }
    };

    long since_entry = 0;
    bool keep_going = call_hook(StepView{0, 0.0, initial, diffs, current_q, false, inside == n});
    if (keep_going && opts.stop == StopRule::entry && inside == n && opts.entry_margin_steps <= 0)
        keep_going = false;

    double t_prev = 0.0;
    RingState terminal = initial;
    if (keep_going) {
        terminal = integrate(initial, h, t_end, [&](double t, const RingState& state) {
            ++ev.steps;
            detail::diffs_into(state.phases(), diffs);
            const bool was_inside = inside == n;
            for (std::size_t i = 0; i < n; ++i) {
                const double a = std::abs(diffs[i]);
                if (ev.entry_times[i] == kNever) {
                    if (a < kHalfPi) {
                        // Linear interpolation of |eta_i| between the two step endpoints.
                        const double frac = (prev_abs[i] - kHalfPi) / (prev_abs[i] - a);
                        ev.entry_times[i] = t_prev + (t - t_prev) * frac;
                        ++inside;
                    }
                } else if (a >= kHalfPi) {
                    ++ev.exit_violations;
                }
                prev_abs[i] = a;
            }

            const std::optional<int> q = detail::winding_from_diffs(diffs, opts.tol_pi);
            bool changed = false;
            if (!q) {
                ++ev.ill_defined_steps;
            } else if (!current_q) {
                current_q = q;
                ev.q_timeline.push_back({t, *q});
            } else if (*q != *current_q) {
                current_q = q;
                ev.t_s = t;
                ev.q_timeline.push_back({t, *q});
                changed = true;
            }

            const bool just_entered = !was_inside && inside == n;
            if (just_entered) {
                double te = 0.0;
                for (double e : ev.entry_times) te = std::max(te, e);
                ev.t_e = te;
            }
            t_prev = t;

            if (!call_hook(StepView{ev.steps, t, state, diffs, q, changed, just_entered})) return false;
            if (opts.stop == StopRule::entry && inside == n) {
                if (++since_entry >= opts.entry_margin_steps) return false;
            }
            return true;
        });
    }
    ev.t_stop = t_prev;

    detail::diffs_into(terminal.phases(), diffs);
    ev.final_q = detail::winding_from_diffs(diffs, opts.tol_pi);
    if (!ev.final_q) ev.final_q = current_q;
    if (opts.stop == StopRule::entry) {
        ev.converged = ev.entered() && ev.final_q.has_value();
    } else {
        ev.converged = max_abs(theta_rhs(terminal)) < opts.conv_tol;
    }
    return ev;
}

inline TrajectoryEvents watch_trajectory(const RingState& initial, double h, double t_end,
                                         const WatchOptions& opts = {}) {
    return watch_trajectory(initial, h, t_end, opts, detail::NoHook{});
}

/// Winding number of the twisted state `state` has settled on, or nullopt if the velocity exceeds
/// `tol` or the differences are further than 10*tol from the constant 2*pi*q/n profile.
inline std::optional<int> classify_attractor(const RingState& state, double tol) {
    if (max_abs(theta_rhs(state)) >= tol) return std::nullopt;
    const PhaseDiffState d = to_diffs(state);
    const auto q = detail::winding_from_diffs(d.diffs(), kDefaultTolPi);
    if (!q) return std::nullopt;
    const double gap = kTwoPi * static_cast<double>(*q) / static_cast<double>(state.size());
    for (double eta : d.diffs())
        if (std::abs(wrap_to_pi(eta - gap)) > 10.0 * tol) return std::nullopt;
    return q;
}

}  // namespace ringsync
