#pragma once

// Nearest-neighbour Kuramoto ring: state types, vector fields, integrators,
// winding number, twisted states and the gradient-flow energy.
//
//   d theta_j / dt = sin(theta_{j+1} - theta_j) + sin(theta_{j-1} - theta_j)
//
// with periodic indices. The phase differences eta_j = theta_{j+1} - theta_j
// are always kept wrapped into (-pi, pi].

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "ringsync/errors.hpp"

namespace ringsync {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;

/// Default distance from +pi below which a phase difference makes the winding number ill-defined.
inline constexpr double kDefaultTolPi = 1e-12;

/// Map x to the half-open interval (-pi, pi]. -pi maps to +pi.
inline double wrap_to_pi(double x) {
    if (!std::isfinite(x)) throw InvalidArgument("wrap_to_pi: non-finite input");
    double y = x;
    if (y > kPi || y <= -kPi) {
        // remainder() is exact; it lands in [-pi, pi] with ties at +-pi.
        y = std::remainder(y, kTwoPi);
        if (y <= -kPi) y += kTwoPi;
        if (y > kPi) y -= kTwoPi;
    }
    return y;
}

/// Map x to [0, 2pi).
inline double normalize_phase(double x) {
    if (!std::isfinite(x)) throw InvalidArgument("normalize_phase: non-finite input");
    double y = x;
    if (y >= kTwoPi) {
        y -= kTwoPi;
        if (y >= kTwoPi) y = std::fmod(y, kTwoPi);
    } else if (y < 0.0) {
        y += kTwoPi;
        if (y < 0.0) y = std::fmod(y, kTwoPi) + kTwoPi;
    }
    // x = -tiny rounds up to exactly 2pi.
    if (y >= kTwoPi) y = 0.0;
    return y;
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

class Rk4Stepper;

/// Phases theta_0..theta_{n-1} of the ring, each normalized into [0, 2pi).
class RingState {
public:
    explicit RingState(std::vector<double> phases) : phases_(std::move(phases)) {
        if (phases_.size() < 3) throw InvalidArgument("RingState: need at least 3 oscillators");
        for (double& p : phases_) p = normalize_phase(p);
    }

    static RingState sync(std::size_t n, double c = 0.0) {
        return RingState(std::vector<double>(n, c));
    }

    std::size_t size() const noexcept { return phases_.size(); }
    std::span<const double> phases() const noexcept { return phases_; }
    double operator[](std::size_t j) const { return phases_[j]; }

    friend bool operator==(const RingState&, const RingState&) = default;

private:
    friend class Rk4Stepper;
    struct Trusted {};
    RingState(Trusted, std::vector<double> phases) : phases_(std::move(phases)) {}

    std::vector<double> phases_;
};

/// Wrapped phase differences eta_j in (-pi, pi]; their sum is 2*pi*q for an integer q.
class PhaseDiffState {
public:
    explicit PhaseDiffState(std::vector<double> diffs) : diffs_(std::move(diffs)) {
        if (diffs_.size() < 3) throw InvalidArgument("PhaseDiffState: need at least 3 differences");
        double sum = 0.0;
        for (double d : diffs_) {
            if (!std::isfinite(d) || d <= -kPi || d > kPi)
                throw InvalidArgument("PhaseDiffState: difference outside (-pi, pi]");
            sum += d;
        }
        const double turns = sum / kTwoPi;
        if (std::abs(turns - std::nearbyint(turns)) * kTwoPi > 1e-9 * static_cast<double>(diffs_.size()))
            throw InvalidArgument("PhaseDiffState: differences do not sum to a multiple of 2pi");
    }

    std::size_t size() const noexcept { return diffs_.size(); }
    std::span<const double> diffs() const noexcept { return diffs_; }
    double operator[](std::size_t j) const { return diffs_[j]; }

    friend bool operator==(const PhaseDiffState&, const PhaseDiffState&) = default;

private:
    friend PhaseDiffState to_diffs(const RingState&);
    friend PhaseDiffState euler_step(const PhaseDiffState&, double);
    struct Trusted {};
    PhaseDiffState(Trusted, std::vector<double> diffs) : diffs_(std::move(diffs)) {}

    std::vector<double> diffs_;
};

/// Twisted state theta_j = 2*pi*j*q/n + c, j = 0..n-1.
struct TwistSpec {
    int n = 3;
    int q = 0;
    double c = 0.0;

    void validate() const {
        if (n < 3) throw InvalidArgument("TwistSpec: n must be >= 3");
        if (2L * std::abs(static_cast<long>(q)) > n) throw InvalidArgument("TwistSpec: |q| must be <= n/2");
        if (!std::isfinite(c)) throw InvalidArgument("TwistSpec: non-finite offset");
    }
};

namespace detail {

inline void diffs_into(std::span<const double> phases, std::span<double> out) {
    const std::size_t n = phases.size();
    for (std::size_t j = 0; j + 1 < n; ++j) out[j] = wrap_to_pi(phases[j + 1] - phases[j]);
    out[n - 1] = wrap_to_pi(phases[0] - phases[n - 1]);
}

// rhs_j = s_j - s_{j-1} with s_j = sin(theta_{j+1} - theta_j), so each edge sine is evaluated once.
inline void theta_rhs_into(std::span<const double> phases, std::span<double> out, std::span<double> edge) {
    const std::size_t n = phases.size();
    for (std::size_t j = 0; j + 1 < n; ++j) edge[j] = std::sin(phases[j + 1] - phases[j]);
    edge[n - 1] = std::sin(phases[0] - phases[n - 1]);
    out[0] = edge[0] - edge[n - 1];
    for (std::size_t j = 1; j < n; ++j) out[j] = edge[j] - edge[j - 1];
}

inline void eta_rhs_into(std::span<const double> diffs, std::span<double> out, std::span<double> sines) {
    const std::size_t n = diffs.size();
    for (std::size_t j = 0; j < n; ++j) sines[j] = std::sin(diffs[j]);
    for (std::size_t j = 0; j < n; ++j) {
        const double next = sines[j + 1 == n ? 0 : j + 1];
        const double prev = sines[j == 0 ? n - 1 : j - 1];
        out[j] = next - 2.0 * sines[j] + prev;
    }
}

// nullopt when some difference sits within tol_pi of +pi.
inline std::optional<int> winding_from_diffs(std::span<const double> diffs, double tol_pi) {
    const std::size_t n = diffs.size();
    double partial = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(diffs[j] - kPi) < tol_pi) return std::nullopt;
        if (j + 1 < n) partial += diffs[j];
    }
    // nearbyint under the default rounding mode rounds half to even; a tie needs eta_n = +-pi,
    // which the check above excludes.
    return static_cast<int>(std::nearbyint(partial / kTwoPi));
}

}  // namespace detail

inline PhaseDiffState to_diffs(const RingState& state) {
    std::vector<double> d(state.size());
    detail::diffs_into(state.phases(), d);
    return PhaseDiffState(PhaseDiffState::Trusted{}, std::move(d));
}

inline std::vector<double> theta_rhs(const RingState& state) {
    std::vector<double> out(state.size()), edge(state.size());
    detail::theta_rhs_into(state.phases(), out, edge);
    return out;
}

inline std::vector<double> eta_rhs(const PhaseDiffState& state) {
    std::vector<double> out(state.size()), sines(state.size());
    detail::eta_rhs_into(state.diffs(), out, sines);
    return out;
}

/// Nearest integer to (1/2pi) * sum_{j<n-1} eta_j. Throws IllDefinedWinding if some eta_j is
/// within tol_pi of +pi.
inline int winding_number(const PhaseDiffState& state, double tol_pi = kDefaultTolPi) {
    auto q = detail::winding_from_diffs(state.diffs(), tol_pi);
    if (!q) throw IllDefinedWinding("winding_number: a phase difference sits at +pi");
    return *q;
}

inline RingState twisted_state(const TwistSpec& spec) {
    spec.validate();
    std::vector<double> phases(static_cast<std::size_t>(spec.n));
    for (int j = 0; j < spec.n; ++j)
        phases[static_cast<std::size_t>(j)] =
            kTwoPi * static_cast<double>(j) * static_cast<double>(spec.q) / static_cast<double>(spec.n) + spec.c;
    return RingState(std::move(phases));
}

/// A q-twisted state on n oscillators is linearly stable iff |q| < n/4.
inline bool is_stable_twist(int n, int q) {
    if (n < 3) throw InvalidArgument("is_stable_twist: n must be >= 3");
    return 4L * std::abs(static_cast<long>(q)) < static_cast<long>(n);
}

/// E = n - sum_j cos(eta_j). Zero at sync, 2n when every difference is pi.
inline double energy(const PhaseDiffState& state) {
    double e = static_cast<double>(state.size());
    for (double d : state.diffs()) e -= std::cos(d);
    return e;
}

inline double energy(const RingState& state) {
    double e = static_cast<double>(state.size());
    const auto p = state.phases();
    const std::size_t n = p.size();
    for (std::size_t j = 0; j < n; ++j) e -= std::cos(p[j + 1 == n ? 0 : j + 1] - p[j]);
    return e;
}

/// dE/dtheta. The ring dynamics are the gradient flow theta' = -grad E.
inline std::vector<double> energy_gradient(const RingState& state) {
    const auto p = state.phases();
    const std::size_t n = p.size();
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double fwd = std::sin(p[k + 1 == n ? 0 : k + 1] - p[k]);
        const double back = std::sin(p[k] - p[k == 0 ? n - 1 : k - 1]);
        g[k] = back - fwd;
    }
    return g;
}

/// One explicit Euler step on the difference dynamics, rewrapped into (-pi, pi].
inline PhaseDiffState euler_step(const PhaseDiffState& state, double h) {
    if (!std::isfinite(h) || h < 0.0) throw InvalidArgument("euler_step: h must be finite and >= 0");
    const std::size_t n = state.size();
    std::vector<double> rate(n), sines(n);
    detail::eta_rhs_into(state.diffs(), rate, sines);
    std::vector<double> next(n);
    for (std::size_t j = 0; j < n; ++j) next[j] = wrap_to_pi(state[j] + h * rate[j]);
    return PhaseDiffState(PhaseDiffState::Trusted{}, std::move(next));
}

/// In-place Euler integrator on raw difference buffers; reuses scratch across steps.
class EulerStepper {
public:
    explicit EulerStepper(std::size_t n) : rate_(n), sines_(n) {}

    void step(std::span<double> diffs, double h) {
        detail::eta_rhs_into(diffs, rate_, sines_);
        for (std::size_t j = 0; j < diffs.size(); ++j) diffs[j] = wrap_to_pi(diffs[j] + h * rate_[j]);
    }

private:
    std::vector<double> rate_, sines_;
};

/// Classical fourth-order Runge-Kutta on the phase dynamics with reusable scratch buffers.
class Rk4Stepper {
public:
    explicit Rk4Stepper(std::size_t n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n), edge_(n) {}

    void step(RingState& state, double h) { step(state.phases_, h); }

    RingState advance(const RingState& state, double h) {
        std::vector<double> p(state.phases().begin(), state.phases().end());
        step(p, h);
        return RingState(RingState::Trusted{}, std::move(p));
    }

private:
    void step(std::vector<double>& p, double h) {
        const std::size_t n = p.size();
        detail::theta_rhs_into(p, k1_, edge_);
        for (std::size_t j = 0; j < n; ++j) tmp_[j] = p[j] + 0.5 * h * k1_[j];
        detail::theta_rhs_into(tmp_, k2_, edge_);
        for (std::size_t j = 0; j < n; ++j) tmp_[j] = p[j] + 0.5 * h * k2_[j];
        detail::theta_rhs_into(tmp_, k3_, edge_);
        for (std::size_t j = 0; j < n; ++j) tmp_[j] = p[j] + h * k3_[j];
        detail::theta_rhs_into(tmp_, k4_, edge_);
        const double w = h / 6.0;
        for (std::size_t j = 0; j < n; ++j)
            p[j] = normalize_phase(p[j] + w * (k1_[j] + 2.0 * k2_[j] + 2.0 * k3_[j] + k4_[j]));
    }

    std::vector<double> k1_, k2_, k3_, k4_, tmp_, edge_;
};

inline RingState rk4_step(const RingState& state, double h) {
    if (!std::isfinite(h) || h < 0.0) throw InvalidArgument("rk4_step: h must be finite and >= 0");
    if (h == 0.0) return state;
    Rk4Stepper stepper(state.size());
    return stepper.advance(state, h);
}

/// Number of fixed steps of size h needed to reach t_end; the last one may be shorter.
inline long step_count(double h, double t_end) {
    if (!std::isfinite(h) || h <= 0.0) throw InvalidArgument("step count: h must be > 0");
    if (!std::isfinite(t_end) || t_end < 0.0) throw InvalidArgument("step count: t_end must be >= 0");
    return static_cast<long>(std::ceil(t_end / h - 1e-9));
}

/// Time of step k in a run of `steps` steps of size h ending exactly at t_end.
inline double step_time(long k, long steps, double h, double t_end) {
    return k == steps ? t_end : static_cast<double>(k) * h;
}

/// Fixed-step RK4 from t = 0 to t_end. `observer(t, state)` runs after every step; if it returns
/// bool, false stops the integration early.
template <typename Observer>
RingState integrate(RingState state, double h, double t_end, Observer&& observer) {
    const long steps = step_count(h, t_end);
    Rk4Stepper stepper(state.size());
    for (long k = 1; k <= steps; ++k) {
        const double t = step_time(k, steps, h, t_end);
        stepper.step(state, k == steps ? t_end - static_cast<double>(k - 1) * h : h);
        if constexpr (std::is_same_v<std::invoke_result_t<Observer&, double, const RingState&>, bool>) {
            if (!observer(t, std::as_const(state))) break;
        } else {
            observer(t, std::as_const(state));
        }
    }
    return state;
}

inline RingState integrate(RingState state, double h, double t_end) {
    return integrate(std::move(state), h, t_end, [](double, const RingState&) {});
}

}  // namespace ringsync
