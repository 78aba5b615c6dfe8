#pragma once

// Monte Carlo campaigns over random initial phases. Every trajectory draws from its own RNG
// stream derived from (seed, index) and results are folded in index order, so outputs do not
// depend on the worker count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ringsync/errors.hpp"
#include "ringsync/monitors.hpp"
#include "ringsync/parallel.hpp"
#include "ringsync/ring_dynamics.hpp"
#include "ringsync/rng.hpp"
#include "ringsync/stats.hpp"

namespace ringsync {

enum class Campaign { q_distribution, timing_scan, correlation_probe, entry_times, energy_decay, euler_compare, basin_census };

inline std::string_view campaign_name(Campaign c) {
    switch (c) {
        case Campaign::q_distribution: return "q_distribution";
        case Campaign::timing_scan: return "timing_scan";
        case Campaign::correlation_probe: return "correlation_probe";
        case Campaign::entry_times: return "entry_times";
        case Campaign::energy_decay: return "energy_decay";
        case Campaign::euler_compare: return "euler_compare";
        case Campaign::basin_census: return "basin_census";
    }
    return "unknown";
}

inline std::optional<Campaign> parse_campaign(std::string_view s) {
    for (Campaign c : {Campaign::q_distribution, Campaign::timing_scan, Campaign::correlation_probe,
                       Campaign::entry_times, Campaign::energy_decay, Campaign::euler_compare,
                       Campaign::basin_census})
        if (campaign_name(c) == s) return c;
    return std::nullopt;
}

inline constexpr double kConverged = std::numeric_limits<double>::infinity();

struct ExperimentConfig {
    Campaign campaign = Campaign::q_distribution;
    int n = 1280;
    long samples = 1000;
    double h = 0.01;
    double t_end = 50.0;
    std::uint64_t seed = 1;
    unsigned workers = 0;  // 0 = all hardware threads

    std::vector<double> checkpoints;  // q_distribution / energy_decay; kConverged = terminal
    std::vector<int> n_list;          // timing_scan
    std::vector<int> distances;       // correlation_probe
    int correlation_index = 0;        // correlation_probe, fixed-i variant
    std::vector<double> h_list;       // euler_compare
    double h_ref = 1e-4;              // euler_compare reference RK4 step
    double compare_c = 1.0;           // euler_compare evaluates at t = compare_c * log n
    int q_fit_max = 4;                // basin_census model-comparison window
    long audit_samples = 0;           // basin_census early-stop audit subset
    double audit_t_end = 3000.0;
    double conv_tol = 1e-8;
    double entry_bin_width = 0.1;     // entry_times histogram

    void validate() const {
        if (n < 3) throw ConfigError("/n", "must be >= 3");
        if (samples < 1) throw ConfigError("/samples", "must be >= 1");
        if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("/h", "must be > 0");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("/t_end", "must be > 0");
        if (!(conv_tol > 0.0)) throw ConfigError("/conv_tol", "must be > 0");
        for (std::size_t i = 0; i < checkpoints.size(); ++i)
            if (!(checkpoints[i] >= 0.0)) throw ConfigError("/checkpoints/" + std::to_string(i), "must be >= 0");
        for (std::size_t i = 0; i < n_list.size(); ++i)
            if (n_list[i] < 3) throw ConfigError("/n_list/" + std::to_string(i), "must be >= 3");
        for (std::size_t i = 0; i < distances.size(); ++i)
            if (distances[i] < 0 || distances[i] >= n)
                throw ConfigError("/distances/" + std::to_string(i), "must lie in [0, n)");
        for (std::size_t i = 0; i < h_list.size(); ++i)
            if (!(h_list[i] > 0.0)) throw ConfigError("/h_list/" + std::to_string(i), "must be > 0");
        if (correlation_index < 0 || correlation_index >= n) throw ConfigError("/correlation_index", "must lie in [0, n)");
        if (!(h_ref > 0.0)) throw ConfigError("/h_ref", "must be > 0");
        if (!(compare_c > 0.0)) throw ConfigError("/compare_c", "must be > 0");
        if (q_fit_max < 1) throw ConfigError("/q_fit_max", "must be >= 1");
        if (audit_samples < 0 || audit_samples > samples) throw ConfigError("/audit_samples", "must lie in [0, samples]");
        if (!(audit_t_end > 0.0)) throw ConfigError("/audit_t_end", "must be > 0");
        if (!(entry_bin_width > 0.0)) throw ConfigError("/entry_bin_width", "must be > 0");
        if (campaign == Campaign::timing_scan && n_list.empty()) throw ConfigError("/n_list", "required for timing_scan");
        if (campaign == Campaign::euler_compare && h_list.empty()) throw ConfigError("/h_list", "required for euler_compare");
    }
};

/// Default knobs for each campaign.
inline ExperimentConfig default_config(Campaign c) {
    ExperimentConfig cfg;
    cfg.campaign = c;
    switch (c) {
        case Campaign::q_distribution:
            cfg.samples = 100000;
            cfg.checkpoints = {0.0, 1.0, 2.0, 5.0, 10.0, kConverged};
            break;
        case Campaign::timing_scan:
            cfg.samples = 10000;
            cfg.n_list = {40, 80, 160, 320, 640, 1280};
            break;
        case Campaign::correlation_probe:
            cfg.samples = 10000;
            cfg.distances = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 15, 20, 30, 50, 100, 200, 400, 640};
            break;
        case Campaign::entry_times: cfg.samples = 10000; break;
        case Campaign::energy_decay:
            cfg.samples = 1000;
            cfg.t_end = 20.0;
            for (int k = 0; k <= 80; ++k) cfg.checkpoints.push_back(0.25 * k);
            break;
        case Campaign::euler_compare:
            cfg.n = 80;
            cfg.samples = 100;
            cfg.h_list = {0.1, 0.05, 0.02, 0.01};
            break;
        case Campaign::basin_census:
            cfg.n = 80;
            cfg.samples = 1000000;
            break;
    }
    return cfg;
}

/// theta_j i.i.d. uniform on [0, 2pi); the first n-1 wrapped differences are then i.i.d. uniform
/// on (-pi, pi].
template <typename Urbg>
RingState sample_initial_condition(int n, Urbg& rng) {
    if (n < 3) throw InvalidArgument("sample_initial_condition: n must be >= 3");
    std::vector<double> phases(static_cast<std::size_t>(n));
    for (double& p : phases) p = kTwoPi * uniform01(rng);
    return RingState(std::move(phases));
}

namespace detail {

inline RingState initial_for(int n, std::uint64_t stream_seed, std::size_t index) {
    auto rng = stream_for(stream_seed, index);
    return sample_initial_condition(n, rng);
}

inline WatchOptions entry_stop(const ExperimentConfig& cfg) {
    WatchOptions o;
    o.stop = StopRule::entry;
    o.conv_tol = cfg.conv_tol;
    return o;
}

inline double stddev(std::span<const double> v) {
    return v.size() < 2 ? 0.0 : std::sqrt(stats::moments(v).variance);
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Winding-number distribution at checkpoint times.

struct QCheckpoint {
    double t = 0.0;  // kConverged for the terminal (frozen) winding number
    std::map<long, long> histogram;
    stats::Moments moments;
};

struct QDistributionResult {
    std::vector<QCheckpoint> checkpoints;
    long trajectories = 0;
    long excluded = 0;   // never entered the invariant region before t_end
    long resampled = 0;  // checkpoint q ill-defined, taken one step later
};

inline QDistributionResult run_q_distribution(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<double> times = cfg.checkpoints;
    if (times.empty()) times = default_config(Campaign::q_distribution).checkpoints;
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    std::vector<long> step_of(times.size(), -1);
    for (std::size_t c = 0; c < times.size(); ++c)
        if (std::isfinite(times[c])) step_of[c] = std::lround(times[c] / cfg.h);

    struct Sample {
        std::vector<int> q;
        bool ok = false;
        long resampled = 0;
    };
    const auto opts = detail::entry_stop(cfg);
    auto per = parallel_map(static_cast<std::size_t>(cfg.samples), cfg.workers, [&](std::size_t i) {
        Sample s;
        std::vector<std::optional<int>> q(times.size());
        std::vector<bool> pending(times.size(), false);
        const RingState init = detail::initial_for(cfg.n, cfg.seed, i);
        const auto ev = watch_trajectory(init, cfg.h, cfg.t_end, opts, [&](const StepView& v) {
            for (std::size_t c = 0; c < times.size(); ++c) {
                if (q[c]) continue;
                if (step_of[c] == v.k || pending[c]) {
                    if (v.q) q[c] = v.q;
                    else if (!pending[c]) {
                        pending[c] = true;
                        ++s.resampled;
                    }
                }
            }
        });
        s.ok = ev.converged;
        if (!s.ok) return s;
        s.q.resize(times.size());
        for (std::size_t c = 0; c < times.size(); ++c) s.q[c] = q[c] ? *q[c] : *ev.final_q;
        return s;
    });

    QDistributionResult out;
    out.trajectories = cfg.samples;
    std::vector<std::vector<double>> values(times.size());
    std::vector<std::vector<int>> ints(times.size());
    for (const Sample& s : per) {
        out.resampled += s.resampled;
        if (!s.ok) {
            ++out.excluded;
            continue;
        }
        for (std::size_t c = 0; c < times.size(); ++c) {
            values[c].push_back(s.q[c]);
            ints[c].push_back(s.q[c]);
        }
    }
    for (std::size_t c = 0; c < times.size(); ++c) {
        QCheckpoint cp;
        cp.t = times[c];
        if (!ints[c].empty()) cp.histogram = stats::histogram(ints[c]);
        if (values[c].size() >= 2) cp.moments = stats::moments(values[c]);
        out.checkpoints.push_back(std::move(cp));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Stabilization and entry times against system size.

struct TimingRow {
    int n = 0;
    long used = 0;
    long excluded = 0;
    long order_violations = 0;  // trajectories with t_s > t_e
    double mean_ts = 0.0, sd_ts = 0.0;
    double mean_te = 0.0, sd_te = 0.0;
};

struct TimingScanResult {
    std::vector<TimingRow> rows;
    std::optional<stats::FitResult> fit_ts;  // mean t_s against log n
    std::optional<stats::FitResult> fit_te;
};

inline TimingScanResult run_timing_scan(const ExperimentConfig& cfg) {
    cfg.validate();
    TimingScanResult out;
    std::vector<int> ns = cfg.n_list;
    std::sort(ns.begin(), ns.end());
    const auto opts = detail::entry_stop(cfg);
    for (int n : ns) {
        struct Sample {
            double ts = 0.0, te = 0.0;
            bool ok = false;
        };
        const std::uint64_t stream_seed = splitmix64(cfg.seed + static_cast<std::uint64_t>(n));
        auto per = parallel_map(static_cast<std::size_t>(cfg.samples), cfg.workers, [&](std::size_t i) {
            const auto ev = watch_trajectory(detail::initial_for(n, stream_seed, i), cfg.h, cfg.t_end, opts);
            return Sample{ev.t_s, ev.t_e, ev.converged};
        });
        TimingRow row;
        row.n = n;
        std::vector<double> ts, te;
        for (const Sample& s : per) {
            if (!s.ok) {
                ++row.excluded;
                continue;
            }
            ts.push_back(s.ts);
            te.push_back(s.te);
            if (s.ts > s.te) ++row.order_violations;
        }
        row.used = static_cast<long>(ts.size());
        if (!ts.empty()) {
            row.mean_ts = std::accumulate(ts.begin(), ts.end(), 0.0) / static_cast<double>(ts.size());
            row.mean_te = std::accumulate(te.begin(), te.end(), 0.0) / static_cast<double>(te.size());
            row.sd_ts = detail::stddev(ts);
            row.sd_te = detail::stddev(te);
        }
        out.rows.push_back(row);
    }
    if (out.rows.size() >= 3) {
        std::vector<double> x, yts, yte;
        for (const auto& r : out.rows) {
            x.push_back(std::log(static_cast<double>(r.n)));
            yts.push_back(r.mean_ts);
            yte.push_back(r.mean_te);
        }
        out.fit_ts = stats::fit_linear(x, yts);
        out.fit_te = stats::fit_linear(x, yte);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Correlation between phase differences d apart, at t_s and at t_e.

struct CorrelationRow {
    int d = 0;
    double r_ts = 0.0, r_te = 0.0;                // fixed index i = correlation_index
    double r_ts_pooled = 0.0, r_te_pooled = 0.0;  // pooled over every i on the ring
    double r_ts_null = 0.0, r_te_null = 0.0;      // fixed index with sample order permuted
};

struct CorrelationResult {
    std::vector<CorrelationRow> rows;
    int index = 0;
    long used = 0;
    long excluded = 0;
    double noise_band = 0.0;  // expected |r| of two independent samples of the fixed-index size
};

inline CorrelationResult run_correlation_probe(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<int> ds = cfg.distances;
    if (ds.empty()) {
        for (int d : default_config(Campaign::correlation_probe).distances)
            if (d < cfg.n) ds.push_back(d);
    }
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
    const std::size_t n = static_cast<std::size_t>(cfg.n);
    const std::size_t i0 = static_cast<std::size_t>(cfg.correlation_index);

    // For one snapshot: eta_{i0+d} for each d, and ring sums for the pooled estimate.
    struct Snap {
        double self = 0.0;          // eta_{i0}
        std::vector<double> fixed;  // eta_{i0 + d}
        double s1 = 0.0, s2 = 0.0;
        std::vector<double> lag;    // sum_i eta_i eta_{i+d}
    };
    auto summarize = [&](std::span<const double> eta) {
        Snap s;
        s.self = eta[i0];
        for (double e : eta) {
            s.s1 += e;
            s.s2 += e * e;
        }
        for (int d : ds) {
            const auto du = static_cast<std::size_t>(d);
            s.fixed.push_back(eta[(i0 + du) % n]);
            double c = 0.0;
            for (std::size_t i = 0; i < n; ++i) c += eta[i] * eta[(i + du) % n];
            s.lag.push_back(c);
        }
        return s;
    };

    struct Sample {
        Snap at_ts, at_te;
        bool ok = false;
    };
    const auto opts = detail::entry_stop(cfg);
    auto per = parallel_map(static_cast<std::size_t>(cfg.samples), cfg.workers, [&](std::size_t i) {
        const RingState init = detail::initial_for(cfg.n, cfg.seed, i);
        std::vector<double> last_change, entry;
        const auto ev = watch_trajectory(init, cfg.h, cfg.t_end, opts, [&](const StepView& v) {
            if (v.k == 0 || v.q_changed) last_change.assign(v.diffs.begin(), v.diffs.end());
            if (v.just_entered) entry.assign(v.diffs.begin(), v.diffs.end());
        });
        Sample s;
        s.ok = ev.converged && !entry.empty();
        if (s.ok) {
            s.at_ts = summarize(last_change);
            s.at_te = summarize(entry);
        }
        return s;
    });

    CorrelationResult out;
    out.index = cfg.correlation_index;
    std::vector<const Sample*> good;
    for (const Sample& s : per) {
        if (s.ok) good.push_back(&s);
        else ++out.excluded;
    }
    out.used = static_cast<long>(good.size());
    if (good.size() < 3) return out;
    out.noise_band = stats::null_abs_r(good.size());

    std::vector<std::size_t> perm(good.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(splitmix64(cfg.seed ^ 0x5bd1e995ULL));
    std::shuffle(perm.begin(), perm.end(), shuffle_rng);

    auto pooled = [&](auto member, std::size_t k) {
        double s1 = 0.0, s2 = 0.0, c = 0.0;
        for (const Sample* s : good) {
            const Snap& snap = s->*member;
            s1 += snap.s1;
            s2 += snap.s2;
            c += snap.lag[k];
        }
        const double m = static_cast<double>(good.size() * n);
        const double mean = s1 / m;
        const double var = s2 / m - mean * mean;
        return (c / m - mean * mean) / var;
    };
    auto fixed = [&](auto member, std::size_t k, bool permuted) {
        std::vector<double> x(good.size()), y(good.size());
        for (std::size_t s = 0; s < good.size(); ++s) {
            x[s] = (good[s]->*member).self;
            y[s] = (good[permuted ? perm[s] : s]->*member).fixed[k];
        }
        return stats::pearson_r(x, y);
    };

    for (std::size_t k = 0; k < ds.size(); ++k) {
        CorrelationRow row;
        row.d = ds[k];
        row.r_ts = fixed(&Sample::at_ts, k, false);
        row.r_te = fixed(&Sample::at_te, k, false);
        row.r_ts_null = fixed(&Sample::at_ts, k, true);
        row.r_te_null = fixed(&Sample::at_te, k, true);
        row.r_ts_pooled = pooled(&Sample::at_ts, k);
        row.r_te_pooled = pooled(&Sample::at_te, k);
        out.rows.push_back(row);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Per-coordinate entry times into |eta_i| < pi/2.

struct EntryTimesResult {
    long coordinates = 0;
    long zero_count = 0;
    double zero_fraction = 0.0;
    long used = 0;
    long excluded = 0;
    std::optional<stats::ExponentialTailFit> fit;  // nonzero entry times
    std::optional<stats::BinnedHistogram> histogram;
};

inline EntryTimesResult run_entry_times(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto opts = detail::entry_stop(cfg);
    struct Sample {
        std::vector<double> entry;
        bool ok = false;
    };
    auto per = parallel_map(static_cast<std::size_t>(cfg.samples), cfg.workers, [&](std::size_t i) {
        auto ev = watch_trajectory(detail::initial_for(cfg.n, cfg.seed, i), cfg.h, cfg.t_end, opts);
        return Sample{std::move(ev.entry_times), ev.converged};
    });
    EntryTimesResult out;
    std::vector<double> nonzero;
    for (const Sample& s : per) {
        if (!s.ok) {
            ++out.excluded;
            continue;
        }
        ++out.used;
        for (double e : s.entry) {
            ++out.coordinates;
            if (e == 0.0) ++out.zero_count;
            else nonzero.push_back(e);
        }
    }
    if (out.coordinates > 0) out.zero_fraction = static_cast<double>(out.zero_count) / static_cast<double>(out.coordinates);
    if (nonzero.size() >= 100) out.fit = stats::fit_exponential_tail(nonzero);
    if (!nonzero.empty()) {
        const double top = *std::max_element(nonzero.begin(), nonzero.end());
        const auto bins = static_cast<std::size_t>(std::ceil(top / cfg.entry_bin_width));
        out.histogram = stats::histogram(nonzero, {0.0, cfg.entry_bin_width * static_cast<double>(std::max<std::size_t>(bins, 1)),
                                                   std::max<std::size_t>(bins, 1)});
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Energy decay.

struct EnergyRow {
    double t = 0.0;
    double mean = 0.0;  // ensemble mean of E_n / n
    double sd = 0.0;
};

struct EnergyDecayResult {
    std::vector<EnergyRow> rows;
    std::optional<stats::FitResult> fit;  // log(mean E/n) against t inside the fit window
    double decay_rate = 0.0;              // -slope of the fit
    double window_lo = 0.05, window_hi = 0.9;
    long increases = 0;                   // steps with E rising by more than the slack
    long non_monotone_trajectories = 0;
    double max_increase = 0.0;
};

inline constexpr double kEnergySlack = 1e-9;

inline EnergyDecayResult run_energy_decay(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<double> times;
    for (double t : cfg.checkpoints.empty() ? default_config(Campaign::energy_decay).checkpoints : cfg.checkpoints)
        if (std::isfinite(t) && t <= cfg.t_end) times.push_back(t);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    std::vector<long> step_of;
    for (double t : times) step_of.push_back(std::lround(t / cfg.h));
    const long last_step = step_count(cfg.h, cfg.t_end);

    struct Sample {
        std::vector<double> e;
        long increases = 0;
        double max_increase = 0.0;
    };
    WatchOptions opts;
    opts.conv_tol = cfg.conv_tol;
    const double nd = static_cast<double>(cfg.n);
    auto per = parallel_map(static_cast<std::size_t>(cfg.samples), cfg.workers, [&](std::size_t i) {
        Sample s;
        s.e.assign(times.size(), std::numeric_limits<double>::quiet_NaN());
        double prev = std::numeric_limits<double>::infinity();
        watch_trajectory(detail::initial_for(cfg.n, cfg.seed, i), cfg.h, cfg.t_end, opts, [&](const StepView& v) {
            double e = nd;
            for (double d : v.diffs) e -= std::cos(d);
            if (e > prev + kEnergySlack) {
                ++s.increases;
                s.max_increase = std::max(s.max_increase, e - prev);
            }
            prev = e;
            for (std::size_t c = 0; c < times.size(); ++c)
                if (step_of[c] == v.k || (step_of[c] > last_step && v.k == last_step)) s.e[c] = e / nd;
        });
        return s;
    });

    EnergyDecayResult out;
    for (const Sample& s : per) {
        out.increases += s.increases;
        if (s.increases > 0) ++out.non_monotone_trajectories;
        out.max_increase = std::max(out.max_increase, s.max_increase);
    }
    std::vector<double> fx, fy;
    for (std::size_t c = 0; c < times.size(); ++c) {
        std::vector<double> col;
        for (const Sample& s : per) col.push_back(s.e[c]);
        EnergyRow row;
        row.t = times[c];
        row.mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(col.size());
        row.sd = detail::stddev(col);
        out.rows.push_back(row);
        if (row.mean > out.window_lo && row.mean < out.window_hi) {
            fx.push_back(row.t);
            fy.push_back(std::log(row.mean));
        }
    }
    if (fx.size() >= 3) {
        out.fit = stats::fit_linear(fx, fy);
        out.decay_rate = -out.fit->slope();
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Explicit Euler on the differences against a fine RK4 reference.

struct EulerRow {
    double h = 0.0;
    double mean_error = 0.0;  // mean over trajectories of max_i |eta_i^h - eta_i|
    double max_error = 0.0;
    double disagreement = 0.0;  // fraction of trajectories with q^h != q
};

struct EulerCompareResult {
    double t_compare = 0.0;
    long samples = 0;
    std::vector<EulerRow> rows;
    std::optional<stats::FitResult> order_fit;  // log mean error against log h
};

/// Comparison time: compare_c * log n rounded up to a multiple of the coarsest step.
inline double euler_compare_time(const ExperimentConfig& cfg) {
    const double coarse = *std::max_element(cfg.h_list.begin(), cfg.h_list.end());
    return std::ceil(cfg.compare_c * std::log(static_cast<double>(cfg.n)) / coarse - 1e-9) * coarse;
}

inline EulerCompareResult run_euler_comparison(const ExperimentConfig& cfg) {
    cfg.validate();
    EulerCompareResult out;
    out.samples = cfg.samples;
    out.t_compare = euler_compare_time(cfg);
    auto steps_for = [&](double h, const char* field) {
        const double ratio = out.t_compare / h;
        if (std::abs(ratio - std::round(ratio)) > 1e-6)
            throw ConfigError(field, "step does not divide the comparison time " + std::to_string(out.t_compare));
        return std::lround(ratio);
    };
    std::vector<long> steps;
    for (double h : cfg.h_list) steps.push_back(steps_for(h, "/h_list"));
    const long ref_steps = steps_for(cfg.h_ref, "/h_ref");

    struct Sample {
        std::vector<double> err;
        std::vector<int> disagree;
    };
    auto per = parallel_map(static_cast<std::size_t>(cfg.samples), cfg.workers, [&](std::size_t i) {
        const RingState init = detail::initial_for(cfg.n, cfg.seed, i);
        const RingState ref = integrate(init, cfg.h_ref, static_cast<double>(ref_steps) * cfg.h_ref);
        const PhaseDiffState ref_d = to_diffs(ref);
        const auto q_ref = detail::winding_from_diffs(ref_d.diffs(), kDefaultTolPi);
        Sample s;
        EulerStepper euler(init.size());
        const PhaseDiffState start = to_diffs(init);
        for (std::size_t k = 0; k < cfg.h_list.size(); ++k) {
            std::vector<double> d(start.diffs().begin(), start.diffs().end());
            for (long j = 0; j < steps[k]; ++j) euler.step(d, cfg.h_list[k]);
            double err = 0.0;
            for (std::size_t c = 0; c < d.size(); ++c) err = std::max(err, std::abs(wrap_to_pi(d[c] - ref_d[c])));
            s.err.push_back(err);
            s.disagree.push_back(detail::winding_from_diffs(d, kDefaultTolPi) != q_ref ? 1 : 0);
        }
        return s;
    });

    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < cfg.h_list.size(); ++k) {
        EulerRow row;
        row.h = cfg.h_list[k];
        long dis = 0;
        for (const Sample& s : per) {
            row.mean_error += s.err[k];
            row.max_error = std::max(row.max_error, s.err[k]);
            dis += s.disagree[k];
        }
        row.mean_error /= static_cast<double>(per.size());
        row.disagreement = static_cast<double>(dis) / static_cast<double>(per.size());
        out.rows.push_back(row);
        if (row.mean_error > 0.0) {
            lx.push_back(std::log(row.h));
            ly.push_back(std::log(row.mean_error));
        }
    }
    if (lx.size() >= 3) out.order_fit = stats::fit_linear(lx, ly);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Basin census: final winding number frequencies and Gaussian-vs-exponential model comparison.

struct ModelFit {
    double k = 0.0;             // decay constant: p(q) ~ exp(log_prefactor - k * feature(q))
    double log_prefactor = 0.0;
    stats::FitResult fit;       // residual_ss is the Poisson-weighted RSS
    double aic = 0.0;           // weighted RSS + 2 * parameter count
};

struct BasinCensus {
    std::map<long, long> counts;
    long total = 0;
    long not_converged = 0;
    std::optional<ModelFit> gaussian;     // log p(q) against q^2
    std::optional<ModelFit> exponential;  // log p(q) against |q|
    int q_fit_max = 4;
    long audit_checked = 0;
    long audit_mismatches = 0;
    long audit_unconverged = 0;

    bool valid() const { return total > 0 && static_cast<double>(not_converged) <= 0.01 * static_cast<double>(total); }
};

/// Largest |c(q) - c(-q)| / sqrt(c(q) + c(-q)) over q > 0: the reflection asymmetry in
/// multinomial standard deviations.
inline double symmetry_max_z(const std::map<long, long>& counts) {
    double worst = 0.0;
    for (const auto& [q, c] : counts) {
        if (q <= 0) continue;
        const auto it = counts.find(-q);
        const long m = it == counts.end() ? 0 : it->second;
        const double z = std::abs(static_cast<double>(c - m)) / std::sqrt(static_cast<double>(c + m));
        worst = std::max(worst, z);
    }
    for (const auto& [q, c] : counts)
        if (q < 0 && !counts.contains(-q)) worst = std::max(worst, std::sqrt(static_cast<double>(c)));
    return worst;
}

/// Poisson-weighted fits of log p(q) on q^2 and on |q| over 0 < c(q), |q| <= q_max.
inline void fit_basin_models(BasinCensus& census) {
    std::vector<double> sq, ab, y, w;
    for (const auto& [q, c] : census.counts) {
        if (c <= 0 || std::abs(q) > census.q_fit_max) continue;
        const double qd = static_cast<double>(q);
        sq.push_back(qd * qd);
        ab.push_back(std::abs(qd));
        y.push_back(std::log(static_cast<double>(c) / static_cast<double>(census.total)));
        w.push_back(static_cast<double>(c));
    }
    if (y.size() < 3) return;
    auto make = [&](const std::vector<double>& x) {
        ModelFit m;
        m.fit = stats::fit_linear(x, y, std::span<const double>(w));
        m.k = -m.fit.slope();
        m.log_prefactor = m.fit.intercept();
        m.aic = m.fit.residual_ss + 4.0;
        return m;
    };
    census.gaussian = make(sq);
    census.exponential = make(ab);
}

inline BasinCensus run_basin_census(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto opts = detail::entry_stop(cfg);
    struct Sample {
        std::optional<int> q;
        bool ok = false;
    };
    auto per = parallel_map(static_cast<std::size_t>(cfg.samples), cfg.workers, [&](std::size_t i) {
        const auto ev = watch_trajectory(detail::initial_for(cfg.n, cfg.seed, i), cfg.h, cfg.t_end, opts);
        return Sample{ev.final_q, ev.converged};
    });
    BasinCensus census;
    census.total = cfg.samples;
    census.q_fit_max = cfg.q_fit_max;
    for (const Sample& s : per) {
        if (s.ok) ++census.counts[*s.q];
        else ++census.not_converged;
    }
    fit_basin_models(census);

    if (cfg.audit_samples > 0) {
        WatchOptions full;
        full.conv_tol = cfg.conv_tol;
        struct Audit {
            bool converged = false;
            bool mismatch = false;
        };
        auto audit = parallel_map(static_cast<std::size_t>(cfg.audit_samples), cfg.workers, [&](std::size_t i) {
            const auto ev = watch_trajectory(detail::initial_for(cfg.n, cfg.seed, i), cfg.h, cfg.audit_t_end, full);
            return Audit{ev.converged, ev.converged && per[i].ok && ev.final_q != per[i].q};
        });
        for (const Audit& a : audit) {
            ++census.audit_checked;
            if (!a.converged) ++census.audit_unconverged;
            if (a.mismatch) ++census.audit_mismatches;
        }
    }
    return census;
}

}  // namespace ringsync
