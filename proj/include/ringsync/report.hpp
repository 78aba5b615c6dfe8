#pragma once

// CSV tables and JSON summaries for campaign results. Numbers are written in shortest
// round-trip form so identical results give byte-identical files.

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "json.hpp"
#include "ringsync/experiments.hpp"

namespace ringsync::report {

inline std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

inline std::string time_label(double t) { return std::isfinite(t) ? num(t) : "converged"; }

inline nlohmann::json json_num(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

inline nlohmann::json fit_json(const stats::FitResult& f) {
    return {{"intercept", f.intercept()}, {"slope", f.slope()}, {"r_squared", f.r_squared},
            {"residual_ss", f.residual_ss}, {"n_points", f.n_points}, {"slope_stderr", f.slope_stderr}};
}

// q_distribution -------------------------------------------------------------------------------

/// Columns: t,q,count (one row per histogram bin).
inline void write_csv(std::ostream& os, const QDistributionResult& r) {
    os << "t,q,count\n";
    for (const auto& cp : r.checkpoints)
        for (const auto& [q, c] : cp.histogram) os << time_label(cp.t) << ',' << q << ',' << c << '\n';
}

/// Columns: t,samples,mean,variance,skewness,excess_kurtosis (one row per checkpoint).
inline void write_summary_csv(std::ostream& os, const QDistributionResult& r) {
    os << "t,samples,mean,variance,skewness,excess_kurtosis\n";
    for (const auto& cp : r.checkpoints)
        os << time_label(cp.t) << ',' << cp.moments.count << ',' << num(cp.moments.mean) << ','
           << num(cp.moments.variance) << ',' << num(cp.moments.skewness) << ',' << num(cp.moments.excess_kurtosis)
           << '\n';
}

inline nlohmann::json summary(const QDistributionResult& r) {
    return {{"trajectories", r.trajectories}, {"excluded", r.excluded}, {"resampled", r.resampled}};
}

// timing_scan ----------------------------------------------------------------------------------

/// Columns: n,used,excluded,mean_ts,sd_ts,mean_te,sd_te,order_violations.
inline void write_csv(std::ostream& os, const TimingScanResult& r) {
    os << "n,used,excluded,mean_ts,sd_ts,mean_te,sd_te,order_violations\n";
    for (const auto& row : r.rows)
        os << row.n << ',' << row.used << ',' << row.excluded << ',' << num(row.mean_ts) << ',' << num(row.sd_ts)
           << ',' << num(row.mean_te) << ',' << num(row.sd_te) << ',' << row.order_violations << '\n';
}

inline nlohmann::json summary(const TimingScanResult& r) {
    nlohmann::json j;
    long excluded = 0, violations = 0;
    for (const auto& row : r.rows) {
        excluded += row.excluded;
        violations += row.order_violations;
    }
    j["excluded"] = excluded;
    j["order_violations"] = violations;
    if (r.fit_ts) j["fit_ts_vs_log_n"] = fit_json(*r.fit_ts);
    if (r.fit_te) j["fit_te_vs_log_n"] = fit_json(*r.fit_te);
    return j;
}

// correlation_probe ----------------------------------------------------------------------------

/// Columns: d,r_ts,r_te,r_ts_pooled,r_te_pooled,r_ts_null,r_te_null,noise_band.
inline void write_csv(std::ostream& os, const CorrelationResult& r) {
    os << "d,r_ts,r_te,r_ts_pooled,r_te_pooled,r_ts_null,r_te_null,noise_band\n";
    for (const auto& row : r.rows)
        os << row.d << ',' << num(row.r_ts) << ',' << num(row.r_te) << ',' << num(row.r_ts_pooled) << ','
           << num(row.r_te_pooled) << ',' << num(row.r_ts_null) << ',' << num(row.r_te_null) << ','
           << num(r.noise_band) << '\n';
}

inline nlohmann::json summary(const CorrelationResult& r) {
    return {{"used", r.used},
            {"excluded", r.excluded},
            {"fixed_index", r.index},
            {"pooled_variant", "all ring positions i pooled"},
            {"null_variant", "fixed index with sample order permuted"},
            {"noise_band", r.noise_band}};
}

// entry_times ----------------------------------------------------------------------------------

/// Columns: bin_lo,bin_hi,count (nonzero entry times only).
inline void write_csv(std::ostream& os, const EntryTimesResult& r) {
    os << "bin_lo,bin_hi,count\n";
    if (!r.histogram) return;
    const auto& h = *r.histogram;
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        os << num(h.left_edge(b)) << ',' << num(h.left_edge(b + 1)) << ',' << h.counts[b] << '\n';
}

inline nlohmann::json summary(const EntryTimesResult& r) {
    nlohmann::json j{{"coordinates", r.coordinates}, {"zero_count", r.zero_count}, {"zero_fraction", r.zero_fraction},
                     {"used", r.used}, {"excluded", r.excluded}};
    if (r.fit)
        j["exponential_fit"] = {{"rate", r.fit->rate},
                                {"mean", r.fit->mean},
                                {"count", r.fit->count},
                                {"log_survival_r_squared", json_num(r.fit->survival_r2)},
                                {"log_survival_slope", json_num(r.fit->survival_slope)},
                                {"degenerate", r.fit->degenerate}};
    return j;
}

// energy_decay ---------------------------------------------------------------------------------

/// Columns: t,mean_energy_per_n,sd.
inline void write_csv(std::ostream& os, const EnergyDecayResult& r) {
    os << "t,mean_energy_per_n,sd\n";
    for (const auto& row : r.rows) os << num(row.t) << ',' << num(row.mean) << ',' << num(row.sd) << '\n';
}

inline nlohmann::json summary(const EnergyDecayResult& r) {
    nlohmann::json j{{"increases", r.increases},
                     {"non_monotone_trajectories", r.non_monotone_trajectories},
                     {"max_increase", r.max_increase},
                     {"fit_window", {r.window_lo, r.window_hi}},
                     {"decay_rate", r.decay_rate}};
    if (r.fit) j["fit_log_energy_vs_t"] = fit_json(*r.fit);
    return j;
}

// euler_compare --------------------------------------------------------------------------------

/// Columns: h,mean_error,max_error,disagreement.
inline void write_csv(std::ostream& os, const EulerCompareResult& r) {
    os << "h,mean_error,max_error,disagreement\n";
    for (const auto& row : r.rows)
        os << num(row.h) << ',' << num(row.mean_error) << ',' << num(row.max_error) << ',' << num(row.disagreement)
           << '\n';
}

inline nlohmann::json summary(const EulerCompareResult& r) {
    nlohmann::json j{{"t_compare", r.t_compare}, {"samples", r.samples}};
    if (r.order_fit) j["fit_log_error_vs_log_h"] = fit_json(*r.order_fit);
    return j;
}

// basin_census ---------------------------------------------------------------------------------

/// Columns: q,count,p.
inline void write_csv(std::ostream& os, const BasinCensus& c) {
    os << "q,count,p\n";
    for (const auto& [q, n] : c.counts)
        os << q << ',' << n << ',' << num(static_cast<double>(n) / static_cast<double>(c.total)) << '\n';
}

/// Columns: model,k,log_prefactor,weighted_rss,r_squared,aic.
inline void write_fits_csv(std::ostream& os, const BasinCensus& c) {
    os << "model,k,log_prefactor,weighted_rss,r_squared,aic\n";
    auto row = [&](const char* name, const std::optional<ModelFit>& m) {
        if (!m) return;
        os << name << ',' << num(m->k) << ',' << num(m->log_prefactor) << ',' << num(m->fit.residual_ss) << ','
           << num(m->fit.r_squared) << ',' << num(m->aic) << '\n';
    };
    row("gaussian_q2", c.gaussian);
    row("exponential_abs_q", c.exponential);
}

inline nlohmann::json summary(const BasinCensus& c) {
    return {{"total", c.total},
            {"not_converged", c.not_converged},
            {"valid", c.valid()},
            {"q_fit_max", c.q_fit_max},
            {"symmetry_max_z", symmetry_max_z(c.counts)},
            {"audit_checked", c.audit_checked},
            {"audit_mismatches", c.audit_mismatches},
            {"audit_unconverged", c.audit_unconverged}};
}

}  // namespace ringsync::report
