#pragma once

// Small statistics kernel: moments, Pearson correlation, weighted straight-line fits,
// exponential-tail fits and histograms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "ringsync/errors.hpp"

namespace ringsync::stats {

struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;         // unbiased (N - 1)
    double skewness = 0.0;         // m3 / m2^1.5
    double excess_kurtosis = 0.0;  // m4 / m2^2 - 3
};

inline Moments moments(std::span<const double> x) {
    if (x.size() < 2) throw InvalidArgument("moments: need at least 2 samples");
    Moments m;
    m.count = x.size();
    const double n = static_cast<double>(x.size());
    double sum = 0.0;
    for (double v : x) sum += v;
    m.mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - m.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m.variance = m2 / (n - 1.0);
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 > 0.0) {
        m.skewness = m3 / std::pow(m2, 1.5);
        m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return m;
}

/// Product-moment correlation. Throws DegenerateData if either input has zero variance.
inline double pearson_r(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidArgument("pearson_r: length mismatch");
    if (x.size() < 3) throw InvalidArgument("pearson_r: need at least 3 samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw DegenerateData("pearson_r: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// E|r| for two independent samples of length N: sqrt(2) / (sqrt(pi) * sqrt(N - 1)).
inline double null_abs_r(std::size_t samples) {
    return std::sqrt(2.0) / (std::sqrt(std::numbers::pi) * std::sqrt(static_cast<double>(samples) - 1.0));
}

struct FitResult {
    std::vector<double> params;  // {intercept, slope}
    double r_squared = 0.0;
    double residual_ss = 0.0;    // weighted when weights were given
    std::size_t n_points = 0;
    double slope_stderr = 0.0;

    double intercept() const { return params.at(0); }
    double slope() const { return params.at(1); }
};

/// Weighted least-squares line y = a + b x. Weights, when given, are inverse variances.
inline FitResult fit_linear(std::span<const double> x, std::span<const double> y,
                            std::optional<std::span<const double>> weights = std::nullopt) {
    if (x.size() != y.size() || (weights && weights->size() != x.size()))
        throw InvalidArgument("fit_linear: length mismatch");
    if (x.size() < 3) throw InvalidArgument("fit_linear: need at least 3 points");
    auto w = [&](std::size_t i) { return weights ? (*weights)[i] : 1.0; };

    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wi = w(i);
        if (!(wi > 0.0) || !std::isfinite(wi)) throw InvalidArgument("fit_linear: weights must be positive");
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidArgument("fit_linear: non-finite data");
        sw += wi;
        sx += wi * x[i];
        sy += wi * y[i];
    }
    const double xbar = sx / sw, ybar = sy / sw;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - xbar, dy = y[i] - ybar;
        sxx += w(i) * dx * dx;
        sxy += w(i) * dx * dy;
        syy += w(i) * dy * dy;
    }
    if (!(sxx > 0.0)) throw DegenerateData("fit_linear: singular design (x has no spread)");

    FitResult fit;
    const double slope = sxy / sxx;
    const double intercept = ybar - slope * xbar;
    fit.params = {intercept, slope};
    fit.n_points = x.size();
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (intercept + slope * x[i]);
        fit.residual_ss += w(i) * r * r;
    }
    if (syy > 0.0) fit.r_squared = std::clamp(1.0 - fit.residual_ss / syy, 0.0, 1.0);
    else fit.r_squared = fit.residual_ss == 0.0 ? 1.0 : 0.0;
    fit.slope_stderr = std::sqrt(fit.residual_ss / static_cast<double>(x.size() - 2) / sxx);
    return fit;
}

struct ExponentialTailFit {
    double rate = 0.0;  // maximum-likelihood 1 / mean
    double mean = 0.0;
    std::size_t count = 0;
    double survival_r2 = std::numeric_limits<double>::quiet_NaN();
    double survival_slope = std::numeric_limits<double>::quiet_NaN();
    std::size_t survival_points = 0;
    bool degenerate = false;  // survival curve unusable (e.g. all samples equal)
};

/// Exponential fit to strictly positive samples, with a linearity diagnostic of the empirical
/// log-survival function up to the `upper_quantile` point.
inline ExponentialTailFit fit_exponential_tail(std::span<const double> samples, double upper_quantile = 0.99) {
    if (samples.size() < 100) throw InvalidArgument("fit_exponential_tail: need at least 100 samples");
    ExponentialTailFit fit;
    std::vector<double> sorted(samples.begin(), samples.end());
    double sum = 0.0;
    for (double s : sorted) {
        if (!(s > 0.0) || !std::isfinite(s))
            throw InvalidArgument("fit_exponential_tail: samples must be positive and finite");
        sum += s;
    }
    fit.count = sorted.size();
    fit.mean = sum / static_cast<double>(fit.count);
    fit.rate = 1.0 / fit.mean;

    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<double> t, log_s;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double below = static_cast<double>(i + 1) / n;
        if (below > upper_quantile) break;
        t.push_back(sorted[i]);
        log_s.push_back(std::log1p(-below));
    }
    fit.survival_points = t.size();
    if (t.size() < 3 || t.front() == t.back()) {
        fit.degenerate = true;
        return fit;
    }
    const FitResult line = fit_linear(t, log_s);
    fit.survival_r2 = line.r_squared;
    fit.survival_slope = line.slope();
    return fit;
}

/// Exact integer-valued histogram.
inline std::map<long, long> histogram(std::span<const int> samples) {
    if (samples.empty()) throw InvalidArgument("histogram: empty input");
    std::map<long, long> counts;
    for (int s : samples) ++counts[s];
    return counts;
}

struct BinSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t bins = 10;
};

struct BinnedHistogram {
    BinSpec spec;
    std::vector<long> counts;

    double width() const { return (spec.hi - spec.lo) / static_cast<double>(spec.bins); }
    double left_edge(std::size_t b) const { return spec.lo + width() * static_cast<double>(b); }
};

/// Equal-width bins on [lo, hi]; hi itself lands in the last bin. Samples outside the range throw.
inline BinnedHistogram histogram(std::span<const double> samples, const BinSpec& spec) {
    if (samples.empty()) throw InvalidArgument("histogram: empty input");
    if (spec.bins == 0 || !(spec.hi > spec.lo)) throw InvalidArgument("histogram: invalid binning");
    BinnedHistogram h{spec, std::vector<long>(spec.bins, 0)};
    const double scale = static_cast<double>(spec.bins) / (spec.hi - spec.lo);
    for (double s : samples) {
        if (!(s >= spec.lo && s <= spec.hi)) throw InvalidArgument("histogram: sample outside bin range");
        auto b = static_cast<std::size_t>((s - spec.lo) * scale);
        ++h.counts[std::min(b, spec.bins - 1)];
    }
    return h;
}

}  // namespace ringsync::stats
