#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "pulseilp/errors.hpp"

namespace pulseilp {

// Small self-contained statistics kit: one-sample t-test (p-values through
// the regularized incomplete beta function), Pearson correlation matrices,
// and the summary helpers the experiment reports need. Conventions for
// degenerate inputs are pinned here and tested: zero-variance samples give
// p = 0 (mean != mu0) or p = 1 (mean == mu0); zero-variance dimensions
// correlate 0 with everything else and 1 with themselves.

namespace detail {

// Continued-fraction core of the incomplete beta function (modified Lentz).
inline double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= kEps) break;
    }
    return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return bt * detail::beta_cf(a, b, x) / a;
    }
    return 1.0 - bt * detail::beta_cf(b, a, 1.0 - x) / b;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e;
    return s / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1 denominator).
inline double sample_sd(const std::vector<double>& v) {
    const double mu = mean(v);
    double s = 0.0;
    for (double e : v) s += (e - mu) * (e - mu);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Median; even-length samples average the two middle order statistics.
inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    std::size_t n = 0;
    double sample_mean = 0.0;
    double sample_sd = 0.0;
};

// Two-sided one-sample t-test of H0: mean == mu0.
inline TTestResult t_test_one_sample(const std::vector<double>& values, double mu0) {
    if (values.size() < 3) {
        throw UndersizedSampleError("t-test needs at least 3 values, got " +
                                    std::to_string(values.size()));
    }
    TTestResult res;
    res.n = values.size();
    bool constant = true;
    for (double v : values) {
        if (v != values.front()) {
            constant = false;
            break;
        }
    }
    if (constant) {
        // Degenerate sample: every value identical. The test statistic is
        // unbounded; pin the p-value by convention. (Checked on the raw
        // values, not on the computed sd, which picks up rounding noise.)
        res.sample_mean = values.front();
        res.sample_sd = 0.0;
        if (res.sample_mean == mu0) {
            res.t = 0.0;
            res.p = 1.0;
        } else {
            res.t = res.sample_mean > mu0 ? std::numeric_limits<double>::infinity()
                                          : -std::numeric_limits<double>::infinity();
            res.p = 0.0;
        }
        return res;
    }
    res.sample_mean = mean(values);
    res.sample_sd = sample_sd(values);
    const double nf = static_cast<double>(res.n);
    res.t = (res.sample_mean - mu0) / (res.sample_sd / std::sqrt(nf));
    const double df = nf - 1.0;
    res.p = incomplete_beta(0.5 * df, 0.5, df / (df + res.t * res.t));
    return res;
}

// Pearson correlation matrix of a point cloud. `points` holds observations;
// every observation is a vector of the same dimension. Entries are clamped
// into [-1, 1] against floating-point drift.
inline std::vector<std::vector<double>> pearson_matrix(const std::vector<std::vector<double>>& points) {
    if (points.size() < 3) {
        throw UndersizedSampleError("correlation matrix needs at least 3 points, got " +
                                    std::to_string(points.size()));
    }
    const std::size_t n = points.size();
    const std::size_t dims = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dims) {
            throw DimensionError("correlation input has ragged point dimensions");
        }
    }
    std::vector<double> mu(dims, 0.0);
    for (const auto& p : points) {
        for (std::size_t j = 0; j < dims; ++j) mu[j] += p[j];
    }
    for (double& v : mu) v /= static_cast<double>(n);

    std::vector<std::vector<double>> cov(dims, std::vector<double>(dims, 0.0));
    for (const auto& p : points) {
        for (std::size_t a = 0; a < dims; ++a) {
            const double da = p[a] - mu[a];
            for (std::size_t b = a; b < dims; ++b) {
                cov[a][b] += da * (p[b] - mu[b]);
            }
        }
    }
    std::vector<std::vector<double>> r(dims, std::vector<double>(dims, 0.0));
    for (std::size_t a = 0; a < dims; ++a) {
        r[a][a] = 1.0;
        for (std::size_t b = a + 1; b < dims; ++b) {
            const double denom = std::sqrt(cov[a][a] * cov[b][b]);
            double val = 0.0;
            if (denom > 0.0) {
                val = cov[a][b] / denom;
                val = std::clamp(val, -1.0, 1.0);
            }
            r[a][b] = val;
            r[b][a] = val;
        }
    }
    return r;
}

// Kolmogorov-Smirnov distance of a sample against Uniform[0,1]; used by the
// property tests for p-value uniformity and the randomized-search baseline.
inline double ks_uniform_distance(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = std::clamp(sample[i], 0.0, 1.0);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

}  // namespace pulseilp
