#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "trailblazer/errors.hpp"

namespace trailblazer {

/// Ordinary least squares y = slope * x + intercept.
struct line_fit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    double slope_stderr = 0.0;
    int points = 0;
};

inline line_fit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    require(xs.size() == ys.size(), "fit_line needs matching vectors");
    const int n = static_cast<int>(xs.size());
    require(n >= 2, "fit_line needs at least two points");
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    require(sxx > 0.0, "fit_line needs at least two distinct x values");
    line_fit f;
    f.points = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ssr = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = ys[i] - (f.slope * xs[i] + f.intercept);
        ssr += r * r;
    }
    f.residual_rms = std::sqrt(ssr / n);
    f.slope_stderr = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
    return f;
}

/// Exact Binomial(n, p) CDF by summed pmf; used for coverage thresholds.
inline double binomial_cdf(int n, double p, int k) {
    require(n >= 0 && p >= 0.0 && p <= 1.0, "bad binomial parameters");
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    long double pmf = std::pow(1.0L - static_cast<long double>(p), n);
    long double cdf = pmf;
    for (int i = 0; i < k; ++i) {
        pmf *= static_cast<long double>(n - i) / (i + 1) * (static_cast<long double>(p) / (1.0L - p));
        cdf += pmf;
    }
    return static_cast<double>(cdf > 1.0L ? 1.0L : cdf);
}

/// Smallest k with P(X <= k) >= level for X ~ Binomial(n, p).
inline int binomial_upper_quantile(int n, double p, double level) {
    for (int k = 0; k <= n; ++k)
        if (binomial_cdf(n, p, k) >= level) return k;
    return n;
}

}  // namespace trailblazer
