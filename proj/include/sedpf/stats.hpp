#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace sedpf {
namespace stats {

inline double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// Unbiased sample variance (n-1 denominator); 0 for n < 2.
inline double variance(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

inline double stderr_of_mean(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

// Linear-interpolated quantile, q in [0,1]. Sorts a copy.
inline double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    if (q <= 0.0) return xs.front();
    if (q >= 1.0) return xs.back();
    double pos = q * static_cast<double>(xs.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= xs.size()) return xs.back();
    return xs[lo] * (1.0 - frac) + xs[lo + 1] * frac;
}

struct BoxStats {
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double whisker_lo = 0.0;  // min sample >= q1 - 1.5 IQR
    double whisker_hi = 0.0;  // max sample <= q3 + 1.5 IQR
    double p99 = 0.0;
    double max = 0.0;
};

inline BoxStats box_stats(const std::vector<double>& xs) {
    BoxStats b;
    if (xs.empty()) return b;
    b.mean = mean(xs);
    b.median = quantile(xs, 0.5);
    b.q1 = quantile(xs, 0.25);
    b.q3 = quantile(xs, 0.75);
    b.p99 = quantile(xs, 0.99);
    double iqr = b.q3 - b.q1;
    double lo_fence = b.q1 - 1.5 * iqr;
    double hi_fence = b.q3 + 1.5 * iqr;
    b.whisker_lo = b.q3;
    b.whisker_hi = b.q1;
    b.max = xs.front();
    for (double x : xs) {
        b.max = std::max(b.max, x);
        if (x >= lo_fence) b.whisker_lo = std::min(b.whisker_lo, x);
        if (x <= hi_fence) b.whisker_hi = std::max(b.whisker_hi, x);
    }
    return b;
}

// Two-sided binomial confidence half-width (normal approximation with
// continuity correction). z99 = 2.576, z95 = 1.960.
inline double binomial_ci_halfwidth(double p, std::size_t n, double z) {
    if (n == 0) return 1.0;
    double nn = static_cast<double>(n);
    return z * std::sqrt(std::max(p * (1.0 - p), 1e-12) / nn) + 0.5 / nn;
}

constexpr double kZ95 = 1.959963985;
constexpr double kZ99 = 2.575829304;
// One-sided 95% t quantiles for small seed counts, df = n-1.
inline double t95_one_sided(std::size_t n) {
    static const double table[] = {0, 6.314, 2.920, 2.353, 2.132, 2.015, 1.943, 1.895,
                                   1.860, 1.833, 1.812, 1.796, 1.782, 1.771, 1.761,
                                   1.753, 1.746, 1.740, 1.734, 1.729, 1.725};
    if (n < 2) return 6.314;
    std::size_t df = n - 1;
    if (df < sizeof(table) / sizeof(table[0])) return table[df];
    return 1.645;
}

}  // namespace stats
}  // namespace sedpf
