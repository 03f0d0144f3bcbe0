#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sedpf {

struct Gaussian {
    double mean = 0.0;
    double var = 0.0;
};

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

namespace detail {

// Clark's moment-matched max of two independent Gaussians. Exact for the
// first two moments of max(X, Y).
inline Gaussian clark_max(const Gaussian& x, const Gaussian& y) {
    double a2 = x.var + y.var;
    if (a2 <= 0.0) {
        // Both degenerate: plain max of the means.
        return Gaussian{std::max(x.mean, y.mean), 0.0};
    }
    double a = std::sqrt(a2);
    double alpha = (x.mean - y.mean) / a;
    double cdf = normal_cdf(alpha);
    double pdf = normal_pdf(alpha);
    double m1 = x.mean * cdf + y.mean * (1.0 - cdf) + a * pdf;
    double m2 = (x.mean * x.mean + x.var) * cdf +
                (y.mean * y.mean + y.var) * (1.0 - cdf) +
                (x.mean + y.mean) * a * pdf;
    return Gaussian{m1, std::max(0.0, m2 - m1 * m1)};
}

}  // namespace detail

// E[max of independent Gaussians] by iterated pairwise moment matching in
// descending-mean order. Exact for one or two inputs and for all-degenerate
// inputs (plain max of means).
inline double expected_max(std::vector<Gaussian> gs) {
    if (gs.empty()) throw std::invalid_argument("expected_max: empty input");
    for (const auto& g : gs)
        if (g.var < 0.0) throw std::invalid_argument("expected_max: negative variance");
    std::stable_sort(gs.begin(), gs.end(),
                     [](const Gaussian& a, const Gaussian& b) { return a.mean > b.mean; });
    Gaussian acc = gs.front();
    for (std::size_t i = 1; i < gs.size(); ++i) acc = detail::clark_max(acc, gs[i]);
    return acc.mean;
}

}  // namespace sedpf
