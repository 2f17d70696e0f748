#pragma once
// Order-statistic utilities: interpolated quantiles, PIT values, and the
// point summaries used by the coverage harness.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace swizs {

// Linearly interpolated order-statistic quantile (R type 7) of a *sorted*
// sample.
inline double quantile_sorted(const std::vector<double>& x, double p) {
    if (x.empty()) throw std::invalid_argument("quantile: empty sample");
    if (p <= 0.0) return x.front();
    if (p >= 1.0) return x.back();
    const double h = p * (static_cast<double>(x.size()) - 1.0);
    const size_t lo = static_cast<size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= x.size()) return x.back();
    return x[lo] + frac * (x[lo + 1] - x[lo]);
}

inline double quantile(std::vector<double> x, double p) {
    std::sort(x.begin(), x.end());
    return quantile_sorted(x, p);
}

// Probability integral transform of `value` within sample `x`: fraction of
// draws strictly below plus half the ties (mid-rank convention).
inline double pit_value(const std::vector<double>& x, double value) {
    if (x.empty()) throw std::invalid_argument("pit_value: empty sample");
    size_t below = 0, ties = 0;
    for (double v : x) {
        if (v < value) ++below;
        else if (v == value) ++ties;
    }
    return (static_cast<double>(below) + 0.5 * static_cast<double>(ties))
           / static_cast<double>(x.size());
}

inline double mean(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("mean: empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("variance: need >= 2 values");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / (static_cast<double>(x.size()) - 1.0);
}

inline double median(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const size_t n = x.size();
    if (n == 0) throw std::invalid_argument("median: empty sample");
    return (n % 2 == 1) ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

// Median absolute deviation from `center` (no consistency constant).
inline double mad(const std::vector<double>& x, double center) {
    std::vector<double> d(x.size());
    for (size_t i = 0; i < x.size(); ++i) d[i] = std::fabs(x[i] - center);
    return median(std::move(d));
}

} // namespace swizs
