#pragma once
// In-house special functions: digamma/trigamma and the exact finite-sample
// Kolmogorov-Smirnov distribution (Marsaglia-Tsang-Wang matrix algorithm).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace swizs {

// Digamma by upward recurrence to x >= 10, then the asymptotic (Stirling)
// series.  Absolute error below 1e-10 for arguments >= 1e-3.
inline double digamma(double x) {
    if (!(x > 0.0)) return std::nan("");
    double acc = 0.0;
    while (x < 10.0) { acc -= 1.0 / x; x += 1.0; }
    // psi(x) ~ ln x - 1/(2x) - sum B_{2k}/(2k x^{2k})
    const double inv = 1.0 / x, inv2 = inv * inv;
    double series = std::log(x) - 0.5 * inv
        - inv2 * (1.0 / 12.0
        - inv2 * (1.0 / 120.0
        - inv2 * (1.0 / 252.0
        - inv2 * (1.0 / 240.0
        - inv2 * (1.0 / 132.0)))));
    return acc + series;
}

// Trigamma with the same recurrence/series scheme.
inline double trigamma(double x) {
    if (!(x > 0.0)) return std::nan("");
    double acc = 0.0;
    while (x < 10.0) { acc += 1.0 / (x * x); x += 1.0; }
    const double inv = 1.0 / x, inv2 = inv * inv;
    double series = inv * (1.0 + 0.5 * inv
        + inv2 * (1.0 / 6.0
        - inv2 * (1.0 / 30.0
        - inv2 * (1.0 / 42.0
        - inv2 * (1.0 / 30.0)))));
    return acc + series;
}

// One-sample KS statistic sup_x |F_hat(x) - F(x)| given model CDF values
// u_i = F(x_i) (any order).
inline double ks_statistic(std::vector<double> u) {
    const size_t n = u.size();
    if (n == 0) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(u.begin(), u.end());
    double d = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double lo = u[i] - static_cast<double>(i) / n;
        double hi = static_cast<double>(i + 1) / n - u[i];
        d = std::max(d, std::max(lo, hi));
    }
    return d;
}

// Two-sample KS statistic between samples a and b.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

// Exact finite-sample CDF P(D_n < d) of the one-sample KS statistic,
// Marsaglia-Tsang-Wang matrix-power algorithm.  Intended for n <= 1e4.
inline double ks_cdf(int n, double d) {
    if (n <= 0) throw std::invalid_argument("ks_cdf: n must be positive");
    if (d <= 0.0) return 0.0;
    if (d >= 1.0) return 1.0;
    const int k = static_cast<int>(std::ceil(n * d));
    const double h = k - n * d;           // in [0,1)
    const int m = 2 * k - 1;

    std::vector<double> H(static_cast<size_t>(m) * m, 0.0);
    auto at = [&](std::vector<double>& M, int i, int j) -> double& {
        return M[static_cast<size_t>(i) * m + j];
    };
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i - j + 1 >= 0) at(H, i, j) = 1.0;
    for (int i = 0; i < m; ++i) {
        at(H, i, 0) -= std::pow(h, i + 1);
        at(H, m - 1, i) -= std::pow(h, m - i);
    }
    at(H, m - 1, 0) += (2.0 * h - 1.0 > 0.0 ? std::pow(2.0 * h - 1.0, m) : 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (i - j + 1 > 0) {
                double f = 1.0;
                for (int g = 1; g <= i - j + 1; ++g) f *= g;
                at(H, i, j) /= f;
            }

    // Q = H^n with power-of-two exponentiation; eQ tracks a 10^... exponent.
    auto matmul = [&](const std::vector<double>& A, const std::vector<double>& B,
                      std::vector<double>& C) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double s = 0.0;
                for (int g = 0; g < m; ++g)
                    s += A[static_cast<size_t>(i) * m + g]
                       * B[static_cast<size_t>(g) * m + j];
                C[static_cast<size_t>(i) * m + j] = s;
            }
    };
    auto rescale = [&](std::vector<double>& M, long& e) {
        double mid = M[static_cast<size_t>(k - 1) * m + (k - 1)];
        if (mid > 1e140) {
            for (double& v : M) v *= 1e-140;
            e += 140;
        }
    };

    // Q = H^n by binary exponentiation; eQ/ebase track decimal exponents
    // introduced by rescaling so intermediate products stay representable.
    std::vector<double> Q(H.size(), 0.0), T(H.size());
    for (int i = 0; i < m; ++i) at(Q, i, i) = 1.0;
    std::vector<double> base = H;
    long eQ = 0, ebase = 0;
    int e = n;
    while (e > 0) {
        if (e & 1) {
            matmul(Q, base, T);
            Q.swap(T);
            eQ += ebase;
            rescale(Q, eQ);
        }
        e >>= 1;
        if (e > 0) {
            matmul(base, base, T);
            base.swap(T);
            ebase *= 2;
            rescale(base, ebase);
        }
    }

    double s = Q[static_cast<size_t>(k - 1) * m + (k - 1)];
    // multiply by n!/n^n
    for (int i = 1; i <= n; ++i) {
        s *= static_cast<double>(i) / n;
        if (s < 1e-140) { s *= 1e140; eQ -= 140; }
    }
    return s * std::pow(10.0, static_cast<double>(eQ));
}

// p-value of the one-sample KS test.
inline double ks_pvalue(int n, double d) { return 1.0 - ks_cdf(n, d); }

} // namespace swizs
