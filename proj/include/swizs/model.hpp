#pragma once
// Model abstraction: a simulation-based model is a deterministic generator
// g(theta, u) driven by a pivotal batch u (distribution free of theta),
// paired with an averaged estimating function psi(x, pi) whose root in pi
// defines the auxiliary estimator.
//
// Pivotal batches are n x d matrices produced by a counter-based stream, so
// the same (seed, stream) always yields the same batch regardless of thread
// count or evaluation order.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swizs/rng.hpp"
#include "swizs/solver.hpp"

namespace swizs {

struct Model {
    std::string id;
    int p = 1;        // dim(theta)
    int dim_pi = 1;   // dim(pi)
    int n = 0;        // sample size (rows of the pivotal batch)
    int d = 1;        // pivotal columns per observation
    std::vector<bool> theta_positive;  // log-space coordinates of theta
    std::vector<bool> pi_positive;     // log-space coordinates of pi

    // Pivotal batch for one sample; must not depend on theta.
    std::function<Mat(uint64_t seed, uint64_t stream)> pivot;

    // Deterministic generator: sample matrix (n x cols) from theta and batch.
    std::function<Mat(const Vec& theta, const Mat& u)> generate;

    // Averaged estimating function of (sample, pi).
    std::function<Vec(const Mat& x, const Vec& pi)> psi;

    // Closed-form auxiliary estimate, when one exists.
    std::function<Vec(const Mat& x)> aux_closed;

    // Heuristic starting point for the auxiliary Newton fit.
    std::function<Vec(const Mat& x)> aux_start;

    // Optional explicit multi-start list (tried in order); when absent the
    // fit falls back to a generic rescaling ladder around aux_start.
    std::function<std::vector<Vec>(const Mat& x)> aux_starts;

    // Optional specialized auxiliary fit (replaces the generic Newton fit
    // entirely; used where the score has spurious roots).
    std::function<SolveResult(const Mat& x, const SolverConfig& cfg)> aux_fit;

    // Analytic d psi / d theta at (theta, u, pi), pi held fixed (optional).
    std::function<Mat(const Vec& theta, const Mat& u, const Vec& pi)> jac_theta;

    // Analytic d psi / d pi at (x, pi) for the auxiliary fit (optional).
    std::function<Mat(const Mat& x, const Vec& pi)> jac_pi;

    // Custom theta-solver (used by the binary-response iterative bootstrap);
    // when empty, the generic Newton path on psi(g(theta,u), pi_hat) is used.
    std::function<SolveResult(const Vec& pi_hat, const Mat& u,
                              const SolverConfig& cfg, const Vec& start)>
        solve_theta;

    // Psi_n(theta, u, pi) = psi(g(theta, u), pi).
    Vec psi_theta(const Vec& theta, const Mat& u, const Vec& pi) const {
        return psi(generate(theta, u), pi);
    }
};

// Default pivotal batch: n x d independent U(0,1).
inline Mat uniform_pivot(int n, int d, uint64_t seed, uint64_t stream) {
    Mat u(n, d);
    uint64_t ctr = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            u(i, j) = rng_uniform(seed, stream, ctr++);
    return u;
}

// One standard normal per row from two uniform columns (Box-Muller, cosine
// branch).
inline Vec box_muller_column(const Mat& u) {
    Vec z(u.rows());
    for (int i = 0; i < u.rows(); ++i)
        z[i] = std::sqrt(-2.0 * std::log(u(i, 0)))
               * std::cos(2.0 * M_PI * u(i, 1));
    return z;
}

// Stream-id conventions for the coverage harness: trial t with S draws uses
// pivotal streams t*(S+1) + s, s = 0 (data), 1..S (posterior draws).  Design
// matrices, priors and oracle draws live in disjoint high ranges.
constexpr uint64_t STREAM_DESIGN = 1ULL << 62;
constexpr uint64_t STREAM_PRIOR  = 1ULL << 61;
constexpr uint64_t STREAM_ORACLE = 3ULL << 61;
constexpr uint64_t STREAM_ABC    = 5ULL << 59;

} // namespace swizs
