#pragma once
// Estimators built on the model abstraction:
//  - fit_auxiliary:        pi_hat = argzero_pi psi(x, pi)
//  - swizs_posterior:      theta(s) = argzero_theta psi(g(theta, u_s), pi_hat)
//  - iie_posterior:        theta(s) = argmin_theta || pi_II(theta; u_s) - pi_hat ||^2
//  - bootstrap_distribution: theta(s) = argzero_pi psi(g(pi_hat, u_s), pi)
//  - emm_estimate:         argzero_theta (1/H) sum_h psi(g(theta, u_h), pi_hat)
//  - abc_rejection:        accept theta* ~ prior if |pi_II(theta*) - pi_hat| <= eps
//
// All methods consume the *same* pivotal streams per draw index, which is
// what makes the exact row-wise equivalences between SwiZs, IIE and the
// parametric bootstrap testable.

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "swizs/model.hpp"
#include "swizs/solver.hpp"

namespace swizs {

// Deterministic parallel map: results land in preallocated slots, so output
// is independent of the number of threads.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1))
                fn(i);
        });
    for (auto& th : pool) th.join();
}

struct PosteriorDraws {
    Mat theta;                    // S x p, failed rows hold last iterates
    std::vector<bool> converged;  // per row
    Vec residual;                 // per row, inf-norm of the final system
    Vec pi_hat;                   // auxiliary estimate the draws condition on

    int failed() const {
        int f = 0;
        for (bool c : converged)
            if (!c) ++f;
        return f;
    }
    double failed_fraction() const {
        return converged.empty()
                   ? 0.0
                   : static_cast<double>(failed()) / converged.size();
    }
    // Converged values of one coordinate (failed rows excluded).
    std::vector<double> column(int j) const {
        std::vector<double> v;
        v.reserve(converged.size());
        for (size_t s = 0; s < converged.size(); ++s)
            if (converged[s]) v.push_back(theta(static_cast<int>(s), j));
        return v;
    }
};

// ---- auxiliary fit -------------------------------------------------------

inline SolveResult fit_auxiliary(const Model& m, const Mat& x,
                                 const SolverConfig& cfg = {}) {
    if (m.aux_fit) return m.aux_fit(x, cfg);
    if (m.aux_closed) {
        SolveResult r;
        r.x = m.aux_closed(x);
        r.residual = m.psi(x, r.x).lpNorm<Eigen::Infinity>();
        r.converged = r.residual <= std::max(cfg.abs_tol, 1e-8);
        return r;
    }
    VecFn f = [&](const Vec& pi) { return m.psi(x, pi); };
    JacFn jac = nullptr;
    if (m.jac_pi) jac = [&](const Vec& pi) { return m.jac_pi(x, pi); };
    if (m.aux_starts) {
        SolveResult best;
        for (const Vec& start : m.aux_starts(x)) {
            SolveResult r =
                solve_root_masked(f, start, m.pi_positive, cfg, jac);
            if (r.converged) return r;
            if (r.residual < best.residual) best = r;
        }
        return best;
    }
    Vec start = m.aux_start ? m.aux_start(x) : Vec(Vec::Ones(m.dim_pi));
    SolveResult r = solve_root_masked(f, start, m.pi_positive, cfg, jac);
    if (r.converged) return r;
    // Deterministic multi-start ladder for rough heuristics.
    for (double fac : {0.5, 2.0, 0.25, 4.0, 8.0}) {
        SolveResult r2 =
            solve_root_masked(f, Vec(start * fac), m.pi_positive, cfg, jac);
        if (r2.converged) return r2;
        if (r2.residual < r.residual) r = r2;
    }
    return r;
}

// ---- single switched draw ------------------------------------------------

inline SolveResult swizs_draw(const Model& m, const Vec& pi_hat, const Mat& u,
                              const SolverConfig& cfg = {},
                              const Vec& start_override = Vec()) {
    const Vec start = start_override.size() == m.p ? start_override : pi_hat;
    if (m.solve_theta) return m.solve_theta(pi_hat, u, cfg, start);
    VecFn f = [&](const Vec& th) { return m.psi_theta(th, u, pi_hat); };
    JacFn jac = nullptr;
    if (m.jac_theta)
        jac = [&](const Vec& th) { return m.jac_theta(th, u, pi_hat); };
    SolveResult r = solve_root_masked(f, start, m.theta_positive, cfg, jac);
    if (r.converged) return r;
    for (double fac : {0.5, 2.0, 0.2}) {
        SolveResult r2 =
            solve_root_masked(f, Vec(start * fac), m.theta_positive, cfg, jac);
        if (r2.converged) return r2;
        if (r2.residual < r.residual) r = r2;
    }
    return r;
}

inline PosteriorDraws swizs_posterior(const Model& m, const Vec& pi_hat,
                                      uint64_t seed, uint64_t stream_base,
                                      int S, const SolverConfig& cfg = {},
                                      const Vec& start_override = Vec(),
                                      int threads = 1) {
    PosteriorDraws out;
    out.theta.resize(S, m.p);
    out.converged.assign(S, false);
    out.residual.resize(S);
    out.pi_hat = pi_hat;
    parallel_for(S, threads, [&](int s) {
        Mat u = m.pivot(seed, stream_base + 1 + s);
        SolveResult r = swizs_draw(m, pi_hat, u, cfg, start_override);
        out.theta.row(s) = r.x.transpose();
        out.converged[s] = r.converged;
        out.residual[s] = r.residual;
    });
    return out;
}

// ---- indirect inference ----------------------------------------------------

// Auxiliary estimate on data simulated at theta with batch u.
inline SolveResult iie_binding(const Model& m, const Vec& theta, const Mat& u,
                               const SolverConfig& cfg = {}) {
    return fit_auxiliary(m, m.generate(theta, u), cfg);
}

inline SolveResult iie_draw(const Model& m, const Vec& pi_hat, const Mat& u,
                            const SolverConfig& cfg = {},
                            const Vec& start_override = Vec()) {
    const Vec start = start_override.size() == m.p ? start_override : pi_hat;
    // Squared-Euclidean distance minimized by Gauss-Newton on the residual.
    VecFn f = [&](const Vec& th) -> Vec {
        SolveResult inner = iie_binding(m, th, u, cfg);
        if (!inner.converged)
            return Vec(Vec::Constant(m.dim_pi,
                                     std::numeric_limits<double>::quiet_NaN()));
        return Vec(inner.x - pi_hat);
    };
    SolveResult r =
        minimize_least_squares_masked(f, start, m.theta_positive, cfg);
    if (r.converged) return r;
    for (double fac : {0.5, 2.0}) {
        SolveResult r2 = minimize_least_squares_masked(
            f, Vec(start * fac), m.theta_positive, cfg);
        if (r2.converged) return r2;
        if (r2.residual < r.residual) r = r2;
    }
    return r;
}

inline PosteriorDraws iie_posterior(const Model& m, const Vec& pi_hat,
                                    uint64_t seed, uint64_t stream_base,
                                    int S, const SolverConfig& cfg = {},
                                    const Vec& start_override = Vec(),
                                    int threads = 1) {
    PosteriorDraws out;
    out.theta.resize(S, m.p);
    out.converged.assign(S, false);
    out.residual.resize(S);
    out.pi_hat = pi_hat;
    parallel_for(S, threads, [&](int s) {
        Mat u = m.pivot(seed, stream_base + 1 + s);
        SolveResult r = iie_draw(m, pi_hat, u, cfg, start_override);
        out.theta.row(s) = r.x.transpose();
        out.converged[s] = r.converged;
        out.residual[s] = r.residual;
    });
    return out;
}

// ---- parametric bootstrap --------------------------------------------------

// Requires dim(pi) == dim(theta) and pi_hat inside the parameter space:
// simulate at theta = pi_hat and re-fit the auxiliary estimator.
inline PosteriorDraws bootstrap_distribution(const Model& m, const Vec& pi_hat,
                                             uint64_t seed,
                                             uint64_t stream_base, int S,
                                             const SolverConfig& cfg = {},
                                             int threads = 1) {
    PosteriorDraws out;
    out.theta.resize(S, m.p);
    out.converged.assign(S, false);
    out.residual.resize(S);
    out.pi_hat = pi_hat;
    parallel_for(S, threads, [&](int s) {
        Mat u = m.pivot(seed, stream_base + 1 + s);
        Mat xs = m.generate(pi_hat, u);
        SolveResult r = fit_auxiliary(m, xs, cfg);
        out.theta.row(s) = r.x.transpose();
        out.converged[s] = r.converged;
        out.residual[s] = r.residual;
    });
    return out;
}

// ---- efficient method of moments -------------------------------------------

inline SolveResult emm_estimate(const Model& m, const Vec& pi_hat,
                                const std::vector<Mat>& batches,
                                const SolverConfig& cfg = {},
                                const Vec& start_override = Vec()) {
    const Vec start = start_override.size() == m.p ? start_override : pi_hat;
    VecFn f = [&](const Vec& th) {
        Vec acc = Vec::Zero(m.dim_pi);
        for (const Mat& u : batches) acc += m.psi_theta(th, u, pi_hat);
        return Vec(acc / static_cast<double>(batches.size()));
    };
    JacFn jac = nullptr;
    if (m.jac_theta)
        jac = [&](const Vec& th) {
            Mat acc = Mat::Zero(m.dim_pi, m.p);
            for (const Mat& u : batches) acc += m.jac_theta(th, u, pi_hat);
            return Mat(acc / static_cast<double>(batches.size()));
        };
    return solve_root_masked(f, start, m.theta_positive, cfg, jac);
}

// ---- rejection ABC ----------------------------------------------------------

struct AbcResult {
    Mat theta;              // accepted draws (rows)
    double accept_rate = 0.0;
    int proposals = 0;
};

// Uniform-box prior centered at pi_hat with half-width 5|pi_hat| per
// coordinate (positive coordinates truncated just above zero).
inline Vec abc_default_prior_draw(const Model& m, const Vec& pi_hat,
                                  uint64_t seed, uint64_t index) {
    CounterRng r(seed, STREAM_PRIOR + index);
    Vec th(m.p);
    for (int j = 0; j < m.p; ++j) {
        const double c = pi_hat[j];
        const double half = 5.0 * std::max(std::fabs(c), 1e-3);
        double lo = c - half, hi = c + half;
        if (j < static_cast<int>(m.theta_positive.size())
            && m.theta_positive[j])
            lo = std::max(lo, 1e-8);
        th[j] = r.uniform(lo, hi);
    }
    return th;
}

inline AbcResult abc_rejection(const Model& m, const Vec& pi_hat,
                               uint64_t seed, uint64_t stream_base,
                               int S_accept, double eps,
                               const SolverConfig& cfg = {},
                               int max_proposals = 2000000) {
    AbcResult out;
    std::vector<Vec> kept;
    // A single fresh pivotal batch per proposal, drawn from the trial's
    // dedicated proposal range.
    for (int k = 0; k < max_proposals
                    && static_cast<int>(kept.size()) < S_accept; ++k) {
        ++out.proposals;
        Vec th = abc_default_prior_draw(m, pi_hat, seed, stream_base + k);
        Mat u = m.pivot(seed, STREAM_ABC + stream_base + k);
        SolveResult inner = iie_binding(m, th, u, cfg);
        if (!inner.converged) continue;
        if ((inner.x - pi_hat).norm() <= eps) kept.push_back(th);
    }
    out.theta.resize(static_cast<int>(kept.size()), m.p);
    for (size_t i = 0; i < kept.size(); ++i)
        out.theta.row(static_cast<int>(i)) = kept[i].transpose();
    out.accept_rate = out.proposals > 0
                          ? static_cast<double>(kept.size()) / out.proposals
                          : 0.0;
    return out;
}

} // namespace swizs
