#pragma once
// Root finding and least-squares machinery shared by every estimator:
//  - central finite-difference Jacobians,
//  - damped Newton with backtracking line search,
//  - Broyden rank-one updates when the Jacobian comes from finite differences
//    and the system has three or more unknowns,
//  - Gauss-Newton (Levenberg-damped) minimization of ||f||^2,
//  - log-space handling of positivity-constrained coordinates.
//
// Evaluations that return non-finite values are treated as domain violations
// and handled by the line search (the step is shortened until the iterate is
// back inside the domain).

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace swizs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using VecFn = std::function<Vec(const Vec&)>;
using JacFn = std::function<Mat(const Vec&)>;

struct SolverConfig {
    double abs_tol = 1e-10;   // ||f||_inf at which a root is declared
    double step_tol = 1e-12;  // step norm below which iteration stalls
    int max_iter = 200;
    int max_backtrack = 30;
};

struct SolveResult {
    Vec x;
    bool converged = false;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

inline bool all_finite(const Vec& v) {
    for (int i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i])) return false;
    return true;
}

// Central finite-difference Jacobian, h_j = max(1e-6, 1e-6 |x_j|).
inline Mat finite_diff_jacobian(const VecFn& f, const Vec& x) {
    const int p = static_cast<int>(x.size());
    Vec xp = x, xm = x;
    Mat J;
    for (int j = 0; j < p; ++j) {
        const double h = std::max(1e-6, 1e-6 * std::fabs(x[j]));
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        Vec fp = f(xp), fm = f(xm);
        if (J.size() == 0) J.resize(fp.size(), p);
        J.col(j) = (fp - fm) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return J;
}

namespace detail {

// Solve J d = -fx robustly: LU when well conditioned, otherwise a damped
// normal-equations fallback.
inline Vec newton_step(const Mat& J, const Vec& fx) {
    Eigen::FullPivLU<Mat> lu(J);
    lu.setThreshold(1e-12);
    if (J.rows() == J.cols() && lu.isInvertible())
        return lu.solve(-fx);
    const double lambda = 1e-8 * (J.norm() + 1.0);
    Mat A = J.transpose() * J
          + lambda * Mat::Identity(J.cols(), J.cols());
    return A.ldlt().solve(-J.transpose() * fx);
}

} // namespace detail

// Newton / Broyden root solver with backtracking.  If `jac` is empty the
// Jacobian is built by central finite differences; in that case, for systems
// with p >= 3 unknowns, Broyden rank-one updates replace most FD rebuilds.
inline SolveResult solve_root(const VecFn& f, const Vec& x0,
                              const SolverConfig& cfg = {},
                              const JacFn& jac = nullptr) {
    SolveResult res;
    res.x = x0;
    Vec fx = f(res.x);
    if (!all_finite(fx)) return res;
    res.residual = fx.lpNorm<Eigen::Infinity>();
    if (res.residual <= cfg.abs_tol) { res.converged = true; return res; }

    const int p = static_cast<int>(x0.size());
    const bool use_broyden = (!jac) && p >= 3;
    Mat B;
    bool b_fresh = false;

    for (int it = 0; it < cfg.max_iter; ++it) {
        res.iterations = it + 1;
        if (jac) {
            B = jac(res.x);
            if (!B.allFinite()) return res;
        } else if (B.size() == 0) {
            B = finite_diff_jacobian(f, res.x);
            if (!B.allFinite()) return res;
            b_fresh = true;
        }

        Vec d = detail::newton_step(B, fx);
        if (!all_finite(d)) return res;

        double t = 1.0;
        const double fn0 = fx.norm();
        Vec x_new, f_new;
        bool accepted = false;
        for (int bt = 0; bt <= cfg.max_backtrack; ++bt) {
            x_new = res.x + t * d;
            f_new = f(x_new);
            if (all_finite(f_new) && f_new.norm() < fn0) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            if (use_broyden && !b_fresh) {
                // Stale secant model: rebuild from finite differences once.
                B = finite_diff_jacobian(f, res.x);
                if (!B.allFinite()) return res;
                b_fresh = true;
                continue;
            }
            return res;  // genuine line-search failure
        }

        const Vec s = x_new - res.x;
        const Vec df = f_new - fx;
        res.x = x_new;
        fx = f_new;
        res.residual = fx.lpNorm<Eigen::Infinity>();
        if (res.residual <= cfg.abs_tol) { res.converged = true; return res; }
        if (s.norm() <= cfg.step_tol) return res;

        if (use_broyden) {
            const double ss = s.squaredNorm();
            if (ss > 0.0) B += ((df - B * s) / ss) * s.transpose();
            b_fresh = false;
        } else if (!jac) {
            B.resize(0, 0);  // p < 3: rebuild FD each iteration
        }
    }
    return res;
}

// Gauss-Newton minimization of ||f(x)||^2 with Levenberg damping.  Declares a
// root (converged) when ||f||_inf <= abs_tol; otherwise reports the best
// iterate with converged = false.
inline SolveResult minimize_least_squares(const VecFn& f, const Vec& x0,
                                          const SolverConfig& cfg = {}) {
    SolveResult res;
    res.x = x0;
    Vec fx = f(res.x);
    if (!all_finite(fx)) return res;
    res.residual = fx.lpNorm<Eigen::Infinity>();
    if (res.residual <= cfg.abs_tol) { res.converged = true; return res; }

    double lambda = 1e-6;
    for (int it = 0; it < cfg.max_iter; ++it) {
        res.iterations = it + 1;
        Mat J = finite_diff_jacobian(f, res.x);
        if (!J.allFinite()) return res;
        const Vec g = J.transpose() * fx;
        bool accepted = false;
        Vec x_new, f_new;
        for (int bt = 0; bt <= cfg.max_backtrack; ++bt) {
            Mat A = J.transpose() * J
                  + lambda * Mat::Identity(J.cols(), J.cols());
            Vec d = A.ldlt().solve(-g);
            x_new = res.x + d;
            f_new = f(x_new);
            if (all_finite(f_new) && f_new.squaredNorm() < fx.squaredNorm()) {
                accepted = true;
                lambda = std::max(lambda * 0.25, 1e-12);
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) return res;
        const double step = (x_new - res.x).norm();
        res.x = x_new;
        fx = f_new;
        res.residual = fx.lpNorm<Eigen::Infinity>();
        if (res.residual <= cfg.abs_tol) { res.converged = true; return res; }
        if (step <= cfg.step_tol || g.lpNorm<Eigen::Infinity>() < 1e-14)
            return res;
    }
    return res;
}

// ---- Positivity handling: solve in log-space for masked coordinates ----

inline Vec to_internal(const Vec& x, const std::vector<bool>& positive) {
    Vec z = x;
    for (int i = 0; i < x.size(); ++i)
        if (i < static_cast<int>(positive.size()) && positive[i])
            z[i] = std::log(x[i]);
    return z;
}

inline Vec from_internal(const Vec& z, const std::vector<bool>& positive) {
    Vec x = z;
    for (int i = 0; i < z.size(); ++i)
        if (i < static_cast<int>(positive.size()) && positive[i])
            x[i] = std::exp(z[i]);
    return x;
}

// Root solve with selected coordinates constrained positive via the log
// transform.  `jac`, when given, is the Jacobian in the *original*
// coordinates; the chain rule supplies the log-space version.
inline SolveResult solve_root_masked(const VecFn& f, const Vec& x0,
                                     const std::vector<bool>& positive,
                                     const SolverConfig& cfg = {},
                                     const JacFn& jac = nullptr) {
    bool any = false;
    for (bool b : positive) any = any || b;
    if (!any) return solve_root(f, x0, cfg, jac);

    VecFn f_int = [&](const Vec& z) { return f(from_internal(z, positive)); };
    JacFn jac_int = nullptr;
    if (jac) {
        jac_int = [&](const Vec& z) {
            Vec x = from_internal(z, positive);
            Mat J = jac(x);
            for (int j = 0; j < J.cols(); ++j)
                if (j < static_cast<int>(positive.size()) && positive[j])
                    J.col(j) *= x[j];
            return J;
        };
    }
    SolveResult r = solve_root(f_int, to_internal(x0, positive), cfg, jac_int);
    r.x = from_internal(r.x, positive);
    return r;
}

inline SolveResult minimize_least_squares_masked(
        const VecFn& f, const Vec& x0, const std::vector<bool>& positive,
        const SolverConfig& cfg = {}) {
    bool any = false;
    for (bool b : positive) any = any || b;
    if (!any) return minimize_least_squares(f, x0, cfg);
    VecFn f_int = [&](const Vec& z) { return f(from_internal(z, positive)); };
    SolveResult r =
        minimize_least_squares(f_int, to_internal(x0, positive), cfg);
    r.x = from_internal(r.x, positive);
    return r;
}

} // namespace swizs
