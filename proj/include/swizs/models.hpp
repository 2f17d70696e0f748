#pragma once
// Model registry.  Ids:
//   cauchy_loc, unif_max, expo_rate, gamma_rate, norm_loc, norm_meanvar,
//   linreg, ridge, lognorm, gbm, student_t, lomax, lomax_robust, lmm_ris,
//   mg1, logistic
//
// Each factory wires the generator, the averaged estimating function, a
// closed-form auxiliary when available, and analytic Jacobians where they pay
// off (t-score, Lomax, LMM, M/G/1).  All analytic derivatives are validated
// against central finite differences in the test suite.

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "swizs/dist.hpp"
#include "swizs/model.hpp"
#include "swizs/special.hpp"

namespace swizs {

struct ModelOptions {
    double gamma_shape = 2.0;   // known shape of gamma_rate
    int p_reg = 3;              // regression columns (linreg/ridge)
    int p_logistic = 20;        // regression columns (logistic)
    double ridge_lambda = 1.0;
    int m = 5;                  // replicates per individual (lmm_ris)
    double wmle_k = 4.685;      // Tukey biweight constant (lomax_robust)
    bool logistic_smooth = false;
    double smooth_t = 0.05;     // sigmoid temperature when smoothing
    uint64_t design_seed = 0;   // seed for fixed designs (X, x_i, Delta)
    uint64_t design_stream = STREAM_DESIGN;
};

namespace detail_models {

inline Vec col0(const Mat& x) { return x.col(0); }

inline double sum_sq_centered(const Vec& v) {
    const double m = v.mean();
    return (v.array() - m).square().sum();
}

// Fixed standard-normal design matrix from the design stream.
inline Mat normal_design(int n, int p, uint64_t seed, uint64_t stream) {
    CounterRng r(seed, stream);
    Mat X(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j)
            X(i, j) = r.normal();
    return X;
}

} // namespace detail_models

// ---------------------------------------------------------------- location
// norm_loc: x = theta + z, z ~ N(0,1); auxiliary = sample mean.
inline Model make_norm_loc(int n) {
    Model m;
    m.id = "norm_loc";
    m.p = 1; m.dim_pi = 1; m.n = n; m.d = 2;
    m.theta_positive = {false};
    m.pi_positive = {false};
    m.pivot = [n](uint64_t seed, uint64_t stream) {
        return uniform_pivot(n, 2, seed, stream);
    };
    m.generate = [](const Vec& th, const Mat& u) {
        return Mat((box_muller_column(u).array() + th[0]).matrix());
    };
    m.psi = [](const Mat& x, const Vec& pi) {
        Vec y(1);
        y[0] = x.col(0).mean() - pi[0];
        return y;
    };
    m.aux_closed = [](const Mat& x) {
        Vec pi(1);
        pi[0] = x.col(0).mean();
        return pi;
    };
    m.jac_theta = [](const Vec&, const Mat&, const Vec&) {
        return Mat::Identity(1, 1);
    };
    return m;
}

// cauchy_loc: x = theta + c, c ~ Cauchy(0,1); auxiliary = sample mean.
inline Model make_cauchy_loc(int n) {
    Model m;
    m.id = "cauchy_loc";
    m.p = 1; m.dim_pi = 1; m.n = n; m.d = 1;
    m.theta_positive = {false};
    m.pi_positive = {false};
    m.pivot = [n](uint64_t seed, uint64_t stream) {
        return uniform_pivot(n, 1, seed, stream);
    };
    m.generate = [](const Vec& th, const Mat& u) {
        Mat x(u.rows(), 1);
        for (int i = 0; i < u.rows(); ++i)
            x(i, 0) = th[0] + std::tan(M_PI * (u(i, 0) - 0.5));
        return x;
    };
    m.psi = [](const Mat& x, const Vec& pi) {
        Vec y(1);
        y[0] = x.col(0).mean() - pi[0];
        return y;
    };
    m.aux_closed = [](const Mat& x) {
        Vec pi(1);
        pi[0] = x.col(0).mean();
        return pi;
    };
    m.jac_theta = [](const Vec&, const Mat&, const Vec&) {
        return Mat::Identity(1, 1);
    };
    return m;
}

// ---------------------------------------------------------------- unif_max
// x = theta * u, u ~ U(0,1); auxiliary = sample maximum.
inline Model make_unif_max(int n) {
    Model m;
    m.id = "unif_max";
    m.p = 1; m.dim_pi = 1; m.n = n; m.d = 1;
    m.theta_positive = {true};
    m.pi_positive = {true};
    m.pivot = [n](uint64_t seed, uint64_t stream) {
        return uniform_pivot(n, 1, seed, stream);
    };
    m.generate = [](const Vec& th, const Mat& u) {
        return Mat(th[0] * u.col(0));
    };
    m.psi = [](const Mat& x, const Vec& pi) {
        Vec y(1);
        y[0] = x.col(0).maxCoeff() - pi[0];
        return y;
    };
    m.aux_closed = [](const Mat& x) {
        Vec pi(1);
        pi[0] = x.col(0).maxCoeff();
        return pi;
    };
    m.jac_theta = [](const Vec&, const Mat& u, const Vec&) {
        Mat J(1, 1);
        J(0, 0) = u.col(0).maxCoeff();
        return J;
    };
    return m;
}

// ---------------------------------------------------------------- expo_rate
// x = e/theta, e ~ Exp(1); auxiliary = 1 / sample mean.
inline Model make_expo_rate(int n) {
    Model m;
    m.id = "expo_rate";
    m.p = 1; m.dim_pi = 1; m.n = n; m.d = 1;
    m.theta_positive = {true};
    m.pi_positive = {true};
    m.pivot = [n](uint64_t seed, uint64_t stream) {
        Mat u = uniform_pivot(n, 1, seed, stream);
        return Mat((-u.array().log()).matrix());  // Exp(1) pivots
    };
    m.generate = [](const Vec& th, const Mat& u) {
        return Mat(u.col(0) / th[0]);
    };
    m.psi = [](const Mat& x, const Vec& pi) {
        Vec y(1);
        y[0] = 1.0 / pi[0] - x.col(0).mean();
        return y;
    };
    m.aux_closed = [](const Mat& x) {
        Vec pi(1);
        pi[0] = 1.0 / x.col(0).mean();
        return pi;
    };
    m.jac_theta = [](const Vec& th, const Mat& u, const Vec&) {
        Mat J(1, 1);
        J(0, 0) = u.col(0).mean() / (th[0] * th[0]);
        return J;
    };
    return m;
}

// ---------------------------------------------------------------- gamma_rate
// x = G/theta, G ~ Gamma(shape, 1), shape known; auxiliary = shape / mean.
inline Model make_gamma_rate(int n, double shape) {
    Model m;
    m.id = "gamma_rate";
    m.p = 1; m.dim_pi = 1; m.n = n; m.d = 1;
    m.theta_positive = {true};
    m.pi_positive = {true};
    m.pivot = [n, shape](uint64_t seed, uint64_t stream) {
        Mat u = uniform_pivot(n, 1, seed, stream);
        for (int i = 0; i < n; ++i) u(i, 0) = gamma_pivot(shape, u(i, 0));
        return u;
    };
    m.generate = [](const Vec& th, const Mat& u) {
        return Mat(u.col(0) / th[0]);
    };
    m.psi = [shape](const Mat& x, const Vec& pi) {
        Vec y(1);
        y[0] = shape / pi[0] - x.col(0).mean();
        return y;
    };
    m.aux_closed = [shape](const Mat& x) {
        Vec pi(1);
        pi[0] = shape / x.col(0).mean();
        return pi;
    };
    m.jac_theta = [](const Vec& th, const Mat& u, const Vec&) {
        Mat J(1, 1);
        J(0, 0) = u.col(0).mean() / (th[0] * th[0]);
        return J;
    };
    return m;
}

// ------------------------------------------------------------ norm_meanvar
// x = mu + sigma z; auxiliary = (mean, centered sum of squares).
inline Model make_norm_meanvar(int n) {
    Model m;
    m.id = "norm_meanvar";
    m.p = 2; m.dim_pi = 2; m.n = n; m.d = 2;
    m.theta_positive = {false, true};   // (mu, sigma^2)
    m.pi_positive = {false, true};
    m.pivot = [n](uint64_t seed, uint64_t stream) {
        return uniform_pivot(n, 2, seed, stream);
    };
    m.generate = [](const Vec& th, const Mat& u) {
        Vec z = box_muller_column(u);
        return Mat((th[0] + std::sqrt(th[1]) * z.array()).matrix());
    };
    m.psi = [](const Mat& x, const Vec& pi) {
        Vec y(2);
        y[0] = x.col(0).mean() - pi[0];
        y[1] = detail_models::sum_sq_centered(x.col(0)) - pi[1];
        return y;
    };
    m.aux_closed = [](const Mat& x) {
        Vec pi(2);
        pi[0] = x.col(0).mean();
        pi[1] = detail_models::sum_sq_centered(x.col(0));
        return pi;
    };
    m.jac_theta = [](const Vec& th, const Mat& u, const Vec&) {
        Vec z = box_muller_column(u);
        const double sigma = std::sqrt(th[1]);
        Mat J(2, 2);
        J(0, 0) = 1.0;
        J(0, 1) = z.mean() / (2.0 * sigma);
        J(1, 0) = 0.0;
        J(1, 1) = detail_models::sum_sq_centered(z);
        return J;
    };
    return m;
}

// ---------------------------------------------------------------- lognorm
// x = exp(mu + sigma z); same auxiliary as norm_meanvar applied to log x.
inline Model make_lognorm(int n) {
    Model m = make_norm_meanvar(n);
    m.id = "lognorm";
    m.generate = [](const Vec& th, const Mat& u) {
        Vec z = box_muller_column(u);
        return Mat((th[0] + std::sqrt(th[1]) * z.array()).exp().matrix());
    };
    m.psi = [](const Mat& x, const Vec& pi) {
        Vec l = x.col(0).array().log();
        Vec y(2);
        y[0] = l.mean() - pi[0];
        y[1] = detail_models::sum_sq_centered(l) - pi[1];
        return y;
    };
    m.aux_closed = [](const Mat& x) {
        Vec l = x.col(0).array().log();
        Vec pi(2);
        pi[0] = l.mean();
        pi[1] = detail_models::sum_sq_centered(l);
        return pi;
    };
    // jac_theta inherited from norm_meanvar is valid: psi(g) only sees
    // log g = mu + sigma z.
    return m;
}

// ---------------------------------------------------------------- linreg
// y = X beta + sigma z; auxiliary = (OLS coefficients, residual sum of
// squares y'Py).  theta = (beta, sigma^2).
inline Model make_linreg(int n, const ModelOptions& opt) {
    const int q = opt.p_reg;
    auto X = std::make_shared<Mat>(
        detail_models::normal_design(n, q, opt.design_seed, opt.design_stream));
    X->col(0).setOnes();  // intercept
    auto XtX = std::make_shared<Mat>(X->transpose() * (*X));
    auto XtXinv = std::make_shared<Mat>(XtX->inverse());
    auto P = std::make_shared<Mat>(
        Mat::Identity(n, n) - (*X) * (*XtXinv) * X->transpose());

    Model m;
    m.id = "linreg";
    m.p = q + 1; m.dim_pi = q + 1; m.n = n; m.d = 2;
    m.theta_positive.assign(q + 1, false);
    m.theta_positive[q] = true;
    m.pi_positive = m.theta_positive;
    m.pivot = [n](uint64_t seed, uint64_t stream) {
        return uniform_pivot(n, 2, seed, stream);
    };
    m.generate = [X, q](const Vec& th, const Mat& u) {
        Vec z = box_muller_column(u);
        return Mat((*X) * th.head(q) + std::sqrt(th[q]) * z);
    };
    m.psi = [X, XtX, P, q, n](const Mat& x, const Vec& pi) {
        Vec y(q + 1);
        y.head(q) = (X->transpose() * x.col(0) - (*XtX) * pi.head(q)) / n;
        y[q] = x.col(0).dot((*P) * x.col(0)) - pi[q];
        return y;
    };
    m.aux_closed = [X, XtXinv, P, q](const Mat& x) {
        Vec pi(q + 1);
        pi.head(q) = (*XtXinv) * (X->transpose() * x.col(0));
        pi[q] = x.col(0).dot((*P) * x.col(0));
        return pi;
    };
    m.jac_theta = [X, XtX, P, q, n](const Vec& th, const Mat& u, const Vec&) {
        Vec z = box_muller_column(u);
        const double sigma = std::sqrt(th[q]);
        Mat J = Mat::Zero(q + 1, q + 1);
        J.topLeftCorner(q, q) = (*XtX) / n;
        J.block(0, q, q, 1) = (X->transpose() * z) / (2.0 * sigma * n);
        J(q, q) = z.dot((*P) * z);
        return J;
    };
    return m;
}

// ---------------------------------------------------------------- ridge
// Same generator as linreg; auxiliary = ridge coefficients and
// y' P_l P_l y with P_l = I - X (X'X + l I)^-1 X'.
inline Model make_ridge(int n, const ModelOptions& opt) {
    const int q = opt.p_reg;
    const double lam = opt.ridge_lambda;
    auto X = std::make_shared<Mat>(
        detail_models::normal_design(n, q, opt.design_seed, opt.design_stream));
    X->col(0).setOnes();
    auto XtX = std::make_shared<Mat>(X->transpose() * (*X));
    auto Rinv = std::make_shared<Mat>(
        (*XtX + lam * Mat::Identity(q, q)).inverse());
    auto Pl = std::make_shared<Mat>(
        Mat::Identity(n, n) - (*X) * (*Rinv) * X->transpose());
    auto A = std::make_shared<Mat>((*Pl) * (*Pl));

    Model m;
    m.id = "ridge";
    m.p = q + 1; m.dim_pi = q + 1; m.n = n; m.d = 2;
    m.theta_positive.assign(q + 1, false);
    m.theta_positive[q] = true;
    m.pi_positive = m.theta_positive;
    m.pivot = [n](uint64_t seed, uint64_t stream) {
        return uniform_pivot(n, 2, seed, stream);
    };
    m.generate = [X, q](const Vec& th, const Mat& u) {
        Vec z = box_muller_column(u);
        return Mat((*X) * th.head(q) + std::sqrt(th[q]) * z);
    };
    m.psi = [X, XtX, A, q, n, lam](const Mat& x, const Vec& pi) {
        Vec y(q + 1);
        y.head(q) = (X->transpose() * x.col(0)
                     - (*XtX + lam * Mat::Identity(q, q)) * pi.head(q)) / n;
        y[q] = x.col(0).dot((*A) * x.col(0)) - pi[q];
        return y;
    };
    m.aux_closed = [X, Rinv, A, q](const Mat& x) {
        Vec pi(q + 1);
        pi.head(q) = (*Rinv) * (X->transpose() * x.col(0));
        pi[q] = x.col(0).dot((*A) * x.col(0));
        return pi;
    };
    m.jac_theta = [X, XtX, A, q, n, lam](const Vec& th, const Mat& u,
                                         const Vec&) {
        Vec z = box_muller_column(u);
        const double sigma = std::sqrt(th[q]);
        Vec x = (*X) * th.head(q) + sigma * z;
        Mat J = Mat::Zero(q + 1, q + 1);
        J.topLeftCorner(q, q) = (*XtX) / n;
        J.block(0, q, q, 1) = (X->transpose() * z) / (2.0 * sigma * n);
        Vec Ax = (*A) * x;
        J.row(q).head(q) = 2.0 * (X->transpose() * Ax).transpose();
        J(q, q) = z.dot(Ax) / sigma;
        return J;
    };
    return m;
}

// ---------------------------------------------------------------- gbm
// Log-increments of geometric Brownian motion on an irregular grid:
// x_i = (mu - sigma^2/2) D_i + sigma sqrt(D_i) z_i, D_i from the design
// stream.  n = number of increments.  Auxiliary = (sum x, x' diag(D)^-1 x).
inline Model make_gbm(int n, const ModelOptions& opt) {
    auto delta = std::make_shared<Vec>(n);
    {
        CounterRng r(opt.design_seed, opt.design_stream + 1);
        for (int i = 0; i < n; ++i) (*delta)[i] = 0.5 + r.uniform();
    }
    Model m;
    m.id = "gbm";
    m.p = 2; m.dim_pi = 2; m.n = n; m.d = 2;
    m.theta_positive = {false, true};   // (mu, sigma^2)
    m.pi_positive = {false, true};
    m.pivot = [n](uint64_t seed, uint64_t stream) {
        return uniform_pivot(n, 2, seed, stream);
    };
    m.generate = [delta](const Vec& th, const Mat& u) {
        Vec z = box_muller_column(u);
        const double sigma = std::sqrt(th[1]);
        return Mat((((th[0] - th[1] / 2.0) * delta->array())
                    + sigma * delta->array().sqrt() * z.array()).matrix());
    };
    m.psi = [delta](const Mat& x, const Vec& pi) {
        Vec y(2);
        y[0] = x.col(0).sum() - pi[0];
        y[1] = (x.col(0).array().square() / delta->array()).sum() - pi[1];
        return y;
    };
    m.aux_closed = [delta](const Mat& x) {
        Vec pi(2);
        pi[0] = x.col(0).sum();
        pi[1] = (x.col(0).array().square() / delta->array()).sum();
        return pi;
    };
    m.jac_theta = [delta](const Vec& th, const Mat& u, const Vec&) {
        Vec z = box_muller_column(u);
        const double sigma = std::sqrt(th[1]);
        Vec x = (((th[0] - th[1] / 2.0) * delta->array())
                 + sigma * delta->array().sqrt() * z.array()).matrix();
        Vec dx_mu = *delta;
        Vec dx_s2 = (-delta->array() / 2.0
                     + delta->array().sqrt() * z.array() / (2.0 * sigma))
                        .matrix();
        Mat J(2, 2);
        J(0, 0) = dx_mu.sum();
        J(0, 1) = dx_s2.sum();
        J(1, 0) = 2.0 * (x.array() * dx_mu.array() / delta->array()).sum();
        J(1, 1) = 2.0 * (x.array() * dx_s2.array() / delta->array()).sum();
        return J;
    };
    return m;
}

// ---------------------------------------------------------------- student_t
// Student t with unknown degrees of freedom; Bailey polar generator.  The
// pivotal batch stores the accepted pair (u1, u2 = u1^2 + u3^2 <= 1) per row;
// the accept step is theta-free, so pivotality is preserved.  Auxiliary = MLE
// score of the degrees of freedom with unit scale.
inline Model make_student_t(int n) {
    Model m;
    m.id = "student_t";
    m.p = 1; m.dim_pi = 1; m.n = n; m.d = 2;
    m.theta_positive = {true};
    m.pi_positive = {true};
    m.pivot = [n](uint64_t seed, uint64_t stream) {
        Mat u(n, 2);
        for (int i = 0; i < n; ++i) {
            // Each row owns counters [i*2^32, (i+1)*2^32): rejection cannot
            // desynchronize other rows.
            uint64_t base = static_cast<uint64_t>(i) << 32;
            for (uint64_t k = 0;; k += 2) {
                double a = 2.0 * rng_uniform(seed, stream, base + k) - 1.0;
                double b = 2.0 * rng_uniform(seed, stream, base + k + 1) - 1.0;
                double w = a * a + b * b;
                if (w <= 1.0 && w > 0.0) {
                    u(i, 0) = a;
                    u(i, 1) = w;
                    break;
                }
            }
        }
        return u;
    };
    m.generate = [](const Vec& th, const Mat& u) {
        Mat x(u.rows(), 1);
        const double nu = th[0];
        for (int i = 0; i < u.rows(); ++i) {
            const double w = u(i, 1);
            x(i, 0) = u(i, 0)
                      * std::sqrt(nu / w * (std::pow(w, -2.0 / nu) - 1.0));
        }
        return x;
    };
    m.psi = [](const Mat& x, const Vec& pi) {
        const double nu = pi[0];
        const int n_ = static_cast<int>(x.rows());
        double s = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double g2 = x(i, 0) * x(i, 0);
            s += -std::log1p(g2 / nu) + (g2 - 1.0) / (g2 + nu);
        }
        Vec y(1);
        y[0] = digamma((nu + 1.0) / 2.0) - digamma(nu / 2.0) + s / n_;
        return y;
    };
    m.jac_pi = [](const Mat& x, const Vec& pi) {
        const double nu = pi[0];
        const int n_ = static_cast<int>(x.rows());
        double s = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double g2 = x(i, 0) * x(i, 0);
            const double den = g2 + nu;
            s += 1.0 / nu - 1.0 / den - (g2 - 1.0) / (den * den);
        }
        Mat J(1, 1);
        J(0, 0) = 0.5 * trigamma((nu + 1.0) / 2.0)
                - 0.5 * trigamma(nu / 2.0) + s / n_;
        return J;
    };
    m.jac_theta = [](const Vec& th, const Mat& u, const Vec& pi) {
        const double nu = th[0], p1 = pi[0];
        const int n_ = static_cast<int>(u.rows());
        double acc = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double w = u(i, 1);
            const double pw = std::pow(w, -2.0 / nu);
            const double h = nu / w * (pw - 1.0);
            const double g = u(i, 0) * std::sqrt(h);
            const double dh = ((pw - 1.0) + (2.0 / nu) * pw * std::log(w)) / w;
            const double dg = u(i, 0) * dh / (2.0 * std::sqrt(h));
            const double g2 = g * g;
            const double den = g2 + p1;
            const double dpsi_dg = 2.0 * g * (1.0 - g2) / (den * den);
            acc += dpsi_dg * dg;
        }
        Mat J(1, 1);
        J(0, 0) = acc / n_;
        return J;
    };
    m.aux_start = [](const Mat&) {
        Vec pi(1);
        pi[0] = 2.0;
        return pi;
    };
    return m;
}

// ---------------------------------------------------------------- lomax
// Lomax(b, q): inverse-CDF generator g = b (u^{-1/q} - 1); auxiliary = MLE
// score.  theta = pi = (b, q), both positive.
namespace detail_models {

inline Vec lomax_score(const Mat& x, const Vec& pi, double k_biweight) {
    const double b = pi[0], q = pi[1];
    const int n = static_cast<int>(x.rows());
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double xi = x(i, 0);
        if (xi <= 0.0) return Vec(Vec::Constant(2, std::nan("")));
        double w = 1.0;
        if (std::isfinite(k_biweight)) {
            // Standardized residual: q ln(1 + x/b) - 1 is Exp(1) - 1 under
            // the model (mean 0, unit sd).
            const double r = q * std::log1p(xi / b) - 1.0;
            const double t = r / k_biweight;
            w = (std::fabs(t) <= 1.0) ? (1.0 - t * t) * (1.0 - t * t) : 0.0;
        }
        s1 += w * (1.0 / q - std::log1p(xi / b));
        s2 += w * (-1.0 / b + (q + 1.0) / b * xi / (b + xi));
    }
    Vec y(2);
    y[0] = s1 / n;
    y[1] = s2 / n;
    return y;
}

} // namespace detail_models

inline Model make_lomax(int n, bool robust, double k_biweight) {
    const double k = robust ? k_biweight
                            : std::numeric_limits<double>::infinity();
    Model m;
    m.id = robust ? "lomax_robust" : "lomax";
    m.p = 2; m.dim_pi = 2; m.n = n; m.d = 1;
    m.theta_positive = {true, true};
    m.pi_positive = {true, true};
    m.pivot = [n](uint64_t seed, uint64_t stream) {
        return uniform_pivot(n, 1, seed, stream);
    };
    m.generate = [](const Vec& th, const Mat& u) {
        Mat x(u.rows(), 1);
        for (int i = 0; i < u.rows(); ++i)
            x(i, 0) = th[0] * (std::pow(u(i, 0), -1.0 / th[1]) - 1.0);
        return x;
    };
    m.psi = [k](const Mat& x, const Vec& pi) {
        return detail_models::lomax_score(x, pi, k);
    };
    m.aux_start = [](const Mat& x) {
        std::vector<double> v(x.col(0).data(), x.col(0).data() + x.rows());
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        Vec pi(2);
        pi[0] = std::max(v[v.size() / 2], 1e-3);
        pi[1] = 2.0;
        return pi;
    };
    if (!robust) {
        m.jac_pi = [](const Mat& x, const Vec& pi) {
            const double b = pi[0], q = pi[1];
            const int n_ = static_cast<int>(x.rows());
            Mat J = Mat::Zero(2, 2);
            for (int i = 0; i < n_; ++i) {
                const double xi = x(i, 0);
                const double den = b + xi;
                J(0, 0) += xi / (b * den);
                J(1, 0) += 1.0 / (b * b)
                         - (q + 1.0) / (b * b) * xi / den
                         - (q + 1.0) / b * xi / (den * den);
                J(1, 1) += xi / (b * den);
            }
            J /= n_;
            J(0, 1) = -1.0 / (q * q);
            return J;
        };
        m.jac_theta = [](const Vec& th, const Mat& u, const Vec& pi) {
            const double b = th[0], q = th[1];
            const double p1 = pi[0], p2 = pi[1];
            const int n_ = static_cast<int>(u.rows());
            Mat J = Mat::Zero(2, 2);
            for (int i = 0; i < n_; ++i) {
                const double pw = std::pow(u(i, 0), -1.0 / q);
                const double g = b * (pw - 1.0);
                const double dg_db = pw - 1.0;
                const double dg_dq = b * pw * std::log(u(i, 0)) / (q * q);
                const double den = p1 + g;
                const double ds1 = -1.0 / den;                    // d/dg row 1
                const double ds2 = (p2 + 1.0) / (den * den);      // d/dg row 2
                J(0, 0) += ds1 * dg_db;
                J(0, 1) += ds1 * dg_dq;
                J(1, 0) += ds2 * dg_db;
                J(1, 1) += ds2 * dg_dq;
            }
            return Mat(J / n_);
        };
    }
    return m;
}

// ---------------------------------------------------------------- lmm_ris
// Linear mixed model with random intercept and slope:
// y_i = (b0 + a_i) 1 + (b1 + c_i) x_i + e_i, i = 1..n individuals with m
// replicates.  theta = (b0, b1, s2_e, s2_a, s2_c);
// Omega_i = s2_e I + s2_a 11' + s2_c x_i x_i'.  Auxiliary = Gaussian MLE
// score of the same model.

// Derivative of a Cholesky factor: dC = C Phi(C^-1 dOmega C^-T) where Phi
// keeps the strict lower triangle and half the diagonal.
inline Mat cholesky_derivative(const Mat& C, const Mat& dOmega) {
    Mat S = C.triangularView<Eigen::Lower>().solve(dOmega);
    S = C.triangularView<Eigen::Lower>().solve(S.transpose()).transpose();
    // S = C^-1 dOmega C^-T; apply Phi.
    Mat phi = S.triangularView<Eigen::StrictlyLower>();
    phi += 0.5 * S.diagonal().asDiagonal();
    return C * phi;
}

inline Model make_lmm_ris(int n, const ModelOptions& opt) {
    const int mm = opt.m;
    auto X = std::make_shared<Mat>(detail_models::normal_design(
        n, mm, opt.design_seed, opt.design_stream + 2));

    auto omega = [](const Vec& v, const Vec& xi) {
        // v = (s2_e, s2_a, s2_c)
        const int m_ = static_cast<int>(xi.size());
        Mat O = v[0] * Mat::Identity(m_, m_);
        O.array() += v[1];
        O += v[2] * xi * xi.transpose();
        return O;
    };

    Model m;
    m.id = "lmm_ris";
    m.p = 5; m.dim_pi = 5; m.n = n; m.d = mm;
    m.theta_positive = {false, false, true, true, true};
    m.pi_positive = m.theta_positive;
    m.pivot = [n, mm](uint64_t seed, uint64_t stream) {
        CounterRng r(seed, stream);
        Mat u(n, mm);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < mm; ++j) u(i, j) = r.normal();
        return u;
    };
    m.generate = [X, omega, mm](const Vec& th, const Mat& u) {
        Mat y(u.rows(), mm);
        for (int i = 0; i < u.rows(); ++i) {
            Vec xi = X->row(i).transpose();
            Mat C = omega(th.tail(3), xi).llt().matrixL();
            y.row(i) = (th[0] + th[1] * xi.array()
                        + (C * u.row(i).transpose()).array())
                           .transpose();
        }
        return y;
    };
    m.psi = [X, omega, mm](const Mat& y, const Vec& pi) {
        const int n_ = static_cast<int>(y.rows());
        Vec out = Vec::Zero(5);
        for (int i = 0; i < n_; ++i) {
            Vec xi = X->row(i).transpose();
            Mat O = omega(pi.tail(3), xi);
            Eigen::LLT<Mat> llt(O);
            if (llt.info() != Eigen::Success)
                return Vec(Vec::Constant(5, std::nan("")));
            Mat Oinv = llt.solve(Mat::Identity(mm, mm));
            Vec z = y.row(i).transpose() - pi[0] * Vec::Ones(mm)
                    - pi[1] * xi;
            Vec Oz = Oinv * z;
            out[0] += -Oz.sum();
            out[1] += -xi.dot(Oz);
            // Variance rows: (1/2)(tr(Oinv Dj) - z' Oinv Dj Oinv z)
            out[2] += 0.5 * (Oinv.trace() - Oz.squaredNorm());
            const double s1 = Oinv.sum(), zs = Oz.sum();
            out[3] += 0.5 * (s1 - zs * zs);
            const double xox = xi.dot(Oinv * xi), zx = Oz.dot(xi);
            out[4] += 0.5 * (xox - zx * zx);
        }
        return Vec(out / n_);
    };
    m.jac_theta = [X, omega, mm](const Vec& th, const Mat& u, const Vec& pi) {
        const int n_ = static_cast<int>(u.rows());
        Mat J = Mat::Zero(5, 5);
        for (int i = 0; i < n_; ++i) {
            Vec xi = X->row(i).transpose();
            Mat C = omega(th.tail(3), xi).llt().matrixL();
            Vec y = th[0] * Vec::Ones(mm) + th[1] * xi
                    + C * u.row(i).transpose();

            Mat O = omega(pi.tail(3), xi);
            Mat Oinv = O.llt().solve(Mat::Identity(mm, mm));
            Vec z = y - pi[0] * Vec::Ones(mm) - pi[1] * xi;
            Vec Oz = Oinv * z;
            Vec a1 = Oinv * Vec::Ones(mm);
            Vec a2 = Oinv * xi;

            // d psi / d y for the five rows, evaluated at this individual.
            Mat dpsi_dy(5, mm);
            dpsi_dy.row(0) = -a1.transpose();
            dpsi_dy.row(1) = -a2.transpose();
            dpsi_dy.row(2) = -(Oinv * Oz).transpose();
            dpsi_dy.row(3) = -(Oz.sum() * a1).transpose();
            dpsi_dy.row(4) = -(Oz.dot(xi) * a2).transpose();

            // d y / d theta columns.
            Mat dy(mm, 5);
            dy.col(0) = Vec::Ones(mm);
            dy.col(1) = xi;
            const Mat D[3] = {Mat::Identity(mm, mm),
                              Mat::Ones(mm, mm),
                              Mat(xi * xi.transpose())};
            for (int j = 0; j < 3; ++j)
                dy.col(2 + j) =
                    cholesky_derivative(C, D[j]) * u.row(i).transpose();

            J += dpsi_dy * dy;
        }
        return Mat(J / n_);
    };
    m.aux_start = [X, mm](const Mat& y) {
        // Pooled OLS for the fixed effects, crude split of the residual
        // variance for the components.
        const int n_ = static_cast<int>(y.rows());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double N = static_cast<double>(n_) * mm;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < mm; ++j) {
                sx += (*X)(i, j);
                sy += y(i, j);
                sxx += (*X)(i, j) * (*X)(i, j);
                sxy += (*X)(i, j) * y(i, j);
            }
        const double b1 = (sxy - sx * sy / N) / (sxx - sx * sx / N);
        const double b0 = sy / N - b1 * sx / N;
        double v = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < mm; ++j) {
                const double e = y(i, j) - b0 - b1 * (*X)(i, j);
                v += e * e;
            }
        v /= N;
        Vec pi(5);
        pi << b0, b1, 0.5 * v, 0.3 * v, std::max(0.2 * v / (sxx / N), 1e-3);
        return pi;
    };
    return m;
}

// ---------------------------------------------------------------- mg1
// M/G/1 queue with U(t1, t2) service and Exp(t3) arrivals; observations are
// interdeparture times.  Auxiliary = Frechet(p1, p2, p3) MLE score.

// Generator with analytic sensitivities: returns x (n), dx/dtheta (n x 3)
// and dx/du (n x 2, diagonal-in-i sensitivities to u1_i and u2_i).
struct Mg1Path {
    Vec x;
    Mat dtheta;  // n x 3
    Mat du;      // n x 2
};

inline Mg1Path mg1_path(const Vec& th, const Mat& u) {
    const int n = static_cast<int>(u.rows());
    Mg1Path out;
    out.x.resize(n);
    out.dtheta.resize(n, 3);
    out.du.resize(n, 2);
    double arr = 0.0;      // arrival epoch of customer i
    double dep = 0.0;      // departure epoch of customer i-1
    double darr3 = 0.0;    // d arr / d theta3
    double suml = 0.0;     // sum of log u2 up to i
    Vec cum = Vec::Zero(3);  // column sums of dtheta up to i-1 = d dep/d theta
    for (int i = 0; i < n; ++i) {
        const double v = th[0] + (th[1] - th[0]) * u(i, 0);
        const double eps = -std::log(u(i, 1)) / th[2];
        arr += eps;
        suml += std::log(u(i, 1));
        darr3 = suml / (th[2] * th[2]);
        const bool busy = (arr <= dep);
        if (busy) {
            out.x[i] = v;
            out.dtheta(i, 0) = 1.0 - u(i, 0);
            out.dtheta(i, 1) = u(i, 0);
            out.dtheta(i, 2) = 0.0;
            out.du(i, 0) = th[1] - th[0];
            out.du(i, 1) = 0.0;
        } else {
            out.x[i] = v + arr - dep;
            out.dtheta(i, 0) = 1.0 - u(i, 0) - cum[0];
            out.dtheta(i, 1) = u(i, 0) - cum[1];
            out.dtheta(i, 2) = darr3 - cum[2];
            out.du(i, 0) = th[1] - th[0];
            // d arr / d u2_i = -1/(theta3 u2_i); dep does not depend on u2_i.
            out.du(i, 1) = -1.0 / (th[2] * u(i, 1));
        }
        dep += out.x[i];
        cum += out.dtheta.row(i).transpose();
    }
    return out;
}

// Frechet log-density and score (auxiliary model of mg1).
inline double frechet_logpdf(double x, const Vec& pi) {
    const double z = (x - pi[2]) / pi[1];
    if (!(z > 0.0)) return std::nan("");
    return std::log(pi[0] / pi[1]) - (1.0 + pi[0]) * std::log(z)
           - std::pow(z, -pi[0]);
}

inline Vec frechet_score(const Mat& x, const Vec& pi) {
    const double a = pi[0], s = pi[1], m0 = pi[2];
    const int n = static_cast<int>(x.rows());
    Vec y = Vec::Zero(3);
    for (int i = 0; i < n; ++i) {
        const double z = (x(i, 0) - m0) / s;
        if (!(z > 0.0)) return Vec(Vec::Constant(3, std::nan("")));
        const double za = std::pow(z, -a), lz = std::log(z);
        y[0] += 1.0 / a - lz * (1.0 - za);
        y[1] += (a / s) * (1.0 - za);
        y[2] += (1.0 + a) / (s * z) - (a / s) * za / z;
    }
    return Vec(y / n);
}

// d score / d x factors per observation (rows match frechet_score).
inline Vec frechet_score_dx(double x, const Vec& pi) {
    const double a = pi[0], s = pi[1], m0 = pi[2];
    const double z = (x - m0) / s;
    const double za = std::pow(z, -a), lz = std::log(z);
    Vec d(3);
    d[0] = (-(1.0 - za) / z - a * lz * za / z) / s;
    d[1] = (a * a / (s * s)) * za / z;
    d[2] = -(1.0 + a) / (s * s * z * z)
         + a * (a + 1.0) / (s * s) * za / (z * z);
    return d;
}

inline Model make_mg1(int n) {
    Model m;
    m.id = "mg1";
    m.p = 3; m.dim_pi = 3; m.n = n; m.d = 2;
    m.theta_positive = {false, false, true};
    m.pi_positive = {true, true, false};  // location may sit below zero
    m.pivot = [n](uint64_t seed, uint64_t stream) {
        return uniform_pivot(n, 2, seed, stream);
    };
    m.generate = [](const Vec& th, const Mat& u) {
        return Mat(mg1_path(th, u).x);
    };
    m.psi = [](const Mat& x, const Vec& pi) { return frechet_score(x, pi); };
    m.jac_theta = [](const Vec& th, const Mat& u, const Vec& pi) {
        Mg1Path path = mg1_path(th, u);
        const int n_ = static_cast<int>(u.rows());
        Mat J = Mat::Zero(3, 3);
        for (int i = 0; i < n_; ++i) {
            Vec dv = frechet_score_dx(path.x[i], pi);
            if (!all_finite(dv)) return Mat(Mat::Constant(3, 3, std::nan("")));
            J += dv * path.dtheta.row(i);
        }
        return Mat(J / n_);
    };
    // Log-moment start: for Frechet, ln(x - p3) is (negative) Gumbel with
    // sd pi/(p1 sqrt 6) and mean ln p2 + gamma/p1.
    auto start_at = [](const Mat& x, double frac) {
        const double xmin = x.col(0).minCoeff();
        const double m3 = frac * xmin;
        const int n_ = static_cast<int>(x.rows());
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double l = std::log(x(i, 0) - m3);
            s += l;
            s2 += l * l;
        }
        s /= n_;
        const double sd = std::sqrt(std::max(s2 / n_ - s * s, 1e-6));
        Vec pi(3);
        pi[0] = std::min(std::max(M_PI / (sd * std::sqrt(6.0)), 0.2), 50.0);
        pi[1] = std::exp(s - 0.5772156649015329 / pi[0]);
        pi[2] = m3;
        return pi;
    };
    m.aux_start = [start_at](const Mat& x) { return start_at(x, 0.5); };

    // The raw 3-parameter Frechet score has a spurious root with shape -> 0
    // and scale -> inf, so the fit is profiled instead: for fixed location
    // p3, w = 1/(x - p3) is Weibull and its shape MLE is the unique root of
    // a monotone 1-d function; the location is then found by a safeguarded
    // root search on the profiled location-score.
    m.aux_fit = [](const Mat& x, const SolverConfig& cfg) {
        const int n = static_cast<int>(x.rows());
        const double xmin = x.col(0).minCoeff();
        SolveResult res;
        res.x = Vec::Zero(3);
        if (!(xmin > 0.0)) return res;

        // Inner MLE of (shape, scale) given location m3.
        auto inner = [&](double m3, double& a, double& s) -> bool {
            std::vector<double> l(n);
            double lmean = 0.0, lmax = -1e300;
            for (int i = 0; i < n; ++i) {
                l[i] = -std::log(x(i, 0) - m3);   // log of w = 1/(x - m3)
                lmean += l[i];
                lmax = std::max(lmax, l[i]);
            }
            lmean /= n;
            auto hfun = [&](double k, double& h, double& hp) {
                double sw = 0.0, swl = 0.0, swll = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double e = std::exp(k * (l[i] - lmax));
                    sw += e;
                    swl += e * l[i];
                    swll += e * l[i] * l[i];
                }
                const double A = swl / sw;
                h = A - 1.0 / k - lmean;
                hp = (swll / sw - A * A) + 1.0 / (k * k);
            };
            // h is increasing with a unique root; bracket then Newton.
            double lo = 1e-3, hi = 1.0, h, hp;
            hfun(hi, h, hp);
            int guard = 0;
            while (h < 0.0 && guard++ < 60) { hi *= 2.0; hfun(hi, h, hp); }
            if (h < 0.0) return false;
            hfun(lo, h, hp);
            if (h > 0.0) lo = 1e-6;
            double k = std::sqrt(lo * hi);
            for (int it = 0; it < 100; ++it) {
                hfun(k, h, hp);
                if (h > 0.0) hi = k; else lo = k;
                double step = h / hp;
                double k_new = k - step;
                if (!(k_new > lo && k_new < hi)) k_new = 0.5 * (lo + hi);
                if (std::fabs(k_new - k) < 1e-14 * k) { k = k_new; break; }
                k = k_new;
            }
            a = k;
            // scale of w: lambda = (mean w^k)^(1/k); Frechet scale s = 1/lambda.
            double sw = 0.0;
            for (int i = 0; i < n; ++i) sw += std::exp(k * (l[i] - lmax));
            const double log_lambda = lmax + std::log(sw / n) / k;
            s = std::exp(-log_lambda);
            return std::isfinite(a) && std::isfinite(s) && s > 0.0;
        };

        auto prof_score3 = [&](double m3, double& a, double& s) {
            if (!inner(m3, a, s)) return std::nan("");
            Vec pi(3);
            pi << a, s, m3;
            return frechet_score(x, pi)[2];
        };

        // Bracket a sign change of the profiled location score over
        // m3 = xmin - delta, delta on a geometric grid (the location only
        // needs m3 < min(x); it may be negative).
        const double scale = std::max(x.col(0).mean() - xmin, 1e-3 * xmin);
        double prev_m3 = std::nan(""), prev_g = std::nan("");
        double lo = std::nan(""), hi = std::nan("");
        double best_m3 = std::nan(""), best_abs = 1e300;
        double a, s;
        for (double delta = 1e-8 * scale; delta <= 1e6 * scale;
             delta *= 2.0) {
            const double m3 = xmin - delta;
            const double g = prof_score3(m3, a, s);
            if (!std::isfinite(g)) { prev_g = std::nan(""); continue; }
            if (std::fabs(g) < best_abs) { best_abs = std::fabs(g); best_m3 = m3; }
            if (std::isfinite(prev_g) && g * prev_g <= 0.0) {
                lo = m3;       // lower location
                hi = prev_m3;  // higher location
                break;
            }
            prev_m3 = m3;
            prev_g = g;
        }
        double m3;
        if (std::isfinite(lo)) {
            double glo = prof_score3(lo, a, s);
            for (int it = 0; it < 200; ++it) {
                m3 = 0.5 * (lo + hi);
                const double g = prof_score3(m3, a, s);
                if (!std::isfinite(g)) break;
                if (g * glo <= 0.0) hi = m3; else { lo = m3; glo = g; }
                if (hi - lo < 1e-15 * (std::fabs(hi) + scale)) break;
            }
            m3 = 0.5 * (lo + hi);
        } else if (std::isfinite(best_m3)) {
            m3 = best_m3;  // no interior sign change: best grid candidate
        } else {
            return res;
        }
        prof_score3(m3, a, s);
        res.x << a, s, m3;
        res.residual = frechet_score(x, res.x).lpNorm<Eigen::Infinity>();
        res.converged = res.residual <= std::max(cfg.abs_tol, 1e-7);
        return res;
    };
    return m;
}

// ---------------------------------------------------------------- logistic
// Latent-variable logistic regression: y = 1{X theta + u >= 0}, u logistic
// with unit variance.  Auxiliary = OLS coefficients of the binary response.
// theta is recovered by iterative bootstrap (see solve_theta).
inline Model make_logistic(int n, const ModelOptions& opt) {
    const int q = opt.p_logistic;
    auto X = std::make_shared<Mat>(
        detail_models::normal_design(n, q, opt.design_seed,
                                     opt.design_stream + 3));
    auto XtXinv = std::make_shared<Mat>(
        (X->transpose() * (*X)).inverse());
    const double scale = std::sqrt(3.0) / M_PI;  // unit-variance logistic
    const bool smooth = opt.logistic_smooth;
    const double temp = opt.smooth_t;

    Model m;
    m.id = "logistic";
    m.p = q; m.dim_pi = q; m.n = n; m.d = 1;
    m.theta_positive.assign(q, false);
    m.pi_positive.assign(q, false);
    m.pivot = [n](uint64_t seed, uint64_t stream) {
        return uniform_pivot(n, 1, seed, stream);
    };
    m.generate = [X, scale, smooth, temp, q](const Vec& th, const Mat& u) {
        Mat g(u.rows(), 1);
        Vec eta = (*X) * th;
        for (int i = 0; i < u.rows(); ++i) {
            const double e = scale * std::log(u(i, 0) / (1.0 - u(i, 0)));
            const double lat = eta[i] + e;
            g(i, 0) = smooth ? 1.0 / (1.0 + std::exp(-lat / temp))
                             : (lat >= 0.0 ? 1.0 : 0.0);
        }
        return g;
    };
    m.psi = [X, q, n](const Mat& g, const Vec& pi) {
        return Vec((X->transpose() * ((*X) * pi - g.col(0))) / n);
    };
    m.aux_closed = [X, XtXinv](const Mat& g) {
        return Vec((*XtXinv) * (X->transpose() * g.col(0)));
    };
    if (!smooth) {
        // Iterative bootstrap: theta_{k+1} = theta_k + (X'X)^-1 X'(y - g).
        Model* self = nullptr;  // generator reused through a copy below
        auto gen = m.generate;
        (void)self;
        m.solve_theta = [X, XtXinv, gen, q](const Vec& pi_hat, const Mat& u,
                                            const SolverConfig&,
                                            const Vec& start) {
            SolveResult res;
            Vec theta = start.size() == q ? start : Vec(pi_hat);
            Vec best = theta;
            double best_obj = std::numeric_limits<double>::infinity();
            for (int it = 0; it < 500; ++it) {
                Mat g = gen(theta, u);
                Vec upd = pi_hat - (*XtXinv) * (X->transpose() * g.col(0));
                const double obj = upd.norm();
                if (obj < best_obj) { best_obj = obj; best = theta; }
                theta += upd;
                if (obj < 1e-6) break;
            }
            res.x = best;
            res.residual = best_obj;
            // The generator is piecewise constant, so the update cannot be
            // driven below the discretization scale; keep the best iterate.
            res.converged = std::isfinite(best_obj);
            return res;
        };
    }
    return m;
}

// ---------------------------------------------------------------- registry
inline std::vector<std::string> model_ids() {
    return {"cauchy_loc", "unif_max",  "expo_rate", "gamma_rate",
            "norm_loc",   "norm_meanvar", "linreg", "ridge",
            "lognorm",    "gbm",       "student_t", "lomax",
            "lomax_robust", "lmm_ris", "mg1",       "logistic"};
}

inline Model make_model(const std::string& id, int n,
                        const ModelOptions& opt = {}) {
    if (id == "cauchy_loc") return make_cauchy_loc(n);
    if (id == "unif_max") return make_unif_max(n);
    if (id == "expo_rate") return make_expo_rate(n);
    if (id == "gamma_rate") return make_gamma_rate(n, opt.gamma_shape);
    if (id == "norm_loc") return make_norm_loc(n);
    if (id == "norm_meanvar") return make_norm_meanvar(n);
    if (id == "linreg") return make_linreg(n, opt);
    if (id == "ridge") return make_ridge(n, opt);
    if (id == "lognorm") return make_lognorm(n);
    if (id == "gbm") return make_gbm(n, opt);
    if (id == "student_t") return make_student_t(n);
    if (id == "lomax") return make_lomax(n, false, opt.wmle_k);
    if (id == "lomax_robust") return make_lomax(n, true, opt.wmle_k);
    if (id == "lmm_ris") return make_lmm_ris(n, opt);
    if (id == "mg1") return make_mg1(n);
    if (id == "logistic") return make_logistic(n, opt);
    throw std::invalid_argument("unknown model id: " + id);
}

} // namespace swizs
