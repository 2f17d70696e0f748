#pragma once
// Study-level machinery: Lomax tail functionals and the bias-adjusted MLE,
// preset configurations for the five simulation studies, a Wald-interval
// comparator for the logistic design, and a method timing harness.

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "swizs/inference.hpp"

namespace swizs {

// ---- Lomax functionals ------------------------------------------------------
// Lomax(b, q): density (q/b)(1+x/b)^{-q-1}, quantile b((1-p)^{-1/q} - 1).

inline double lomax_quantile(double b, double q, double p) {
    return b * (std::pow(1.0 - p, -1.0 / q) - 1.0);
}

inline double lomax_var(double b, double q, double alpha) {
    return lomax_quantile(b, q, alpha);
}

// Expected shortfall (1/(1-a)) * int_a^1 VaR_u du, in closed form.
inline double lomax_es(double b, double q, double alpha) {
    if (!(q > 1.0))
        throw std::domain_error("lomax_es: infinite mean for shape <= 1");
    return b * (q / (q - 1.0) * std::pow(1.0 - alpha, -1.0 / q) - 1.0);
}

// Gini coefficient via the Lorenz-curve integral
//   G = 1 - (2/mu) int_0^1 (1-u) Q(u) du,
// evaluated by composite Simpson quadrature refined until stable.
inline double lomax_gini(double b, double q, double tol = 1e-9) {
    if (!(q > 1.0))
        throw std::domain_error("lomax_gini: infinite mean for shape <= 1");
    const double mu = b / (q - 1.0);
    // With t = 1-u the integral is int_0^1 b (t^{1-1/q} - t) dt; the change
    // of variable t = s^4 removes the derivative singularity at t = 0 so the
    // composite Simpson rule converges quickly.
    auto integrand = [&](double s) {
        return b * (std::pow(s, 4.0 * (1.0 - 1.0 / q)) - s * s * s * s)
               * 4.0 * s * s * s;
    };
    auto simpson = [&](int intervals) {
        const double h = 1.0 / intervals;
        double s = integrand(0.0) + integrand(1.0);
        for (int i = 1; i < intervals; ++i)
            s += integrand(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
        return s * h / 3.0;
    };
    double prev = simpson(64), cur = prev;
    for (int intervals = 128; intervals <= (1 << 20); intervals *= 2) {
        cur = simpson(intervals);
        if (std::fabs(cur - prev) < tol) break;
        prev = cur;
    }
    return 1.0 - 2.0 / mu * cur;
}

// ---- Lomax bias-adjusted MLE ------------------------------------------------
// theta_BA = pi - B(pi) A(pi) vec(B(pi)), a second-order bias correction of
// the Lomax MLE; the net correction is O(1/n).  The adjusted estimate may
// leave the parameter space (negative coordinates) and is returned as-is.

inline Mat lomax_ba_A(const Vec& pi, int n) {
    const double b = pi[0], q = pi[1];
    Mat A(2, 4);
    A << 2.0 * q / (b * b * b * (q + 2.0) * (q + 3.0)),
         -1.0 / (b * b * (q + 1.0) * (q + 2.0)),
         q / (b * b * (q + 2.0) * (q + 2.0)),
         -1.0 / (b * (q + 1.0) * (q + 1.0)),
         -1.0 / (b * b * (q + 1.0) * (q + 2.0)),
         0.0,
         -1.0 / (b * (q + 1.0) * (q + 1.0)),
         1.0 / (q * q * q);
    return n * A;
}

// B^-1 is the expected information, which is symmetric; the off-diagonal
// entry is -1/(b(q+1)) in both positions (verified by numerical integration
// of E[-d^2 log f]; the resulting first-order bias also matches simulated
// MLE bias at large n, which an asymmetric variant does not).
inline Mat lomax_ba_Binv(const Vec& pi, int n) {
    const double b = pi[0], q = pi[1];
    Mat Binv(2, 2);
    Binv << q / (b * b * (q + 2.0)), -1.0 / (b * (q + 1.0)),
            -1.0 / (b * (q + 1.0)), 1.0 / (q * q);
    return n * Binv;
}

inline Vec lomax_bias_adjust(const Vec& pi_hat, int n) {
    if (!(pi_hat[0] > 0.0) || !(pi_hat[1] > 0.0))
        throw std::domain_error("lomax_bias_adjust: pi must be positive");
    Mat Binv = lomax_ba_Binv(pi_hat, n);
    const double det = Binv(0, 0) * Binv(1, 1) - Binv(0, 1) * Binv(1, 0);
    // det = n^2 / (b^2 q (q+1)(q+2)) > 0 analytically; guard against
    // numerical collapse at extreme auxiliary estimates.
    if (!(std::fabs(det) > 0.0) || !std::isfinite(det))
        throw std::runtime_error("lomax_bias_adjust: singular B^-1");
    Mat B(2, 2);
    B << Binv(1, 1), -Binv(0, 1), -Binv(1, 0), Binv(0, 0);
    B /= det;
    Eigen::Map<const Vec> vecB(B.data(), 4);  // column-major stacking
    return pi_hat - B * (lomax_ba_A(pi_hat, n) * vecB);
}

inline bool out_of_domain(const Vec& theta) {
    for (int j = 0; j < theta.size(); ++j)
        if (!(theta[j] > 0.0)) return true;
    return false;
}

// Fraction of trials in which the bias-adjusted Lomax MLE leaves the
// parameter space, over M independently generated samples of size n.
inline double lomax_ba_out_of_domain_rate(int n, const Vec& theta0, int M,
                                          uint64_t seed, int threads = 1,
                                          const SolverConfig& cfg = {}) {
    Model m = make_model("lomax", n);
    std::vector<int> flag(M, 0);
    parallel_for(M, threads, [&](int t) {
        const uint64_t stream = static_cast<uint64_t>(t);
        Mat x0 = m.generate(theta0, m.pivot(seed, stream));
        SolveResult aux = fit_auxiliary(m, x0, cfg);
        if (!aux.converged) return;
        // Diverging MLEs (the exponential embedding, pi -> inf) make the
        // information numerically singular; those samples are skipped.
        Mat Binv = lomax_ba_Binv(aux.x, n);
        const double det = Binv(0, 0) * Binv(1, 1) - Binv(0, 1) * Binv(1, 0);
        if (!(det > 0.0) || !std::isfinite(det)) return;
        flag[t] = out_of_domain(lomax_bias_adjust(aux.x, n)) ? 1 : 0;
    });
    int cnt = 0;
    for (int f : flag) cnt += f;
    return double(cnt) / M;
}

// ---- logistic Wald comparator -----------------------------------------------

// IRLS fit of a logistic GLM; returns coefficients and standard errors from
// the observed information (X' W X)^-1.
struct GlmFit {
    Vec coef;
    Vec se;
    bool converged = false;
};

inline GlmFit logistic_irls(const Mat& X, const Vec& y, int max_iter = 100,
                            double tol = 1e-10) {
    GlmFit fit;
    const int p = static_cast<int>(X.cols());
    Vec beta = Vec::Zero(p);
    for (int it = 0; it < max_iter; ++it) {
        Vec eta = X * beta;
        Vec mu = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
        Vec w = mu.array() * (1.0 - mu.array());
        Mat XtWX = X.transpose() * w.asDiagonal() * X;
        Vec grad = X.transpose() * (y - mu);
        Eigen::LDLT<Mat> ldlt(XtWX);
        Vec step = ldlt.solve(grad);
        if (!step.allFinite()) break;
        beta += step;
        if (step.lpNorm<Eigen::Infinity>() < tol) {
            fit.converged = true;
            Mat cov = Eigen::LDLT<Mat>(
                          Mat(X.transpose()
                              * Vec(mu.array() * (1.0 - mu.array()))
                                    .asDiagonal() * X))
                          .solve(Mat::Identity(p, p));
            fit.coef = beta;
            fit.se = cov.diagonal().cwiseSqrt();
            return fit;
        }
    }
    fit.coef = beta;
    fit.se = Vec::Constant(p, std::nan(""));
    return fit;
}

// Coverage of Wald intervals est_j +- z_{1-a/2} se_j built per trial by a
// user-supplied fit; shares the data streams t*(S+1) with run_coverage so the
// comparison uses identical samples.
inline CoverageReport run_wald_coverage(
    const Model& m, const Vec& theta0, const CoverageOptions& opt,
    const std::function<GlmFit(const Mat& x0)>& fit_fn) {
    CoverageReport rep;
    rep.model = m.id;
    rep.theta0 = theta0;
    rep.n = m.n; rep.M = opt.M; rep.S = opt.S;
    rep.seed = opt.seed;
    rep.levels = opt.levels;

    boost::math::normal_distribution<double> N01;
    std::vector<GlmFit> fits(opt.M);
    parallel_for(opt.M, opt.threads, [&](int t) {
        const uint64_t base =
            static_cast<uint64_t>(t) * (static_cast<uint64_t>(opt.S) + 1);
        Mat x0 = m.generate(theta0, m.pivot(opt.seed, base));
        fits[t] = fit_fn(x0);
    });

    MethodSummary sum;
    sum.method = "asymptotic";
    for (int j = 0; j < m.p; ++j)
        sum.quantities.push_back("theta_" + std::to_string(j + 1));
    std::vector<std::vector<double>> errors(m.p);
    std::vector<std::vector<int>> covered(
        m.p, std::vector<int>(opt.levels.size(), 0));
    std::vector<std::vector<std::vector<double>>> lengths(
        m.p, std::vector<std::vector<double>>(opt.levels.size()));
    for (int t = 0; t < opt.M; ++t) {
        const GlmFit& f = fits[t];
        if (!f.converged || !f.se.allFinite()) { ++sum.invalid_trials; continue; }
        ++sum.valid_trials;
        for (int j = 0; j < m.p; ++j) {
            errors[j].push_back(f.coef[j] - theta0[j]);
            for (size_t il = 0; il < opt.levels.size(); ++il) {
                const double z = boost::math::quantile(
                    N01, 1.0 - (1.0 - opt.levels[il]) / 2.0);
                const double lo = f.coef[j] - z * f.se[j];
                const double hi = f.coef[j] + z * f.se[j];
                if (lo <= theta0[j] && theta0[j] <= hi) ++covered[j][il];
                lengths[j][il].push_back(hi - lo);
            }
        }
    }
    for (int j = 0; j < m.p; ++j) {
        sum.bias.push_back(errors[j].empty() ? std::nan("")
                                             : mean(errors[j]));
        for (size_t il = 0; il < opt.levels.size(); ++il) {
            CoverageRow r;
            r.method = "asymptotic";
            r.quantity = sum.quantities[j];
            r.level = opt.levels[il];
            r.valid_trials = sum.valid_trials;
            r.invalid_trials = sum.invalid_trials;
            if (sum.valid_trials > 0) {
                r.coverage = double(covered[j][il]) / sum.valid_trials;
                r.median_length = median(lengths[j][il]);
                r.mean_length = mean(lengths[j][il]);
            }
            rep.rows.push_back(std::move(r));
        }
    }
    rep.summaries.push_back(std::move(sum));
    return rep;
}

// Wald fit for the logistic model: the IRLS coefficients estimate theta
// divided by the latent logistic scale, so estimates and standard errors are
// multiplied back by it.
inline std::function<GlmFit(const Mat&)> logistic_wald_fit(
    int n, const ModelOptions& opt = {}) {
    auto X = std::make_shared<Mat>(detail_models::normal_design(
        n, opt.p_logistic, opt.design_seed, opt.design_stream + 3));
    const double scale = std::sqrt(3.0) / M_PI;
    return [X, scale](const Mat& x0) {
        GlmFit f = logistic_irls(*X, x0.col(0));
        if (f.converged) {
            f.coef *= scale;
            f.se *= scale;
        }
        return f;
    };
}

// ---- study presets ----------------------------------------------------------

struct Study {
    std::string name;
    std::string model_id;
    int n = 0;
    Vec theta0;
    ModelOptions model_opt;
    CoverageOptions coverage;
};

inline std::vector<std::string> study_names() {
    return {"student_t", "lomax", "lomax_robust", "lmm_ris", "mg1",
            "mg1_start_theta0", "logistic"};
}

// Desk-scale defaults (full-scale runs override M, S, n from the config).
inline Study make_study(const std::string& name) {
    Study s;
    s.name = name;
    s.coverage.levels = {0.50, 0.75, 0.90, 0.95, 0.99};
    s.coverage.M = 200;
    s.coverage.S = 500;
    if (name == "student_t") {
        s.model_id = "student_t";
        s.n = 50;
        s.theta0 = Vec::Constant(1, 1.5);
        s.coverage.methods = {"swizs"};
    } else if (name == "lomax" || name == "lomax_robust") {
        s.model_id = name;
        s.n = 50;
        s.theta0 = (Vec(2) << 2.0, 2.3).finished();
        s.coverage.methods = {"swizs", "bootstrap"};
        const double b = s.theta0[0], q = s.theta0[1];
        s.coverage.functionals = {
            {"var95", [](const Vec& th) {
                 return lomax_var(th[0], th[1], 0.95); },
             lomax_var(b, q, 0.95)},
            {"es95", [](const Vec& th) {
                 return th[1] > 1.0 ? lomax_es(th[0], th[1], 0.95)
                                    : std::nan(""); },
             lomax_es(b, q, 0.95)},
            {"median", [](const Vec& th) {
                 return lomax_quantile(th[0], th[1], 0.5); },
             lomax_quantile(b, q, 0.5)},
            {"gini", [](const Vec& th) {
                 return th[1] > 1.0 ? lomax_gini(th[0], th[1], 1e-7)
                                    : std::nan(""); },
             lomax_gini(b, q)},
        };
    } else if (name == "lmm_ris") {
        s.model_id = "lmm_ris";
        s.n = 5;
        s.model_opt.m = 5;
        s.theta0 = (Vec(5) << 1.0, 0.5, 0.25, 0.25, 0.04).finished();
        s.coverage.methods = {"swizs"};
        s.coverage.M = 100;
        s.coverage.S = 200;
    } else if (name == "mg1" || name == "mg1_start_theta0") {
        s.model_id = "mg1";
        s.n = 100;
        s.theta0 = (Vec(3) << 0.3, 0.9, 1.0).finished();
        s.coverage.methods = {"swizs"};
        s.coverage.start_at_theta0 = name == "mg1_start_theta0";
        s.coverage.M = 100;
        s.coverage.S = 200;
    } else if (name == "logistic") {
        s.model_id = "logistic";
        s.n = 200;
        s.model_opt.p_logistic = 20;
        s.theta0 = Vec::Zero(20);
        s.theta0[1] = 5.0; s.theta0[2] = 5.0;
        s.theta0[3] = -7.0; s.theta0[4] = -7.0;
        s.coverage.methods = {"swizs"};
        s.coverage.M = 50;
        s.coverage.S = 200;
    } else {
        throw std::invalid_argument("unknown study: " + name);
    }
    s.coverage.model_opt = s.model_opt;
    return s;
}

// ---- timing harness ---------------------------------------------------------

struct MethodTiming {
    std::string method;
    double seconds = 0.0;
    int draws = 0;
    int failed = 0;
};

// Wall-clock comparison of posterior constructions on a single data set.
// "bootstrap_iie" is the parametric bootstrap fed by an indirect-inference
// point estimate (required when the auxiliary space differs from Theta).
inline std::vector<MethodTiming> time_methods(
    const Model& m, const Vec& theta0, uint64_t seed, int S,
    const std::vector<std::string>& methods, const SolverConfig& cfg = {},
    const Vec& start_override = Vec()) {
    Mat x0 = m.generate(theta0, m.pivot(seed, 0));
    SolveResult aux = fit_auxiliary(m, x0, cfg);
    if (!aux.converged)
        throw std::runtime_error("time_methods: auxiliary fit failed");

    std::vector<MethodTiming> out;
    for (const auto& method : methods) {
        MethodTiming t;
        t.method = method;
        t.draws = S;
        const auto t0 = std::chrono::steady_clock::now();
        if (method == "swizs") {
            PosteriorDraws d =
                swizs_posterior(m, aux.x, seed, 0, S, cfg, start_override);
            t.failed = d.failed();
        } else if (method == "iie") {
            PosteriorDraws d =
                iie_posterior(m, aux.x, seed, 0, S, cfg, start_override);
            t.failed = d.failed();
        } else if (method == "bootstrap_iie") {
            // Parametric bootstrap of the indirect-inference estimator:
            // simulate data at the point estimate, refit the auxiliary,
            // and re-run the full indirect-inference solve per replicate.
            SolveResult point =
                iie_draw(m, aux.x, m.pivot(seed, 1), cfg, start_override);
            for (int sdx = 0; sdx < S; ++sdx) {
                Mat u = m.pivot(seed, 1 + sdx);
                SolveResult r = fit_auxiliary(m, m.generate(point.x, u), cfg);
                if (!r.converged) { ++t.failed; continue; }
                SolveResult b = iie_draw(m, r.x, m.pivot(seed, S + 1 + sdx),
                                         cfg, start_override);
                if (!b.converged) ++t.failed;
            }
        } else {
            throw std::invalid_argument("time_methods: unknown method "
                                        + method);
        }
        t.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(t));
    }
    return out;
}

} // namespace swizs
