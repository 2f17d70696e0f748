#pragma once
// Frequentist evaluation of simulation-based posteriors: equal-tailed
// credible sets, probability integral transforms, and a Monte Carlo
// coverage harness that replays M independent trials with shared
// counter-based pivotal streams across methods.

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "swizs/estimators.hpp"
#include "swizs/oracles.hpp"
#include "swizs/stats.hpp"

namespace swizs {

struct CredibleSet {
    double lo = std::nan("");
    double hi = std::nan("");
    bool contains(double v) const { return lo <= v && v <= hi; }
    double length() const { return hi - lo; }
};

// Equal-tailed interval from posterior draws (interpolated quantiles).
inline CredibleSet credible_set(std::vector<double> draws, double level) {
    std::sort(draws.begin(), draws.end());
    const double a = (1.0 - level) / 2.0;
    return {quantile_sorted(draws, a), quantile_sorted(draws, 1.0 - a)};
}

// A scalar function of theta tracked alongside the raw coordinates
// (e.g. a quantile or tail expectation of the fitted distribution).
struct ScalarFunctional {
    std::string name;
    std::function<double(const Vec&)> fn;
    double truth = std::nan("");
};

struct CoverageOptions {
    int M = 100;                       // independent trials
    int S = 500;                       // posterior draws per trial
    std::vector<double> levels = {0.50, 0.75, 0.90, 0.95, 0.99};
    std::vector<std::string> methods = {"swizs"};
    uint64_t seed = 1;
    SolverConfig cfg;
    int threads = 1;
    double max_failed = 0.05;          // > 5% failed draws => trial invalid
    bool start_at_theta0 = false;      // start theta-solves at theta0
    double abc_eps = 0.05;
    std::vector<ScalarFunctional> functionals;
    // Needed when methods include "oracle" (recomputes designs, shapes).
    ModelOptions model_opt;
};

// Long-format result: one row per (method, quantity, level).
struct CoverageRow {
    std::string method;
    std::string quantity;              // theta_<j> or functional name
    double level = 0.0;
    double coverage = std::nan("");
    double median_length = std::nan("");
    double mean_length = std::nan("");
    int valid_trials = 0;
    int invalid_trials = 0;
};

struct MethodSummary {
    std::string method;
    std::vector<std::string> quantities;
    std::vector<double> bias;          // mean of (posterior median - truth)
    std::vector<double> rmse;
    std::vector<double> mad;           // median absolute estimation error
    std::vector<std::vector<double>> pit;  // per quantity, valid trials only
    int valid_trials = 0;
    int invalid_trials = 0;
    double mean_failed_fraction = 0.0;
    double seconds = 0.0;              // total wall time across trials
};

struct CoverageReport {
    std::string model;
    Vec theta0;
    int n = 0, M = 0, S = 0;
    uint64_t seed = 0;
    std::vector<double> levels;
    std::vector<CoverageRow> rows;
    std::vector<MethodSummary> summaries;

    const MethodSummary& summary(const std::string& method) const {
        for (const auto& s : summaries)
            if (s.method == method) return s;
        throw std::invalid_argument("no summary for method " + method);
    }
    const CoverageRow& row(const std::string& method,
                           const std::string& quantity, double level) const {
        for (const auto& r : rows)
            if (r.method == method && r.quantity == quantity
                && std::fabs(r.level - level) < 1e-12)
                return r;
        throw std::invalid_argument("no coverage row for " + method + "/"
                                    + quantity);
    }
};

namespace detail_inference {

// Per-trial, per-method intermediate record.
struct TrialResult {
    bool valid = false;
    double failed_fraction = 1.0;
    double seconds = 0.0;
    // Per quantity: sorted draws (valid trials only).
    std::vector<std::vector<double>> draws;
};

inline std::vector<std::string> quantity_names(
    const Model& m, const std::vector<ScalarFunctional>& fns) {
    std::vector<std::string> q;
    for (int j = 0; j < m.p; ++j)
        q.push_back("theta_" + std::to_string(j + 1));
    for (const auto& f : fns) q.push_back(f.name);
    return q;
}

inline std::vector<double> truths(const Vec& theta0,
                                  const std::vector<ScalarFunctional>& fns) {
    std::vector<double> t(theta0.data(), theta0.data() + theta0.size());
    for (const auto& f : fns)
        t.push_back(std::isnan(f.truth) ? f.fn(theta0) : f.truth);
    return t;
}

// Expand posterior draws into per-quantity samples (converged rows only).
inline std::vector<std::vector<double>> expand_draws(
    const Model& m, const PosteriorDraws& d,
    const std::vector<ScalarFunctional>& fns) {
    std::vector<std::vector<double>> out(m.p + fns.size());
    for (int j = 0; j < m.p; ++j) out[j] = d.column(j);
    for (int s = 0; s < d.theta.rows(); ++s) {
        if (!d.converged[s]) continue;
        Vec th = d.theta.row(s).transpose();
        for (size_t k = 0; k < fns.size(); ++k) {
            const double v = fns[k].fn(th);
            if (std::isfinite(v)) out[m.p + k].push_back(v);
        }
    }
    return out;
}

inline TrialResult run_method_trial(const Model& m, const std::string& method,
                                    const Vec& theta0, const Mat& x0,
                                    const Vec& pi_hat, uint64_t stream_base,
                                    const CoverageOptions& opt) {
    TrialResult tr;
    const auto t0 = std::chrono::steady_clock::now();
    const Vec start = opt.start_at_theta0 ? theta0 : Vec();

    if (method == "oracle") {
        OraclePosterior o =
            oracle_posterior(m.id, x0, m.n, opt.model_opt);
        if (!o.complete()) return tr;
        Mat draws = oracle_sample(o, opt.S, opt.seed, stream_base);
        tr.draws.resize(o.marginal.size());
        for (int j = 0; j < draws.cols(); ++j) {
            tr.draws[j].assign(draws.col(j).data(),
                               draws.col(j).data() + draws.rows());
        }
        for (size_t k = 0; k < opt.functionals.size(); ++k)
            tr.draws.push_back({});   // functionals need joint draws
        tr.failed_fraction = 0.0;
        tr.valid = true;
    } else {
        PosteriorDraws d;
        if (method == "swizs") {
            d = swizs_posterior(m, pi_hat, opt.seed, stream_base, opt.S,
                                opt.cfg, start, opt.threads);
        } else if (method == "iie") {
            d = iie_posterior(m, pi_hat, opt.seed, stream_base, opt.S,
                              opt.cfg, start, opt.threads);
        } else if (method == "bootstrap") {
            d = bootstrap_distribution(m, pi_hat, opt.seed, stream_base,
                                       opt.S, opt.cfg, opt.threads);
        } else if (method == "abc") {
            AbcResult a = abc_rejection(m, pi_hat, opt.seed, stream_base,
                                        opt.S, opt.abc_eps, opt.cfg);
            d.theta = a.theta;
            d.converged.assign(a.theta.rows(), true);
            d.residual = Vec::Zero(a.theta.rows());
            if (a.theta.rows() < opt.S) {
                tr.failed_fraction = 1.0;
                return tr;
            }
        } else {
            throw std::invalid_argument("unknown method: " + method);
        }
        tr.failed_fraction = d.failed_fraction();
        tr.valid = tr.failed_fraction <= opt.max_failed;
        if (tr.valid) tr.draws = expand_draws(m, d, opt.functionals);
    }
    // A quantity with too few usable draws invalidates the trial.
    if (tr.valid)
        for (size_t k = 0; k < tr.draws.size(); ++k) {
            const bool functional_under_oracle =
                method == "oracle" && k >= size_t(m.p);
            if (!functional_under_oracle && tr.draws[k].size() < 2)
                tr.valid = false;
        }
    tr.seconds = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0).count();
    return tr;
}

} // namespace detail_inference

// Frequentist coverage experiment: M trials; trial t generates data with
// pivotal stream t*(S+1) and posterior draws with streams t*(S+1)+1+s, so
// all methods see identical randomness.
inline CoverageReport run_coverage(const Model& m, const Vec& theta0,
                                   const CoverageOptions& opt) {
    using detail_inference::TrialResult;
    CoverageReport rep;
    rep.model = m.id;
    rep.theta0 = theta0;
    rep.n = m.n; rep.M = opt.M; rep.S = opt.S;
    rep.seed = opt.seed;
    rep.levels = opt.levels;

    for (const auto& method : opt.methods)
        if (method != "swizs" && method != "iie" && method != "bootstrap"
            && method != "abc" && method != "oracle")
            throw std::invalid_argument("unknown method: " + method);

    const auto qnames = detail_inference::quantity_names(m, opt.functionals);
    const auto truth = detail_inference::truths(theta0, opt.functionals);
    const size_t nq = qnames.size();
    const size_t nmeth = opt.methods.size();

    // results[method][trial]
    std::vector<std::vector<TrialResult>> results(
        nmeth, std::vector<TrialResult>(opt.M));

    parallel_for(opt.M, opt.threads, [&](int t) {
        const uint64_t stream_base =
            static_cast<uint64_t>(t) * (static_cast<uint64_t>(opt.S) + 1);
        Mat u0 = m.pivot(opt.seed, stream_base);
        Mat x0 = m.generate(theta0, u0);
        SolveResult aux = fit_auxiliary(m, x0, opt.cfg);
        for (size_t im = 0; im < nmeth; ++im) {
            if (!aux.converged) continue;  // trial invalid for every method
            results[im][t] = detail_inference::run_method_trial(
                m, opt.methods[im], theta0, x0, aux.x, stream_base, opt);
        }
    });

    for (size_t im = 0; im < nmeth; ++im) {
        const std::string& method = opt.methods[im];
        MethodSummary sum;
        sum.method = method;
        sum.quantities = qnames;
        sum.pit.resize(nq);
        std::vector<std::vector<double>> errors(nq);  // post. median - truth

        // covered[q][level], lengths[q][level]
        std::vector<std::vector<int>> covered(
            nq, std::vector<int>(opt.levels.size(), 0));
        std::vector<std::vector<std::vector<double>>> lengths(
            nq, std::vector<std::vector<double>>(opt.levels.size()));
        std::vector<int> valid_q(nq, 0);

        for (int t = 0; t < opt.M; ++t) {
            const TrialResult& tr = results[im][t];
            sum.seconds += tr.seconds;
            if (!tr.valid) { ++sum.invalid_trials; continue; }
            ++sum.valid_trials;
            sum.mean_failed_fraction += tr.failed_fraction;
            for (size_t q = 0; q < nq; ++q) {
                if (q >= tr.draws.size() || tr.draws[q].size() < 2) continue;
                ++valid_q[q];
                std::vector<double> draws = tr.draws[q];
                std::sort(draws.begin(), draws.end());
                sum.pit[q].push_back(pit_value(draws, truth[q]));
                errors[q].push_back(median(draws) - truth[q]);
                for (size_t il = 0; il < opt.levels.size(); ++il) {
                    const double a = (1.0 - opt.levels[il]) / 2.0;
                    CredibleSet cs{quantile_sorted(draws, a),
                                   quantile_sorted(draws, 1.0 - a)};
                    if (cs.contains(truth[q])) ++covered[q][il];
                    lengths[q][il].push_back(cs.length());
                }
            }
        }
        if (sum.valid_trials > 0)
            sum.mean_failed_fraction /= sum.valid_trials;

        for (size_t q = 0; q < nq; ++q) {
            if (!errors[q].empty()) {
                sum.bias.push_back(mean(errors[q]));
                double ss = 0.0;
                for (double e : errors[q]) ss += e * e;
                sum.rmse.push_back(std::sqrt(ss / errors[q].size()));
                std::vector<double> abserr(errors[q].size());
                for (size_t i = 0; i < abserr.size(); ++i)
                    abserr[i] = std::fabs(errors[q][i]);
                sum.mad.push_back(median(abserr));
            } else {
                sum.bias.push_back(std::nan(""));
                sum.rmse.push_back(std::nan(""));
                sum.mad.push_back(std::nan(""));
            }
            for (size_t il = 0; il < opt.levels.size(); ++il) {
                CoverageRow r;
                r.method = method;
                r.quantity = qnames[q];
                r.level = opt.levels[il];
                r.valid_trials = valid_q[q];
                r.invalid_trials = opt.M - valid_q[q];
                if (valid_q[q] > 0) {
                    r.coverage = double(covered[q][il]) / valid_q[q];
                    r.median_length = median(lengths[q][il]);
                    r.mean_length = mean(lengths[q][il]);
                }
                rep.rows.push_back(std::move(r));
            }
        }
        rep.summaries.push_back(std::move(sum));
    }
    return rep;
}

// Binomial standard error of an empirical coverage estimate.
inline double coverage_se(double level, int trials) {
    return std::sqrt(level * (1.0 - level) / std::max(trials, 1));
}

} // namespace swizs
