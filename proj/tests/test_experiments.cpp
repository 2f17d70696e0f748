#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "swizs/experiments.hpp"

using namespace swizs;

TEST_CASE("Lomax tail functionals in closed form") {
    // Quantile by CDF round-trip: F(Q(p)) = p.
    auto cdf = [](double x, double b, double q) {
        return 1.0 - std::pow(1.0 + x / b, -q);
    };
    for (double p : {0.1, 0.5, 0.95, 0.99})
        CHECK(cdf(lomax_quantile(2.0, 2.3, p), 2.0, 2.3)
              == doctest::Approx(p).epsilon(1e-12));

    CHECK(lomax_quantile(2.0, 2.3, 0.5)
          == doctest::Approx(2.0 * (std::pow(2.0, 1.0 / 2.3) - 1.0)));
    CHECK(lomax_quantile(2.0, 2.3, 0.5) == doctest::Approx(0.7024).epsilon(1e-3));
    CHECK(lomax_var(2.0, 2.3, 0.95)
          == doctest::Approx(2.0 * (std::pow(20.0, 1.0 / 2.3) - 1.0)));
    CHECK(lomax_var(2.0, 2.3, 0.95) == doctest::Approx(5.3481).epsilon(2e-3));

    // ES is the closed-form average of VaR_u over u in (alpha, 1): check by
    // numerical integration with u = 1 - (1-alpha) s^4 to tame the
    // integrable singularity at u = 1.
    const double alpha = 0.95, b = 2.0, q = 2.3;
    double acc = 0.0; const int grid = 20000;
    for (int i = 0; i < grid; ++i) {
        const double s = (i + 0.5) / grid;
        const double tail = (1.0 - alpha) * s * s * s * s;  // = 1 - u
        acc += b * (std::pow(tail, -1.0 / q) - 1.0) * 4.0 * s * s * s;
    }
    CHECK(lomax_es(b, q, alpha) == doctest::Approx(acc / grid).epsilon(1e-5));
    CHECK(lomax_es(b, q, alpha) > lomax_var(b, q, alpha));
    CHECK_THROWS_AS(lomax_es(2.0, 0.9, 0.95), std::domain_error);
}

TEST_CASE("Lomax Gini coefficient: quadrature is stable and scale-free") {
    // Refinement stability.
    CHECK(lomax_gini(2.0, 2.3, 1e-9)
          == doctest::Approx(lomax_gini(2.0, 2.3, 1e-6)).epsilon(1e-6));
    // Scale invariance.
    CHECK(lomax_gini(2.0, 2.3) == doctest::Approx(lomax_gini(17.0, 2.3)));
    // Independent closed form q/(2q-1) from the Lorenz integral.
    CHECK(lomax_gini(2.0, 2.3) == doctest::Approx(2.3 / 3.6).epsilon(1e-7));
    CHECK_THROWS_AS(lomax_gini(2.0, 1.0), std::domain_error);
}

TEST_CASE("Lomax bias adjustment: matrices, limit, and domain exits") {
    // Double-entry check of the matrices at pi = (1, 1).
    Vec pi = (Vec(2) << 1.0, 1.0).finished();
    const int n = 35;
    Mat A = lomax_ba_A(pi, n);
    CHECK(A(0, 0) == doctest::Approx(n * 2.0 / 12.0));
    CHECK(A(0, 1) == doctest::Approx(-n / 6.0));
    CHECK(A(0, 2) == doctest::Approx(n / 9.0));
    CHECK(A(0, 3) == doctest::Approx(-n / 4.0));
    CHECK(A(1, 0) == doctest::Approx(-n / 6.0));
    CHECK(A(1, 1) == doctest::Approx(0.0));
    CHECK(A(1, 2) == doctest::Approx(-n / 4.0));
    CHECK(A(1, 3) == doctest::Approx(double(n)));
    Mat Binv = lomax_ba_Binv(pi, n);
    CHECK(Binv(0, 0) == doctest::Approx(n / 3.0));
    CHECK(Binv(0, 1) == doctest::Approx(-n / 2.0));
    CHECK(Binv(1, 0) == doctest::Approx(Binv(0, 1)));  // information symmetry
    CHECK(Binv(1, 1) == doctest::Approx(double(n)));

    // Net correction is O(1/n): vanishes in the large-n limit.
    Vec pi_hat = (Vec(2) << 2.0, 2.3).finished();
    Vec adj_small = pi_hat - lomax_bias_adjust(pi_hat, 1000);
    Vec adj_large = pi_hat - lomax_bias_adjust(pi_hat, 1000000);
    CHECK(adj_large.norm() < 1e-2 * adj_small.norm());
    CHECK((1000.0 * adj_small).isApprox(1000000.0 * adj_large, 1e-9));

    CHECK(out_of_domain((Vec(2) << -0.1, 2.0).finished()));
    CHECK(out_of_domain((Vec(2) << 0.1, -2.0).finished()));
    CHECK(!out_of_domain(pi_hat));
    CHECK_THROWS_AS(
        lomax_bias_adjust((Vec(2) << -1.0, 1.0).finished(), 35),
        std::domain_error);
}

TEST_CASE("Lomax bias adjustment frequently exits the domain at small n") {
    Vec theta0 = (Vec(2) << 2.0, 2.3).finished();
    const double r35 = lomax_ba_out_of_domain_rate(35, theta0, 500, 77);
    const double r150 = lomax_ba_out_of_domain_rate(150, theta0, 500, 77);
    CHECK(r35 > 0.30);
    CHECK(r35 < 0.48);
    CHECK(r150 < 0.03);
}

TEST_CASE("logistic IRLS recovers the latent coefficients and its Wald "
          "intervals behave asymptotically") {
    const int n = 4000;
    ModelOptions mo;
    mo.p_logistic = 4;
    Model m = make_model("logistic", n, mo);
    Vec theta0 = (Vec(4) << 0.2, 1.0, -1.5, 0.7).finished();
    Mat x0 = m.generate(theta0, m.pivot(31, 0));
    GlmFit f = logistic_wald_fit(n, mo)(x0);
    REQUIRE(f.converged);
    for (int j = 0; j < 4; ++j) {
        CAPTURE(j);
        CHECK(std::fabs(f.coef[j] - theta0[j]) < 5.0 * f.se[j]);
        CHECK(f.se[j] > 0.0);
        CHECK(f.se[j] < 0.2);
    }

    CoverageOptions opt;
    opt.M = 150; opt.S = 0;
    opt.levels = {0.90};
    opt.seed = 31;
    Model m2 = make_model("logistic", 500, mo);
    CoverageReport rep = run_wald_coverage(
        m2, theta0, opt, logistic_wald_fit(500, mo));
    const MethodSummary& s = rep.summary("asymptotic");
    CHECK(s.valid_trials > 140);
    for (int j = 0; j < 4; ++j) {
        const CoverageRow& r =
            rep.row("asymptotic", "theta_" + std::to_string(j + 1), 0.90);
        CHECK(std::fabs(r.coverage - 0.90)
              <= 5.0 * coverage_se(0.90, r.valid_trials));
    }
}

TEST_CASE("study presets are well formed") {
    for (const auto& name : study_names()) {
        CAPTURE(name);
        Study s = make_study(name);
        CHECK(s.n > 0);
        Model m = make_model(s.model_id, s.n, s.model_opt);
        CHECK(m.p == s.theta0.size());
        CHECK(!s.coverage.methods.empty());
        CHECK(!s.coverage.levels.empty());
    }
    Study lomax = make_study("lomax");
    CHECK(lomax.coverage.functionals.size() == 4);
    // Functional truths at theta0.
    CHECK(lomax.coverage.functionals[0].truth
          == doctest::Approx(lomax_var(2.0, 2.3, 0.95)));
    Study mg1 = make_study("mg1_start_theta0");
    CHECK(mg1.coverage.start_at_theta0);
    CHECK(!make_study("mg1").coverage.start_at_theta0);
    CHECK_THROWS_AS(make_study("nope"), std::invalid_argument);
}

TEST_CASE("timing harness reports per-method wall time") {
    Model m = make_model("expo_rate", 30);
    auto times = time_methods(m, Vec::Constant(1, 2.0), 9, 50,
                              {"swizs", "iie", "bootstrap_iie"});
    REQUIRE(times.size() == 3);
    for (const auto& t : times) {
        CHECK(t.seconds >= 0.0);
        CHECK(t.draws == 50);
        CHECK(t.failed == 0);
    }
    CHECK_THROWS_AS(
        time_methods(m, Vec::Constant(1, 2.0), 9, 5, {"bogus"}),
        std::invalid_argument);
}
