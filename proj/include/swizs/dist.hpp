#pragma once
// Closed-form reference distributions used by the oracles and the coverage
// self-tests.  Each distribution exposes cdf/quantile; sampling is quantile
// applied to a counter-based uniform, so oracle draws are reproducible.

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/cauchy.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace swizs {

class ScalarDist {
public:
    virtual ~ScalarDist() = default;
    virtual double cdf(double x) const = 0;
    virtual double quantile(double p) const = 0;
    virtual std::string name() const = 0;
};

class NormalDist : public ScalarDist {
public:
    NormalDist(double mu, double sigma) : d_(mu, sigma) {}
    double cdf(double x) const override { return boost::math::cdf(d_, x); }
    double quantile(double p) const override { return boost::math::quantile(d_, p); }
    std::string name() const override { return "normal"; }
private:
    boost::math::normal_distribution<double> d_;
};

class CauchyDist : public ScalarDist {
public:
    CauchyDist(double loc, double scale) : d_(loc, scale) {}
    double cdf(double x) const override { return boost::math::cdf(d_, x); }
    double quantile(double p) const override { return boost::math::quantile(d_, p); }
    std::string name() const override { return "cauchy"; }
private:
    boost::math::cauchy_distribution<double> d_;
};

// Gamma in shape/rate parameterization.
class GammaDist : public ScalarDist {
public:
    GammaDist(double shape, double rate) : d_(shape, 1.0 / rate) {}
    double cdf(double x) const override {
        return x <= 0.0 ? 0.0 : boost::math::cdf(d_, x);
    }
    double quantile(double p) const override { return boost::math::quantile(d_, p); }
    std::string name() const override { return "gamma"; }
private:
    boost::math::gamma_distribution<double> d_;
};

// Inverse gamma: X = 1/G with G ~ Gamma(shape, rate=scale).
class InvGammaDist : public ScalarDist {
public:
    InvGammaDist(double shape, double scale) : d_(shape, scale) {}
    double cdf(double x) const override {
        return x <= 0.0 ? 0.0 : boost::math::cdf(d_, x);
    }
    double quantile(double p) const override { return boost::math::quantile(d_, p); }
    std::string name() const override { return "inverse-gamma"; }
private:
    boost::math::inverse_gamma_distribution<double> d_;
};

// Location-scale Student t: loc + scale * T_nu.
class StudentTDist : public ScalarDist {
public:
    StudentTDist(double loc, double scale, double nu)
        : loc_(loc), scale_(scale), d_(nu) {
        if (scale <= 0.0) throw std::domain_error("StudentTDist: scale <= 0");
    }
    double cdf(double x) const override {
        return boost::math::cdf(d_, (x - loc_) / scale_);
    }
    double quantile(double p) const override {
        return loc_ + scale_ * boost::math::quantile(d_, p);
    }
    std::string name() const override { return "student-t"; }
private:
    double loc_, scale_;
    boost::math::students_t_distribution<double> d_;
};

// Pareto with density n * m^n / x^(n+1) on (m, inf).
class ParetoDist : public ScalarDist {
public:
    ParetoDist(double scale, double shape) : m_(scale), a_(shape) {
        if (scale <= 0.0 || shape <= 0.0)
            throw std::domain_error("ParetoDist: parameters must be positive");
    }
    double cdf(double x) const override {
        return x <= m_ ? 0.0 : 1.0 - std::pow(m_ / x, a_);
    }
    double quantile(double p) const override {
        return m_ * std::pow(1.0 - p, -1.0 / a_);
    }
    std::string name() const override { return "pareto"; }
private:
    double m_, a_;
};

// Power-function law with density a * x^(a-1) / m^a on (0, m).
class PowerFnDist : public ScalarDist {
public:
    PowerFnDist(double scale, double shape) : m_(scale), a_(shape) {
        if (scale <= 0.0 || shape <= 0.0)
            throw std::domain_error("PowerFnDist: parameters must be positive");
    }
    double cdf(double x) const override {
        if (x <= 0.0) return 0.0;
        if (x >= m_) return 1.0;
        return std::pow(x / m_, a_);
    }
    double quantile(double p) const override {
        return m_ * std::pow(p, 1.0 / a_);
    }
    std::string name() const override { return "power-function"; }
private:
    double m_, a_;
};

// Deterministic inverse-CDF Gamma(shape, 1) pivot from a uniform deviate.
inline double gamma_pivot(double shape, double u) {
    boost::math::gamma_distribution<double> d(shape, 1.0);
    return boost::math::quantile(d, u);
}

} // namespace swizs
