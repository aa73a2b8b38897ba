#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Closed-form fiducial laws used as validation targets, the bootstrap
// survivor-function estimator, and sample-vs-law distance metrics.
namespace fiducial {

enum class OracleKind { Beta, Gamma, InverseGamma, Normal, Pareto };

class OracleDistribution {
public:
    static OracleDistribution beta(double alpha, double beta);
    static OracleDistribution gamma(double shape, double rate);
    static OracleDistribution inverse_gamma(double shape, double scale);
    static OracleDistribution normal(double mean, double sd);
    static OracleDistribution pareto(double alpha, double scale);

    double cdf(double x) const;
    double pdf(double x) const;
    double quantile(double p) const;
    double mean() const;

    OracleKind kind() const { return kind_; }
    double param1() const { return p1_; }
    double param2() const { return p2_; }
    std::string describe() const;

private:
    OracleDistribution(OracleKind k, double p1, double p2) : kind_(k), p1_(p1), p2_(p2) {}
    OracleKind kind_;
    double p1_, p2_;
};

enum class OracleFamily { Bernoulli, Poisson, Exponential, Normal, Uniform };

// Matches the observed statistic to its closed-form fiducial law.
// `extra` carries the known sigma for the normal family.
OracleDistribution fisher_oracle(OracleFamily family, double t_n, std::int64_t n,
                                 double extra = 0.0);

// Survivor-function estimate P(T_n(theta) > t_n) over a grid of success
// probabilities, each from B simulated binomial(n, theta) statistics.
std::vector<double> bootstrap_fiducial(std::span<const double> theta_grid, std::int64_t t_n,
                                       std::int64_t n, std::int64_t B, std::uint64_t seed);

// Single-observation fiducial density proportional to x^theta * exp(-x^theta),
// normalized over the supplied grid by trapezoidal quadrature. x=1 is not
// normalizable and is rejected.
std::vector<double> hannig_weibull_density(double x, std::span<const double> theta_grid);

double ks_distance(std::span<const double> samples, const OracleDistribution& oracle);
double ks_distance_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace fiducial
