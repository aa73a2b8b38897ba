#include "fiducial/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fiducial/rng.hpp"
#include "fiducial/special.hpp"

namespace fiducial {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::domain_error(msg);
}

}  // namespace

OracleDistribution OracleDistribution::beta(double alpha, double beta) {
    require(alpha > 0.0 && beta > 0.0, "beta oracle: parameters must be positive");
    return {OracleKind::Beta, alpha, beta};
}

OracleDistribution OracleDistribution::gamma(double shape, double rate) {
    require(shape > 0.0 && rate > 0.0, "gamma oracle: parameters must be positive");
    return {OracleKind::Gamma, shape, rate};
}

OracleDistribution OracleDistribution::inverse_gamma(double shape, double scale) {
    require(shape > 0.0 && scale > 0.0, "inverse-gamma oracle: parameters must be positive");
    return {OracleKind::InverseGamma, shape, scale};
}

OracleDistribution OracleDistribution::normal(double mean, double sd) {
    require(sd > 0.0, "normal oracle: sd must be positive");
    return {OracleKind::Normal, mean, sd};
}

OracleDistribution OracleDistribution::pareto(double alpha, double scale) {
    require(alpha > 0.0 && scale > 0.0, "pareto oracle: parameters must be positive");
    return {OracleKind::Pareto, alpha, scale};
}

double OracleDistribution::cdf(double x) const {
    switch (kind_) {
        case OracleKind::Beta:
            return incomplete_beta_reg(p1_, p2_, std::clamp(x, 0.0, 1.0));
        case OracleKind::Gamma:
            return x <= 0.0 ? 0.0 : lower_gamma_reg(p1_, p2_ * x);
        case OracleKind::InverseGamma:
            return x <= 0.0 ? 0.0 : upper_gamma_reg(p1_, p2_ / x);
        case OracleKind::Normal:
            return normal_cdf((x - p1_) / p2_);
        case OracleKind::Pareto:
            return x <= p2_ ? 0.0 : 1.0 - std::pow(p2_ / x, p1_);
    }
    return 0.0;
}

double OracleDistribution::pdf(double x) const {
    switch (kind_) {
        case OracleKind::Beta:
            if (x <= 0.0 || x >= 1.0) return 0.0;
            return std::exp((p1_ - 1.0) * std::log(x) + (p2_ - 1.0) * std::log1p(-x) +
                            std::lgamma(p1_ + p2_) - std::lgamma(p1_) - std::lgamma(p2_));
        case OracleKind::Gamma:
            if (x <= 0.0) return 0.0;
            return std::exp(p1_ * std::log(p2_) + (p1_ - 1.0) * std::log(x) - p2_ * x -
                            std::lgamma(p1_));
        case OracleKind::InverseGamma:
            if (x <= 0.0) return 0.0;
            return std::exp(p1_ * std::log(p2_) - (p1_ + 1.0) * std::log(x) - p2_ / x -
                            std::lgamma(p1_));
        case OracleKind::Normal:
            return normal_pdf((x - p1_) / p2_) / p2_;
        case OracleKind::Pareto:
            if (x <= p2_) return 0.0;
            return p1_ * std::pow(p2_, p1_) / std::pow(x, p1_ + 1.0);
    }
    return 0.0;
}

double OracleDistribution::quantile(double p) const {
    require(p > 0.0 && p < 1.0, "oracle quantile: p must lie in (0,1)");
    switch (kind_) {
        case OracleKind::Beta:
            return beta_quantile_reg(p, p1_, p2_);
        case OracleKind::Gamma:
            return gamma_quantile_reg(p, p1_) / p2_;
        case OracleKind::InverseGamma:
            return p2_ / gamma_quantile_reg(1.0 - p, p1_);
        case OracleKind::Normal:
            return p1_ + p2_ * normal_quantile(p);
        case OracleKind::Pareto:
            return p2_ * std::pow(1.0 - p, -1.0 / p1_);
    }
    return 0.0;
}

double OracleDistribution::mean() const {
    switch (kind_) {
        case OracleKind::Beta: return p1_ / (p1_ + p2_);
        case OracleKind::Gamma: return p1_ / p2_;
        case OracleKind::InverseGamma:
            return p1_ > 1.0 ? p2_ / (p1_ - 1.0) : std::numeric_limits<double>::infinity();
        case OracleKind::Normal: return p1_;
        case OracleKind::Pareto:
            return p1_ > 1.0 ? p1_ * p2_ / (p1_ - 1.0) : std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

std::string OracleDistribution::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case OracleKind::Beta: os << "Beta(" << p1_ << ", " << p2_ << ")"; break;
        case OracleKind::Gamma: os << "Gamma(" << p1_ << ", rate " << p2_ << ")"; break;
        case OracleKind::InverseGamma: os << "InverseGamma(" << p1_ << ", " << p2_ << ")"; break;
        case OracleKind::Normal: os << "Normal(" << p1_ << ", sd " << p2_ << ")"; break;
        case OracleKind::Pareto: os << "Pareto(" << p1_ << ", scale " << p2_ << ")"; break;
    }
    return os.str();
}

OracleDistribution fisher_oracle(OracleFamily family, double t_n, std::int64_t n, double extra) {
    const double nd = static_cast<double>(n);
    switch (family) {
        case OracleFamily::Bernoulli:
            require(n >= 1 && t_n >= 0.0, "bernoulli oracle: need n >= 1 and t_n >= 0");
            require(t_n < nd, "bernoulli oracle: defined only for t_n < n");
            return OracleDistribution::beta(1.0 + t_n, nd - t_n);
        case OracleFamily::Poisson:
            require(n >= 1 && t_n >= 0.0, "poisson oracle: need n >= 1 and t_n >= 0");
            return OracleDistribution::gamma(1.0 + t_n, nd);
        case OracleFamily::Exponential:
            // t_n is the sample mean.
            require(n >= 1 && t_n > 0.0, "exponential oracle: need n >= 1 and t_n > 0");
            return OracleDistribution::inverse_gamma(nd, nd * t_n);
        case OracleFamily::Normal:
            require(n >= 1 && extra > 0.0, "normal oracle: need n >= 1 and sigma > 0");
            return OracleDistribution::normal(t_n, extra / std::sqrt(nd));
        case OracleFamily::Uniform:
            // t_n is the sample maximum.
            require(n >= 1 && t_n > 0.0, "uniform oracle: need n >= 1 and x_(n) > 0");
            return OracleDistribution::pareto(nd, t_n);
    }
    throw std::logic_error("unknown oracle family");
}

std::vector<double> bootstrap_fiducial(std::span<const double> theta_grid, std::int64_t t_n,
                                       std::int64_t n, std::int64_t B, std::uint64_t seed) {
    require(n >= 1 && B >= 1, "bootstrap_fiducial: need n >= 1 and B >= 1");
    require(t_n >= 0 && t_n < n, "bootstrap_fiducial: need 0 <= t_n < n");
    for (double th : theta_grid)
        require(th > 0.0 && th < 1.0, "bootstrap_fiducial: grid values must lie in (0,1)");
    std::vector<double> out(theta_grid.size());
    for (std::size_t g = 0; g < theta_grid.size(); ++g) {
        ChainStream stream(seed, g);
        const double theta = theta_grid[g];
        std::int64_t exceed = 0;
        for (std::int64_t b = 0; b < B; ++b) {
            std::int64_t count = 0;
            for (std::int64_t i = 0; i < n; ++i) count += stream.uniform01() < theta;
            exceed += count > t_n;
        }
        out[g] = static_cast<double>(exceed) / static_cast<double>(B);
    }
    return out;
}

std::vector<double> hannig_weibull_density(double x, std::span<const double> theta_grid) {
    require(x > 0.0, "hannig_weibull_density: x must be positive");
    require(x != 1.0, "hannig_weibull_density: not normalizable at x = 1");
    require(theta_grid.size() >= 2, "hannig_weibull_density: grid needs at least two points");
    const double lx = std::log(x);
    std::vector<double> vals(theta_grid.size());
    for (std::size_t i = 0; i < theta_grid.size(); ++i) {
        require(theta_grid[i] > 0.0, "hannig_weibull_density: grid values must be positive");
        if (i > 0)
            require(theta_grid[i] > theta_grid[i - 1],
                    "hannig_weibull_density: grid must be increasing");
        const double u = std::exp(theta_grid[i] * lx);  // x^theta
        vals[i] = u * std::exp(-u);
    }
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i)
        mass += 0.5 * (vals[i] + vals[i + 1]) * (theta_grid[i + 1] - theta_grid[i]);
    require(mass > 0.0, "hannig_weibull_density: grid carries no mass");
    for (double& v : vals) v /= mass;
    return vals;
}

double ks_distance(std::span<const double> samples, const OracleDistribution& oracle) {
    require(!samples.empty(), "ks_distance: samples must be nonempty");
    std::vector<double> xs(samples.begin(), samples.end());
    for (double v : xs)
        if (std::isnan(v)) throw std::domain_error("ks_distance: NaN in samples");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = oracle.cdf(xs[i]);
        d = std::max(d, std::fabs((i + 1.0) / n - F));
        d = std::max(d, std::fabs(F - i / n));
    }
    return d;
}

double ks_distance_two_sample(std::span<const double> a, std::span<const double> b) {
    require(!a.empty() && !b.empty(), "ks_distance_two_sample: samples must be nonempty");
    std::vector<double> xs(a.begin(), a.end()), ys(b.begin(), b.end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    const double na = static_cast<double>(xs.size()), nb = static_cast<double>(ys.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < xs.size() && j < ys.size()) {
        const double x = std::min(xs[i], ys[j]);
        while (i < xs.size() && xs[i] <= x) ++i;
        while (j < ys.size() && ys[j] <= x) ++j;
        d = std::max(d, std::fabs(i / na - j / nb));
    }
    return d;
}

}  // namespace fiducial
