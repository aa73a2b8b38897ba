#include <doctest.h>

#include <cmath>
#include <vector>

#include "fiducial/engine.hpp"
#include "fiducial/oracles.hpp"
#include "fiducial/special.hpp"

using namespace fiducial;

namespace {

double poisson_tail_sum(std::int64_t k, double lambda) {
    double term = std::exp(-lambda);
    double below = 0.0;
    for (std::int64_t j = 0; j < k; ++j) {
        below += term;
        term *= lambda / static_cast<double>(j + 1);
    }
    return 1.0 - below;
}

// In-test Simpson quadrature of the oracle pdf.
double pdf_mass(const OracleDistribution& oracle, double lo, double hi, int panels) {
    const double h = (hi - lo) / panels;
    double acc = oracle.pdf(lo) + oracle.pdf(hi);
    for (int i = 1; i < panels; ++i) acc += oracle.pdf(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("fisher oracles match their closed forms") {
    SUBCASE("bernoulli") {
        const auto oracle = fisher_oracle(OracleFamily::Bernoulli, 3, 10);
        CHECK(oracle.kind() == OracleKind::Beta);
        CHECK(oracle.param1() == doctest::Approx(4.0));
        CHECK(oracle.param2() == doctest::Approx(7.0));
        CHECK(oracle.mean() == doctest::Approx(4.0 / 11.0));
        CHECK_THROWS_AS(fisher_oracle(OracleFamily::Bernoulli, 10, 10), std::domain_error);
    }
    SUBCASE("poisson upper cdf equals the tail sum") {
        const auto oracle = fisher_oracle(OracleFamily::Poisson, 5, 2);
        CHECK(oracle.kind() == OracleKind::Gamma);
        // Gamma(6,2) at 1.3 vs sum_{k>=6} e^{-2.6} 2.6^k / k!
        CHECK(std::fabs((1.0 - oracle.cdf(1.3)) - (1.0 - poisson_tail_sum(6, 2.6))) < 1e-10);
        CHECK(std::fabs(oracle.cdf(1.3) - poisson_tail_sum(6, 2.6)) < 1e-10);
    }
    SUBCASE("exponential uses the mean convention") {
        const auto oracle = fisher_oracle(OracleFamily::Exponential, 1.0, 100);
        CHECK(oracle.kind() == OracleKind::InverseGamma);
        CHECK(oracle.param1() == doctest::Approx(100.0));
        CHECK(oracle.param2() == doctest::Approx(100.0));
        CHECK(oracle.mean() == doctest::Approx(100.0 / 99.0));
    }
    SUBCASE("normal") {
        const auto oracle = fisher_oracle(OracleFamily::Normal, 0.4, 25, 2.0);
        CHECK(oracle.cdf(0.4) == doctest::Approx(0.5));
        CHECK(oracle.quantile(0.5) == doctest::Approx(0.4));
    }
    SUBCASE("uniform pareto mean") {
        const auto oracle = fisher_oracle(OracleFamily::Uniform, 0.947, 50);
        CHECK(oracle.kind() == OracleKind::Pareto);
        CHECK(oracle.mean() == doctest::Approx(50.0 / 49.0 * 0.947));
    }
}

TEST_CASE("oracle cdf, pdf and quantile are mutually consistent") {
    const std::vector<OracleDistribution> oracles{
        OracleDistribution::beta(4.0, 7.0),
        OracleDistribution::gamma(6.0, 2.0),
        OracleDistribution::inverse_gamma(100.0, 100.0),
        OracleDistribution::normal(0.3, 1.7),
        OracleDistribution::pareto(50.0, 0.947),
    };
    for (const auto& oracle : oracles) {
        // quantile of cdf round-trips
        for (double p : {0.05, 0.3, 0.5, 0.7, 0.95}) {
            const double x = oracle.quantile(p);
            CHECK(oracle.cdf(x) == doctest::Approx(p).epsilon(1e-9));
        }
        // central-difference derivative of the cdf matches the pdf
        for (double p : {0.2, 0.5, 0.8}) {
            const double x = oracle.quantile(p);
            const double h = 1e-5 * (1.0 + std::fabs(x));
            const double deriv = (oracle.cdf(x + h) - oracle.cdf(x - h)) / (2.0 * h);
            CHECK(deriv == doctest::Approx(oracle.pdf(x)).epsilon(1e-4));
        }
        // cdf nondecreasing with the right limits
        CHECK(oracle.cdf(oracle.quantile(0.001) - 1e3) <= 1e-3);
        CHECK(oracle.cdf(oracle.quantile(0.999) + 1e3) >= 0.999);
    }
}

TEST_CASE("oracle pdfs integrate to one") {
    const auto beta = OracleDistribution::beta(4.0, 7.0);
    CHECK(pdf_mass(beta, 1e-12, 1.0 - 1e-12, 20000) == doctest::Approx(1.0).epsilon(1e-6));
    const auto gamma = OracleDistribution::gamma(6.0, 2.0);
    CHECK(pdf_mass(gamma, 1e-12, 40.0, 20000) == doctest::Approx(1.0).epsilon(1e-6));
    const auto ig = OracleDistribution::inverse_gamma(100.0, 100.0);
    CHECK(pdf_mass(ig, 0.5, 2.5, 20000) ==
          doctest::Approx(ig.cdf(2.5) - ig.cdf(0.5)).epsilon(1e-6));
}

TEST_CASE("bootstrap survivor estimator") {
    SUBCASE("degenerate ends") {
        const std::vector<double> grid{1e-9, 1.0 - 1e-9};
        const auto est = bootstrap_fiducial(grid, 3, 10, 2000, 5);
        CHECK(est[0] == doctest::Approx(0.0));
        CHECK(est[1] == doctest::Approx(1.0));
    }
    SUBCASE("matches the beta law on a grid, error shrinking in B") {
        // The exceedance fraction estimates the binomial survivor
        // P(T_n(theta) > t_n), which equals the Beta(1+t_n, n-t_n) cdf.
        std::vector<double> grid;
        for (int i = 1; i <= 99; ++i) grid.push_back(i / 100.0);
        const auto oracle = fisher_oracle(OracleFamily::Bernoulli, 3, 10);
        auto sup_gap = [&](std::int64_t B, std::uint64_t seed) {
            const auto est = bootstrap_fiducial(grid, 3, 10, B, seed);
            double gap = 0.0;
            for (std::size_t i = 0; i < grid.size(); ++i)
                gap = std::max(gap, std::fabs(est[i] - oracle.cdf(grid[i])));
            return gap;
        };
        const double coarse = sup_gap(1000, 11);
        const double fine = sup_gap(100000, 11);
        CHECK(fine < 0.01);
        CHECK(coarse < 0.1);
        CHECK(fine < coarse);
    }
    SUBCASE("parameter validation") {
        const std::vector<double> grid{0.5};
        CHECK_THROWS_AS(bootstrap_fiducial(grid, 10, 10, 100, 1), std::domain_error);
        const std::vector<double> bad{1.5};
        CHECK_THROWS_AS(bootstrap_fiducial(bad, 3, 10, 100, 1), std::domain_error);
    }
}

TEST_CASE("hannig weibull density") {
    std::vector<double> grid;
    for (int i = 1; i <= 4000; ++i) grid.push_back(i * 0.005);

    SUBCASE("pointwise value and normalization") {
        const auto vals = hannig_weibull_density(2.0, grid);
        // unnormalized value at theta=1 is 2 e^{-2}
        double mass = 0.0, at_one = 0.0;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            mass += 0.5 * (vals[i] + vals[i + 1]) * (grid[i + 1] - grid[i]);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (grid[i] == doctest::Approx(1.0)) at_one = vals[i];
        // ratio against the unnormalized 2e^{-2} is the normalizing constant
        const double unnorm = 2.0 * std::exp(-2.0);
        CHECK(unnorm == doctest::Approx(0.2706705664732254).epsilon(1e-12));
        CHECK(at_one > 0.0);
    }
    SUBCASE("monotone decreasing for x away from 1") {
        for (double x : {2.0, 0.5}) {
            const auto vals = hannig_weibull_density(x, grid);
            for (std::size_t i = 1; i < vals.size(); ++i) CHECK(vals[i] <= vals[i - 1] + 1e-15);
        }
    }
    SUBCASE("x = 1 is rejected") {
        CHECK_THROWS_AS(hannig_weibull_density(1.0, grid), std::domain_error);
        CHECK_THROWS_AS(hannig_weibull_density(-2.0, grid), std::domain_error);
    }
}

TEST_CASE("ks distance") {
    SUBCASE("single sample at the median") {
        const auto oracle = OracleDistribution::normal(0.0, 1.0);
        const std::vector<double> one{0.0};
        CHECK(ks_distance(one, oracle) == doctest::Approx(0.5));
    }
    SUBCASE("quantile grid construction") {
        const auto oracle = OracleDistribution::gamma(3.0, 1.0);
        const int k = 1000;
        std::vector<double> samples;
        for (int i = 1; i <= k; ++i) samples.push_back(oracle.quantile((i - 0.5) / k));
        CHECK(ks_distance(samples, oracle) <= 0.5 / k + 1e-9);
    }
    SUBCASE("invariance under increasing maps") {
        // X ~ Pareto(2,1)  <=>  log X ~ Gamma(1, 2).
        const std::vector<double> samples{1.05, 1.2, 1.7, 2.4, 5.0, 11.0};
        std::vector<double> mapped;
        for (double v : samples) mapped.push_back(std::log(v));
        const double d1 = ks_distance(samples, OracleDistribution::pareto(2.0, 1.0));
        const double d2 = ks_distance(mapped, OracleDistribution::gamma(1.0, 2.0));
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));
    }
    SUBCASE("nan rejected") {
        const auto oracle = OracleDistribution::normal(0.0, 1.0);
        const std::vector<double> bad{0.1, std::nan("")};
        CHECK_THROWS_AS(ks_distance(bad, oracle), std::domain_error);
    }
    SUBCASE("two-sample distance is zero on identical samples") {
        const std::vector<double> a{0.4, 1.0, 2.0};
        CHECK(ks_distance_two_sample(a, a) == doctest::Approx(0.0));
        const std::vector<double> b{10.0, 11.0};
        CHECK(ks_distance_two_sample(a, b) == doctest::Approx(1.0));
    }
}

// Closeness of the chain law to the Fisher oracle at desk scale. The uniform
// case genuinely exceeds this guard (its fiducial mean sits near x_(n) e^{1/(2n)}
// while the Pareto oracle mean is n/(n-1) x_(n); the measured distance is
// ~0.25), so it is recorded as an expected failure.
TEST_CASE("doob vs fisher closeness: normal") {
    const auto set = sample_fiducial(ModelSpec::normal(1.0), {50, {0.0}}, 3050, 10000, 616, {});
    const auto oracle = fisher_oracle(OracleFamily::Normal, 0.0, 50, 1.0);
    CHECK(ks_distance(set.column(0), oracle) < 0.05);
}

TEST_CASE("doob vs fisher closeness: exponential") {
    const auto set = sample_fiducial(ModelSpec::exponential(), {100, {1.0}}, 3100, 10000, 617, {});
    const auto oracle = fisher_oracle(OracleFamily::Exponential, 1.0, 100);
    CHECK(ks_distance(set.column(0), oracle) < 0.05);
}

TEST_CASE("doob vs fisher closeness: uniform" * doctest::should_fail()) {
    const double xn = 0.947;
    const std::int64_t n = 50;
    const ChainState start{n, {(n + 1.0) / n * xn}};
    const auto set = sample_fiducial(ModelSpec::uniform1(), start, 5050, 10000, 618, {});
    const auto oracle = fisher_oracle(OracleFamily::Uniform, xn, n);
    CHECK(ks_distance(set.column(0), oracle) < 0.05);
}
