#include <doctest.h>

#include <cmath>
#include <vector>

#include "fiducial/engine.hpp"

using namespace fiducial;

namespace {

// Fixed-panel Simpson rule, used as an independent quadrature oracle.
template <typename F>
double simpson(F&& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double acc = f(a) + f(b);
    for (int i = 1; i < panels; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("step dispatch matches the model rules") {
    const auto gamma = ModelSpec::gamma(2.0);
    ChainState s{10, {1.0}};
    const auto out = step(gamma, s, 2.0, 10);
    CHECK(out.m == 11);
    CHECK(out.value[0] == doctest::Approx(1.0));  // z = a fixed point

    const auto normal = ModelSpec::normal(1.0);
    CHECK(step(normal, {9, {0.3}}, 0.0, 9).value[0] == doctest::Approx(0.3));

    const auto expo = ModelSpec::exponential();
    CHECK(step(expo, {5, {2.0}}, 0.0, 5).value[0] == doctest::Approx(2.0 * 5.0 / 6.0));

    CHECK_THROWS_AS(step(normal, {9, {0.3}}, 0.0, 8), std::invalid_argument);
}

TEST_CASE("step reports numeric breakdown instead of propagating inf") {
    const auto normal = ModelSpec::normal(1e308);
    CHECK_THROWS_AS(step(normal, {1, {1.5e308}}, 4.0, 1), NumericError);
    const auto expo = ModelSpec::exponential();
    const double nan = std::nan("");
    CHECK_THROWS_AS(step(expo, {5, {nan}}, 0.2, 5), std::invalid_argument);
}

TEST_CASE("run_chain is seed-deterministic") {
    const auto model = ModelSpec::exponential();
    const ChainState start{50, {1.0}};
    const auto a = run_chain(model, start, 300, 42, 3);
    const auto b = run_chain(model, start, 300, 42, 3);
    CHECK(a.terminal.value[0] == b.terminal.value[0]);
    CHECK(a.terminal.m == 300);
    const auto c = run_chain(model, start, 300, 42, 4);
    CHECK(a.terminal.value[0] != c.terminal.value[0]);
}

TEST_CASE("run_chain composes the recursion") {
    // Capture the z stream, then recompose the three normal updates by hand.
    const std::int64_t n = 9;
    const double sigma = 1.3, t0 = 0.25;
    ChainStream capture(77, 0);
    const double z0 = capture.normal();
    const double z1 = capture.normal();
    const double z2 = capture.normal();
    const double expected =
        t0 + sigma * (z0 / (n + 1.0) + z1 / (n + 2.0) + z2 / (n + 3.0));

    const auto model = ModelSpec::normal(sigma);
    const auto run = run_chain(model, {n, {t0}}, n + 3, 77, 0, {.record_trajectory = true});
    CHECK(run.terminal.value[0] == doctest::Approx(expected).epsilon(1e-15));
    CHECK(run.trajectory.size() == 4);
    CHECK(run.trajectory.front().m == n);
    CHECK(run.trajectory.back().m == n + 3);
}

TEST_CASE("sample_fiducial agrees with run_chain at B=1 and ignores worker count") {
    const auto model = ModelSpec::gamma(1.7);
    const ChainState start{30, {2.0}};
    const auto single = run_chain(model, start, 200, 99, 0);
    SampleOptions one_worker;
    one_worker.workers = 1;
    const auto set1 = sample_fiducial(model, start, 200, 1, 99, one_worker);
    CHECK(set1.samples[0] == single.terminal.value[0]);

    SampleOptions three_workers;
    three_workers.workers = 3;
    const auto set_a = sample_fiducial(model, start, 200, 257, 99, one_worker);
    const auto set_b = sample_fiducial(model, start, 200, 257, 99, three_workers);
    CHECK(set_a.samples == set_b.samples);
    CHECK(set_a.summaries[0].mean == set_b.summaries[0].mean);
}

TEST_CASE("summaries are recomputable from the stored samples") {
    const auto model = ModelSpec::exponential();
    const auto set = sample_fiducial(model, {40, {1.0}}, 300, 500, 7, {});
    const auto again = summarize(set.samples, set.dim);
    CHECK(again[0].mean == set.summaries[0].mean);
    CHECK(again[0].sd == set.summaries[0].sd);
    CHECK(again[0].q50 == set.summaries[0].q50);
}

TEST_CASE("tail sum of inverse squares") {
    SUBCASE("n=1 against the direct-summation oracle") {
        // Oracle: 1e8 explicit terms plus the telescoping bracket midpoint.
        double sum = 0.0, comp = 0.0;
        const std::int64_t M = 100000000;
        for (std::int64_t m = M; m >= 2; --m) {
            const double v = 1.0 / (static_cast<double>(m) * static_cast<double>(m));
            const double t = sum + v;
            comp += std::fabs(sum) >= v ? (sum - t) + v : (v - t) + sum;
            sum = t;
        }
        const double oracle =
            sum + comp + 0.5 * (1.0 / static_cast<double>(M) + 1.0 / static_cast<double>(M + 1));
        CHECK(tail_sum_inverse_squares(1) == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(tail_sum_inverse_squares(1) == doctest::Approx(0.6449340668482264).epsilon(1e-12));
    }
    SUBCASE("telescoping bounds and monotonicity") {
        for (std::int64_t n : {1, 2, 10, 50, 1000}) {
            const double v = tail_sum_inverse_squares(n);
            CHECK(v > 1.0 / (n + 1.0));
            CHECK(v < 1.0 / n);
            CHECK(tail_sum_inverse_squares(n + 1) < v);
        }
    }
    SUBCASE("partial sums agree with tail differences") {
        const double partial = partial_sum_inverse_squares(51, 2050);
        CHECK(partial ==
              doctest::Approx(tail_sum_inverse_squares(50) - tail_sum_inverse_squares(2050))
                  .epsilon(1e-10));
    }
}

TEST_CASE("closed-form normal sampler") {
    CHECK(normal_closed_form_sample(0.7, 2.0, 50, 0.0) == doctest::Approx(0.7));
    CHECK(normal_closed_form_sample(1.0, 2.0, 50, 1.0) ==
          doctest::Approx(1.0 + 2.0 * std::sqrt(tail_sum_inverse_squares(50))).epsilon(1e-14));
    const auto draws = sample_normal_closed_form(0.0, 1.0, 50, 3, 5);
    ChainStream s(5, 1);
    CHECK(draws[1] == doctest::Approx(std::sqrt(tail_sum_inverse_squares(50)) * s.normal()));
}

TEST_CASE("kakutani diagnostics") {
    SUBCASE("uniform closed form respects the telescoping bound") {
        const auto report = kakutani_diagnostic(ModelSpec::uniform1(), 10, 500);
        for (std::size_t i = 0; i < report.ms.size(); ++i) {
            const double m = static_cast<double>(report.ms[i]);
            CHECK(report.kakutani_terms[i] >= 0.0);
            CHECK(report.kakutani_terms[i] <= 0.5 * (1.0 / m - 1.0 / (m + 1.0)) + 1e-15);
            if (i > 0) CHECK(report.kakutani_partial[i] >= report.kakutani_partial[i - 1]);
        }
    }
    SUBCASE("exponential a_m against an independent quadrature") {
        for (std::int64_t m : {5, 50, 500}) {
            const double md = static_cast<double>(m);
            const double integral = simpson(
                [md](double z) { return std::exp(-z) * std::sqrt(1.0 + z / md); }, 0.0, 60.0,
                20000);
            const double oracle = std::sqrt(md / (md + 1.0)) * integral;
            CHECK(std::fabs(exponential_kakutani_am(m) - oracle) < 1e-9);
        }
    }
    SUBCASE("exponential partial sums stabilize when M doubles") {
        const auto r1 = kakutani_diagnostic(ModelSpec::exponential(), 50, 5000);
        const auto r2 = kakutani_diagnostic(ModelSpec::exponential(), 50, 10000);
        CHECK(r2.kakutani_partial.back() - r1.kakutani_partial.back() < 1e-4);
        CHECK(r2.kakutani_partial.back() >= r1.kakutani_partial.back());
    }
    SUBCASE("unsupported family") {
        CHECK_THROWS_AS(kakutani_diagnostic(ModelSpec::normal(1.0), 10, 100),
                        std::invalid_argument);
    }
}

TEST_CASE("series diagnostics") {
    SUBCASE("analytic moments along a mean-variance trajectory") {
        const auto model = ModelSpec::normal_mean_var();
        const auto run = run_chain(model, {10, {0.0, 1.0}}, 20, 3, 0, {.record_trajectory = true});
        const auto report = convergence_series_diagnostic(model, run.trajectory, 20);
        REQUIRE(report.ms.size() == 10);
        for (std::size_t i = 0; i < report.ms.size(); ++i) {
            const double m = static_cast<double>(report.ms[i]);
            const double t2 = run.trajectory[i].value[1];
            CHECK(report.mean_terms[0][i] == 0.0);
            CHECK(report.mean_terms[1][i] == doctest::Approx(-t2 / (m * (m + 1.0))));
            CHECK(report.sq_terms[0][i] == doctest::Approx(t2 / ((m + 1.0) * (m + 1.0))));
            if (i > 0) {
                CHECK(report.sq_partial[0][i] >= report.sq_partial[0][i - 1]);
                CHECK(report.sq_partial[1][i] >= report.sq_partial[1][i - 1]);
            }
        }
    }
    SUBCASE("monte-carlo fallback approaches the quadrature value") {
        const auto model = ModelSpec::exponential();
        const auto run = run_chain(model, {30, {1.0}}, 32, 4, 0, {.record_trajectory = true});
        const auto report = convergence_series_diagnostic(model, run.trajectory, 32, 40000);
        const double expected = simpson(
            [](double z) { return std::exp(-z) * std::log((30.0 + z) / 31.0); }, 0.0, 60.0,
            20000);
        CHECK(std::fabs(report.mean_terms[0][0] - expected) < 1.5e-3);
    }
    SUBCASE("copula is not supported") {
        const auto model = ModelSpec::copula_df({0.0, 1.0, 2.0}, 0.5);
        std::vector<ChainState> traj{{3, {0.1, 0.5, 0.9}}, {4, {0.1, 0.5, 0.9}}};
        CHECK_THROWS_AS(convergence_series_diagnostic(model, traj, 4), std::invalid_argument);
    }
}

TEST_CASE("martingale families have centered one-step increments") {
    struct Case {
        ModelSpec model;
        std::vector<double> state;
        std::int64_t m;
    };
    const std::vector<Case> cases{
        {ModelSpec::normal(1.3), {0.4}, 17},
        {ModelSpec::gamma(2.2), {1.5}, 23},
        {ModelSpec::exponential(), {0.8}, 31},
        {ModelSpec::weibull(), {2.5}, 41},
    };
    for (const auto& c : cases) {
        ChainStream stream(123, 0);
        double sum = 0.0, sumsq = 0.0;
        const int reps = 100000;
        std::vector<double> out(c.state.size());
        for (int i = 0; i < reps; ++i) {
            const double z = draw_innovation(c.model, stream);
            apply_step(c.model, c.state, z, c.m, out);
            const double inc = out[0] - c.state[0];
            sum += inc;
            sumsq += inc * inc;
        }
        const double mean = sum / reps;
        const double se = std::sqrt((sumsq / reps - mean * mean) / reps);
        INFO("family ", c.model.family_name());
        CHECK(std::fabs(mean) < 4.0 * se);
    }
}

TEST_CASE("horizon stability: doubling N moves the mean by noise only") {
    struct Case {
        ModelSpec model;
        std::vector<double> state;
    };
    const std::vector<Case> cases{
        {ModelSpec::normal(1.0), {0.0}},
        {ModelSpec::exponential(), {1.0}},
        {ModelSpec::gamma(2.0), {1.0}},
        {ModelSpec::weibull(), {3.0}},
        {ModelSpec::uniform1(), {1.0}},
        {ModelSpec::normal_mean_var(), {0.0, 1.0}},
        {ModelSpec::uniform2(), {0.3, 1.0}},
    };
    const std::int64_t n = 60, B = 2000;
    for (const auto& c : cases) {
        const auto a = sample_fiducial(c.model, {n, c.state}, n + 1000, B, 2024, {});
        const auto b = sample_fiducial(c.model, {n, c.state}, n + 2000, B, 4048, {});
        for (std::size_t j = 0; j < a.dim; ++j) {
            const double se = std::hypot(a.summaries[j].sd, b.summaries[j].sd) / std::sqrt(B);
            INFO("family ", c.model.family_name(), " coord ", j);
            CHECK(std::fabs(a.summaries[j].mean - b.summaries[j].mean) < 3.0 * se);
        }
    }

    SUBCASE("copula mean functional, reduced scale") {
        const int G = 64;
        std::vector<double> xs(G), Fs(G);
        for (int i = 0; i < G; ++i) {
            xs[i] = -4.0 + 8.0 * i / (G - 1.0);
            Fs[i] = 0.5 * (1.0 + std::tanh(xs[i]));
        }
        const auto model = ModelSpec::copula_df(xs, 0.5);
        SampleOptions opts;
        opts.projection = [xs](const ChainState& s) {
            return std::vector<double>{df_functional(xs, s.value, Integrand::Mean)};
        };
        opts.projection_names = {"mean"};
        const auto a = sample_fiducial(model, {60, Fs}, 460, 200, 2024, opts);
        const auto b = sample_fiducial(model, {60, Fs}, 860, 200, 4048, opts);
        const double se = std::hypot(a.summaries[0].sd, b.summaries[0].sd) / std::sqrt(200.0);
        CHECK(std::fabs(a.summaries[0].mean - b.summaries[0].mean) < 3.0 * se);
    }
}

TEST_CASE("flagged chains abort the whole draw with context") {
    // A floor just below the start makes an early downward excursion flag.
    const auto model = ModelSpec::weibull(2.99999);
    bool thrown = false;
    try {
        sample_fiducial(model, {50, {3.0}}, 1050, 8, 31337, {});
    } catch (const ChainFailure& e) {
        thrown = true;
        CHECK(e.failures >= 1);
        CHECK(e.first_chain >= 0);
        CHECK(std::string(e.what()).find("positivity floor") != std::string::npos);
    }
    CHECK(thrown);
}

TEST_CASE("initial states are validated") {
    const auto model = ModelSpec::exponential();
    CHECK_THROWS_AS(sample_fiducial(model, {50, {-1.0}}, 100, 10, 1, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_fiducial(model, {50, {1.0}}, 50, 10, 1, {}), std::invalid_argument);
    CHECK_THROWS_AS(sample_fiducial(model, {50, {1.0}}, 100, 0, 1, {}), std::invalid_argument);
}
