#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fiducial/models.hpp"
#include "fiducial/rng.hpp"

// Generic chain runner: advances any model's update rule from the observed
// statistic at index n to the horizon N, with deterministic per-chain
// seeding so results never depend on the worker count.
namespace fiducial {

struct ChainState {
    std::int64_t m = 0;
    std::vector<double> value;
};

struct CoordinateSummary {
    double mean = 0, sd = 0, q025 = 0, q25 = 0, q50 = 0, q75 = 0, q975 = 0;
};

struct SampleSet {
    std::string model;
    std::int64_t n = 0;
    std::vector<double> t_n;
    std::int64_t N = 0;
    std::int64_t B = 0;
    std::uint64_t master_seed = 0;
    std::size_t dim = 0;
    std::vector<std::string> coordinate_names;
    std::vector<double> samples;  // B x dim, row-major
    std::vector<CoordinateSummary> summaries;
    std::int64_t clamp_events = 0;
    double trailing_increment_sup = 0.0;

    std::span<const double> row(std::int64_t b) const {
        return {samples.data() + static_cast<std::size_t>(b) * dim, dim};
    }
    std::vector<double> column(std::size_t j) const;
};

struct DiagnosticsReport {
    std::vector<std::int64_t> ms;
    // Kakutani: term (1 - a_m) and its running sum.
    std::vector<double> kakutani_terms, kakutani_partial;
    // Convergence series: per-coordinate conditional first and second moments
    // of g_m along a trajectory, with running sums.
    std::vector<std::vector<double>> mean_terms, mean_partial, sq_terms, sq_partial;
    double increment_sup = 0.0;
};

// NaN/Inf after an update, or other numeric breakdown; carries the index.
struct NumericError : std::runtime_error {
    NumericError(const std::string& what, std::int64_t m_) : std::runtime_error(what), m(m_) {}
    std::int64_t m;
};

// One or more chains of a sample_fiducial call failed.
struct ChainFailure : std::runtime_error {
    ChainFailure(const std::string& what, std::int64_t first_chain_, std::int64_t failures_)
        : std::runtime_error(what), first_chain(first_chain_), failures(failures_) {}
    std::int64_t first_chain;
    std::int64_t failures;
};

// Single update T_{m+1} = H_m(T_m, z); pure in its inputs.
ChainState step(const ModelSpec& model, const ChainState& state, double z, std::int64_t m);

struct RunOptions {
    bool record_trajectory = false;
    int trailing_window = 50;
};

struct RunResult {
    ChainState terminal;
    std::vector<ChainState> trajectory;  // N - n + 1 states when recorded
    double trailing_increment_sup = 0.0;
    std::int64_t clamp_events = 0;
};

double draw_innovation(const ModelSpec& model, ChainStream& stream);

RunResult run_chain(const ModelSpec& model, const ChainState& t_n, std::int64_t N,
                    ChainStream& stream, const RunOptions& options = {});
RunResult run_chain(const ModelSpec& model, const ChainState& t_n, std::int64_t N,
                    std::uint64_t master_seed, std::uint64_t chain_index = 0,
                    const RunOptions& options = {});

struct SampleOptions {
    int workers = 0;  // 0: FIDUCIAL_WORKERS env var, else hardware concurrency
    int trailing_window = 50;
    // Optional reduction of the terminal state (used for grid-valued chains);
    // must be thread-safe. Empty: store the state as-is.
    std::function<std::vector<double>(const ChainState&)> projection;
    std::vector<std::string> projection_names;
};

SampleSet sample_fiducial(const ModelSpec& model, const ChainState& t_n, std::int64_t N,
                          std::int64_t B, std::uint64_t master_seed,
                          const SampleOptions& options = {});

// Sum of 1/m^2 for m > n, to 1e-12 relative accuracy: explicit partial sum up
// to an index M plus the telescoping-bracket midpoint (1/M + 1/(M+1))/2, with
// M chosen so the bracket width 1/(M(M+1)) is below tolerance.
double tail_sum_inverse_squares(std::int64_t n, double rel_tol = 1e-12);
// Sum of 1/m^2 for m in [lo, hi].
double partial_sum_inverse_squares(std::int64_t lo, std::int64_t hi);

// One-shot sampler for the known-sigma normal model: t_n + sigma * z * sqrt(tail sum).
double normal_closed_form_sample(double t_n, double sigma, std::int64_t n, double z);
std::vector<double> sample_normal_closed_form(double t_n, double sigma, std::int64_t n,
                                              std::int64_t B, std::uint64_t master_seed);

// Mean of sqrt of the normalized one-step factor (Kakutani a_m).
double uniform1_kakutani_am(std::int64_t m);            // closed form
double exponential_kakutani_am(std::int64_t m);         // adaptive quadrature

// Partial sums of (1 - a_m) for m = n..M; exponential and uniform1 only.
DiagnosticsReport kakutani_diagnostic(const ModelSpec& model, std::int64_t n, std::int64_t M);

// Conditional-moment series of g_m along a trajectory, analytic where the
// model provides closed forms, otherwise by inner Monte Carlo over z.
DiagnosticsReport convergence_series_diagnostic(const ModelSpec& model,
                                             std::span<const ChainState> trajectory,
                                             std::int64_t M, int mc_draws = 10000,
                                             std::uint64_t mc_seed = 0x5EED5EEDull);

int default_workers();
std::vector<CoordinateSummary> summarize(std::span<const double> samples, std::size_t dim);
double sorted_quantile(std::span<const double> sorted, double p);

}  // namespace fiducial
