#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fiducial/engine.hpp"
#include "fiducial/rng.hpp"

// Nonlinear-regression fiducial sampler: dataset ingestion, squared-loss
// fit, Bayesian-bootstrap covariate streams, and the per-step parameter
// update driven by simulated responses.
namespace fiducial {

struct RegressionDataset {
    std::size_t n = 0, p = 0;
    std::vector<double> X;  // n x p, row-major; first column is the intercept when enabled
    std::vector<double> y;
    std::vector<std::string> columns;
    bool intercept = false;
    bool standardized = false;
    std::vector<double> col_min, col_max;  // per column; intercept column records (1,1)

    std::span<const double> row(std::size_t i) const { return {X.data() + i * p, p}; }
    // Maps a standardized covariate back to its original scale.
    double destandardize(std::size_t col, double v) const;
};

// Header row required; all referenced columns numeric. Parse errors report
// 1-based row and the offending column.
RegressionDataset load_regression_csv(const std::string& path, const std::string& response_column,
                                      bool standardize, bool intercept);
RegressionDataset make_regression_dataset(std::vector<double> X, std::vector<double> y,
                                          std::size_t p, std::vector<std::string> columns,
                                          bool standardize, bool intercept);

struct RegressionModel {
    std::function<double(std::span<const double> x, std::span<const double> theta)> mu;
    std::function<void(std::span<const double> x, std::span<const double> theta,
                       std::span<double> grad)> mu_grad;
    std::function<double(std::span<const double> x, std::span<const double> theta)> mu2;
    // Simulated response g(x, z, theta).
    std::function<double(std::span<const double> x, double z, std::span<const double> theta)>
        simulate;
    InnovationKind innovation = InnovationKind::Uniform01;
};

RegressionModel logistic_model();

// sqrt(mu2 - mu^2) * max_j |dmu/dtheta_j|; fills grad as a side effect.
double regression_phi(const RegressionModel& model, std::span<const double> x,
                      std::span<const double> theta, std::span<double> grad);

struct FitSettings {
    int max_iters = 20000;
    double grad_tol = 1e-8;
    double init_step = 1.0;
};

struct FitResult {
    std::vector<double> theta;
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0;
    double loss = 0.0;
};

// Minimizes the mean squared mu-loss by gradient descent with backtracking.
// Throws std::runtime_error if no descent direction survives a full
// backtracking sweep.
FitResult fit_least_squares(const RegressionDataset& data, const RegressionModel& model,
                            std::vector<double> init, const FitSettings& settings = {});

// One Dirichlet weight draw over the distinct covariate rows, then i.i.d.
// row draws from that weighted empirical law.
class BootstrapStream {
public:
    BootstrapStream(const RegressionDataset& data, ChainStream& stream);
    std::size_t draw_row_index(ChainStream& stream) const;  // index into the dataset
    std::span<const double> draw_row(ChainStream& stream) const;

    const std::vector<double>& weights() const { return weights_; }
    const std::vector<std::int64_t>& multiplicities() const { return multiplicities_; }
    std::size_t distinct_count() const { return weights_.size(); }

private:
    const RegressionDataset* data_;
    std::vector<std::size_t> representative_;  // dataset row index per distinct row
    std::vector<std::int64_t> multiplicities_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
};

// theta_{m+1,j} = theta_{m,j} - (Y - mu) mu'_j / ((m+1) phi). Throws
// FlaggedStep when phi is not strictly positive at the drawn design point.
std::vector<double> sgd_fiducial_step(std::span<const double> theta, std::span<const double> x,
                                      double z, std::int64_t m, const RegressionModel& model);

struct RegressionRunOptions {
    int workers = 0;
    // Draw a fresh bootstrap covariate instead of flagging a phi=0 design
    // point (off by default; consumes the stream deterministically).
    bool redraw_on_degenerate = false;
    int max_redraws = 1000;
};

SampleSet run_regression_fiducial(const RegressionDataset& data, const RegressionModel& model,
                                  std::span<const double> theta_hat, std::int64_t B,
                                  std::int64_t N, std::uint64_t master_seed,
                                  const RegressionRunOptions& options = {});

}  // namespace fiducial
