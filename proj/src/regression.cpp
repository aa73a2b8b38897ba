#include "fiducial/regression.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace fiducial {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) {
        while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
        std::size_t start = 0;
        while (start < field.size() && field[start] == ' ') ++start;
        out.push_back(field.substr(start));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("csv: non-numeric cell at row " + std::to_string(row) +
                                 ", column '" + column + "': '" + cell + "'");
    }
}

void standardize_columns(RegressionDataset& data) {
    data.col_min.assign(data.p, 0.0);
    data.col_max.assign(data.p, 1.0);
    for (std::size_t j = 0; j < data.p; ++j) {
        if (data.intercept && j == 0) {
            data.col_min[j] = data.col_max[j] = 1.0;
            continue;
        }
        double lo = data.X[j], hi = data.X[j];
        for (std::size_t i = 1; i < data.n; ++i) {
            lo = std::min(lo, data.X[i * data.p + j]);
            hi = std::max(hi, data.X[i * data.p + j]);
        }
        if (lo == hi)
            throw std::runtime_error("csv: column '" + data.columns[j] +
                                     "' is constant; min-max standardization undefined");
        data.col_min[j] = lo;
        data.col_max[j] = hi;
        for (std::size_t i = 0; i < data.n; ++i) {
            double& v = data.X[i * data.p + j];
            v = (v - lo) / (hi - lo);
        }
    }
    data.standardized = true;
}

struct LossAndGrad {
    double loss;
    std::vector<double> grad;
};

LossAndGrad loss_and_grad(const RegressionDataset& data, const RegressionModel& model,
                          std::span<const double> theta) {
    const std::size_t d = theta.size();
    LossAndGrad out{0.0, std::vector<double>(d, 0.0)};
    std::vector<double> grad_mu(d);
    for (std::size_t i = 0; i < data.n; ++i) {
        const auto x = data.row(i);
        const double resid = data.y[i] - model.mu(x, theta);
        out.loss += resid * resid;
        model.mu_grad(x, theta, grad_mu);
        for (std::size_t j = 0; j < d; ++j) out.grad[j] -= 2.0 * resid * grad_mu[j];
    }
    const double inv_n = 1.0 / static_cast<double>(data.n);
    out.loss *= inv_n;
    for (double& g : out.grad) g *= inv_n;
    return out;
}

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace

double RegressionDataset::destandardize(std::size_t col, double v) const {
    if (!standardized) return v;
    return col_min[col] + v * (col_max[col] - col_min[col]);
}

RegressionDataset make_regression_dataset(std::vector<double> X, std::vector<double> y,
                                          std::size_t p, std::vector<std::string> columns,
                                          bool standardize, bool intercept) {
    if (y.empty() || X.size() != y.size() * p || (p == 0 && !intercept))
        throw std::invalid_argument("make_regression_dataset: inconsistent shapes");
    RegressionDataset data;
    data.n = y.size();
    data.intercept = intercept;
    if (intercept) {
        data.p = p + 1;
        data.columns.reserve(p + 1);
        data.columns.emplace_back("intercept");
        for (auto& c : columns) data.columns.push_back(std::move(c));
        data.X.resize(data.n * data.p);
        for (std::size_t i = 0; i < data.n; ++i) {
            data.X[i * data.p] = 1.0;
            for (std::size_t j = 0; j < p; ++j) data.X[i * data.p + 1 + j] = X[i * p + j];
        }
    } else {
        data.p = p;
        data.columns = std::move(columns);
        data.X = std::move(X);
    }
    data.y = std::move(y);
    data.col_min.assign(data.p, 0.0);
    data.col_max.assign(data.p, 1.0);
    if (standardize) standardize_columns(data);
    return data;
}

RegressionDataset load_regression_csv(const std::string& path, const std::string& response_column,
                                      bool standardize, bool intercept) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: empty file '" + path + "'");
    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty()) throw std::runtime_error("csv: empty header in '" + path + "'");

    std::size_t response_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == response_column) response_idx = j;
    if (response_idx == header.size())
        throw std::runtime_error("csv: response column '" + response_column + "' not found");

    std::vector<std::string> covariate_names;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != response_idx) covariate_names.push_back(header[j]);

    std::vector<double> X, y;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::runtime_error("csv: row " + std::to_string(row) + " has " +
                                     std::to_string(cells.size()) + " fields, expected " +
                                     std::to_string(header.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const double v = parse_cell(cells[j], row, header[j]);
            if (j == response_idx)
                y.push_back(v);
            else
                X.push_back(v);
        }
    }
    if (y.empty()) throw std::runtime_error("csv: no data rows in '" + path + "'");
    const std::size_t p = covariate_names.size();
    return make_regression_dataset(std::move(X), std::move(y), p, std::move(covariate_names),
                                   standardize, intercept);
}

RegressionModel logistic_model() {
    RegressionModel model;
    model.mu = [](std::span<const double> x, std::span<const double> th) {
        double lin = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) lin += x[j] * th[j];
        return 1.0 / (1.0 + std::exp(-lin));
    };
    model.mu_grad = [](std::span<const double> x, std::span<const double> th,
                       std::span<double> grad) {
        double lin = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) lin += x[j] * th[j];
        const double p = 1.0 / (1.0 + std::exp(-lin));
        const double w = p * (1.0 - p);  // e^l / (1+e^l)^2
        for (std::size_t j = 0; j < x.size(); ++j) grad[j] = x[j] * w;
    };
    model.mu2 = [m = model.mu](std::span<const double> x, std::span<const double> th) {
        return m(x, th);  // binary response
    };
    model.simulate = [m = model.mu](std::span<const double> x, double z,
                                    std::span<const double> th) {
        return z < m(x, th) ? 1.0 : 0.0;
    };
    model.innovation = InnovationKind::Uniform01;
    return model;
}

double regression_phi(const RegressionModel& model, std::span<const double> x,
                      std::span<const double> theta, std::span<double> grad) {
    const double mu = model.mu(x, theta);
    const double mu2 = model.mu2(x, theta);
    model.mu_grad(x, theta, grad);
    const double grad_max = inf_norm(grad);
    const double var = mu2 - mu * mu;
    return var > 0.0 ? std::sqrt(var) * grad_max : 0.0;
}

FitResult fit_least_squares(const RegressionDataset& data, const RegressionModel& model,
                            std::vector<double> init, const FitSettings& settings) {
    if (init.size() != data.p)
        throw std::invalid_argument("fit_least_squares: init has wrong dimension");
    for (double v : init)
        if (!std::isfinite(v)) throw std::invalid_argument("fit_least_squares: init not finite");

    FitResult result;
    result.theta = std::move(init);
    double step = settings.init_step;
    auto cur = loss_and_grad(data, model, result.theta);
    std::vector<double> trial(data.p);
    for (int iter = 0; iter < settings.max_iters; ++iter) {
        result.grad_norm = inf_norm(cur.grad);
        if (result.grad_norm < settings.grad_tol) {
            result.converged = true;
            result.iterations = iter;
            result.loss = cur.loss;
            return result;
        }
        double grad_sq = 0.0;
        for (double g : cur.grad) grad_sq += g * g;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            for (std::size_t j = 0; j < data.p; ++j)
                trial[j] = result.theta[j] - step * cur.grad[j];
            const auto cand = loss_and_grad(data, model, trial);
            if (cand.loss <= cur.loss - 1e-4 * step * grad_sq) {
                result.theta = trial;
                cur = cand;
                step = std::min(step * 1.5, 1e6);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted)
            throw std::runtime_error(
                "fit_least_squares: loss failed to decrease across a full backtracking sweep");
    }
    result.iterations = settings.max_iters;
    result.converged = false;
    result.grad_norm = inf_norm(cur.grad);
    result.loss = cur.loss;
    return result;
}

BootstrapStream::BootstrapStream(const RegressionDataset& data, ChainStream& stream)
    : data_(&data) {
    if (data.n == 0) throw std::invalid_argument("BootstrapStream: empty dataset");
    // Distinct covariate rows in increasing lexicographic order.
    std::vector<std::size_t> order(data.n);
    std::iota(order.begin(), order.end(), 0);
    auto row_less = [&](std::size_t a, std::size_t b) {
        const auto ra = data.row(a), rb = data.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    };
    std::sort(order.begin(), order.end(), row_less);
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i == 0 || row_less(order[i - 1], order[i])) {
            representative_.push_back(order[i]);
            multiplicities_.push_back(1);
        } else {
            ++multiplicities_.back();
        }
    }
    // One Dirichlet(n_1, ..., n_k) draw per chain.
    weights_.resize(representative_.size());
    double total = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        weights_[j] = stream.gamma(static_cast<double>(multiplicities_[j]));
        total += weights_[j];
    }
    cumulative_.resize(weights_.size());
    double running = 0.0;
    for (std::size_t j = 0; j < weights_.size(); ++j) {
        weights_[j] /= total;
        running += weights_[j];
        cumulative_[j] = running;
    }
    cumulative_.back() = 1.0;
}

std::size_t BootstrapStream::draw_row_index(ChainStream& stream) const {
    const double u = stream.uniform01();
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    const std::size_t j = std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
    return representative_[j];
}

std::span<const double> BootstrapStream::draw_row(ChainStream& stream) const {
    return data_->row(draw_row_index(stream));
}

std::vector<double> sgd_fiducial_step(std::span<const double> theta, std::span<const double> x,
                                      double z, std::int64_t m, const RegressionModel& model) {
    std::vector<double> grad(theta.size());
    const double phi = regression_phi(model, x, theta, grad);
    if (!(phi > 0.0)) {
        std::ostringstream os;
        os << "sgd_fiducial_step: degenerate design point (phi=0) at m=" << m << ", x=(";
        for (std::size_t j = 0; j < x.size(); ++j) os << (j ? "," : "") << x[j];
        os << ")";
        throw FlaggedStep(os.str(), m, std::vector<double>(theta.begin(), theta.end()), z);
    }
    const double resid = model.simulate(x, z, theta) - model.mu(x, theta);
    const double scale = resid / (static_cast<double>(m + 1) * phi);
    std::vector<double> out(theta.begin(), theta.end());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] -= scale * grad[j];
    return out;
}

SampleSet run_regression_fiducial(const RegressionDataset& data, const RegressionModel& model,
                                  std::span<const double> theta_hat, std::int64_t B,
                                  std::int64_t N, std::uint64_t master_seed,
                                  const RegressionRunOptions& options) {
    if (theta_hat.size() != data.p)
        throw std::invalid_argument("run_regression_fiducial: theta has wrong dimension");
    for (double v : theta_hat)
        if (!std::isfinite(v))
            throw std::invalid_argument("run_regression_fiducial: theta not finite");
    const auto n = static_cast<std::int64_t>(data.n);
    if (N <= n) throw std::invalid_argument("run_regression_fiducial: N must exceed n");
    if (B < 1) throw std::invalid_argument("run_regression_fiducial: B must be >= 1");

    SampleSet set;
    set.model = "regression";
    set.n = n;
    set.t_n.assign(theta_hat.begin(), theta_hat.end());
    set.N = N;
    set.B = B;
    set.master_seed = master_seed;
    set.dim = data.p;
    set.coordinate_names.reserve(data.p);
    for (const auto& c : data.columns) set.coordinate_names.push_back("coef_" + c);
    set.samples.assign(static_cast<std::size_t>(B) * set.dim, 0.0);

    const int workers = options.workers > 0 ? options.workers : default_workers();
    std::mutex agg_mutex;
    std::int64_t failures = 0;
    std::int64_t first_chain = -1;
    std::string first_message;

    const std::int64_t total = B;
    std::atomic<std::int64_t> counter{0};
    std::vector<std::thread> pool;
    auto run_block = [&](std::int64_t b) {
        try {
            ChainStream stream(master_seed, static_cast<std::uint64_t>(b));
            BootstrapStream bootstrap(data, stream);
            std::vector<double> theta(theta_hat.begin(), theta_hat.end());
            std::vector<double> grad(data.p);
            for (std::int64_t m = n; m < N; ++m) {
                std::span<const double> x = bootstrap.draw_row(stream);
                if (options.redraw_on_degenerate) {
                    int tries = 0;
                    while (!(regression_phi(model, x, theta, grad) > 0.0)) {
                        if (++tries > options.max_redraws)
                            throw FlaggedStep("run_regression_fiducial: no nondegenerate design "
                                              "point after redraws",
                                              m, theta, 0.0);
                        x = bootstrap.draw_row(stream);
                    }
                }
                double z = 0.0;
                switch (model.innovation) {
                    case InnovationKind::Uniform01: z = stream.uniform01(); break;
                    case InnovationKind::StdNormal: z = stream.normal(); break;
                    case InnovationKind::StdExponential: z = stream.exponential(); break;
                    case InnovationKind::GammaShape:
                        throw std::invalid_argument(
                            "run_regression_fiducial: unsupported innovation kind");
                }
                theta = sgd_fiducial_step(theta, x, z, m, model);
                for (double v : theta)
                    if (!std::isfinite(v))
                        throw NumericError("regression: non-finite parameter after step", m);
            }
            std::copy(theta.begin(), theta.end(),
                      set.samples.begin() + static_cast<std::size_t>(b) * set.dim);
        } catch (const std::exception& e) {
            std::lock_guard lock(agg_mutex);
            ++failures;
            if (first_chain < 0 || b < first_chain) {
                first_chain = b;
                first_message = e.what();
            }
        }
    };
    const int pool_size = std::max(1, workers);
    const std::int64_t block = std::max<std::int64_t>(1, total / (8 * pool_size));
    auto worker = [&] {
        for (;;) {
            const std::int64_t begin = counter.fetch_add(block);
            if (begin >= total) return;
            const std::int64_t end = std::min(total, begin + block);
            for (std::int64_t b = begin; b < end; ++b) run_block(b);
        }
    };
    if (pool_size == 1) {
        worker();
    } else {
        pool.reserve(pool_size);
        for (int w = 0; w < pool_size; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    if (failures > 0) {
        std::ostringstream os;
        os << "run_regression_fiducial: " << failures << " of " << B
           << " chains failed; first failure in chain " << first_chain << ": " << first_message;
        throw ChainFailure(os.str(), first_chain, failures);
    }
    set.summaries = summarize(set.samples, set.dim);
    return set;
}

}  // namespace fiducial
