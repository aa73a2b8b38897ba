// Command-line front end: run fiducial samplers, compare them against their
// closed-form oracles, emit convergence diagnostics and histograms. Every
// run is reproducible from its config echo and master seed.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fiducial/engine.hpp"
#include "fiducial/io.hpp"
#include "fiducial/models.hpp"
#include "fiducial/oracles.hpp"
#include "fiducial/regression.hpp"
#include "fiducial/version.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitNumeric = 3;

// Removes everything registered unless the run commits.
struct OutputGuard {
    std::vector<std::string> paths;
    bool committed = false;
    void track(const std::string& p) {
        if (!p.empty()) paths.push_back(p);
    }
    ~OutputGuard() {
        if (committed) return;
        for (const auto& p : paths) std::remove(p.c_str());
    }
};

std::vector<double> parse_reals(const std::string& csv, const std::string& what) {
    std::vector<double> out;
    std::istringstream is(csv);
    std::string field;
    while (std::getline(is, field, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(field, &pos));
            if (pos != field.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::invalid_argument(what + ": cannot parse '" + field + "' as a number");
        }
    }
    if (out.empty()) throw std::invalid_argument(what + ": empty list");
    return out;
}

std::vector<double> read_csv_column(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file '" + path + "'");
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string f;
        while (std::getline(hs, f, ',')) {
            while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
            header.push_back(f);
        }
    }
    std::size_t idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == column) idx = j;
    if (idx == header.size())
        throw std::runtime_error("column '" + column + "' not found in '" + path + "'");
    std::vector<double> values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::istringstream ls(line);
        std::string f;
        std::size_t j = 0;
        bool found = false;
        while (std::getline(ls, f, ',')) {
            if (j++ == idx) {
                try {
                    values.push_back(std::stod(f));
                } catch (const std::exception&) {
                    throw std::runtime_error("non-numeric cell at row " + std::to_string(row) +
                                             " of '" + path + "'");
                }
                found = true;
                break;
            }
        }
        if (!found)
            throw std::runtime_error("row " + std::to_string(row) + " of '" + path +
                                     "' is too short");
    }
    if (values.empty()) throw std::runtime_error("no data rows in '" + path + "'");
    return values;
}

json summary_for(const fiducial::SampleSet& set) {
    json arr = json::array();
    for (std::size_t j = 0; j < set.dim; ++j) {
        const auto& s = set.summaries[j];
        arr.push_back({{"name", set.coordinate_names[j]},
                       {"mean", s.mean},
                       {"sd", s.sd},
                       {"q025", s.q025},
                       {"q25", s.q25},
                       {"q50", s.q50},
                       {"q75", s.q75},
                       {"q975", s.q975}});
    }
    return arr;
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

json base_doc(const std::string& subcommand, const std::map<std::string, std::string>& echo) {
    json doc;
    doc["tool"] = "fiducial";
    doc["version"] = fiducial::kVersion;
    doc["subcommand"] = subcommand;
    doc["config"] = echo;
    return doc;
}

// Options shared by the chain-model subcommands.
struct ModelOptions {
    std::string model;
    std::int64_t n = 0;
    std::string t0;
    double xn = 0.0;
    std::int64_t N = -1;
    std::int64_t B = 1000;
    std::uint64_t seed = 1;
    double shape = 1.0;
    double sigma = 1.0;
    double rho = 0.5;
    std::string weights = "harmonic";
    double weight_c = 0.5;
    double floor = 1e-8;
    bool reflect = false;
    double clamp_variance = 0.0;  // 0: off
    std::string data;
    std::string column;
    int grid_size = 1024;
    double grid_span = 3.0;
    std::string functional = "mean";
    double warn_increment = 0.01;
};

void add_model_options(CLI::App* cmd, ModelOptions& o, bool with_horizon = true) {
    cmd->add_option("--model", o.model, "model family")->required();
    cmd->add_option("--n", o.n, "observed sample size / chain start index");
    cmd->add_option("--t0", o.t0, "observed statistic (comma separated for 2-d states)");
    cmd->add_option("--xn", o.xn, "observed maximum for uniform models");
    if (with_horizon) {
        cmd->add_option("--N", o.N, "chain horizon (default n+1000)");
        cmd->add_option("--B", o.B, "number of chains");
        cmd->add_option("--seed", o.seed, "master seed");
    }
    cmd->add_option("--shape", o.shape, "gamma shape a");
    cmd->add_option("--sigma", o.sigma, "known sigma for the normal model");
    cmd->add_option("--rho", o.rho, "copula correlation");
    cmd->add_option("--weights", o.weights, "copula weight schedule: harmonic|constant");
    cmd->add_option("--weight-c", o.weight_c, "constant copula weight value");
    cmd->add_option("--floor", o.floor, "weibull positivity floor");
    cmd->add_flag("--reflect", o.reflect, "reflect weibull excursions at the floor");
    cmd->add_option("--clamp-variance", o.clamp_variance,
                    "upper clamp for the variance coordinate (0 disables)");
    cmd->add_option("--data", o.data, "input CSV (copula model)");
    cmd->add_option("--column", o.column, "data column name (copula model)");
    cmd->add_option("--grid-size", o.grid_size, "copula grid size");
    cmd->add_option("--grid-span", o.grid_span, "copula grid span in sample SDs");
    cmd->add_option("--functional", o.functional, "copula statistic: mean|m2|mass");
    cmd->add_option("--warn-increment", o.warn_increment,
                    "warn when the trailing increment sup exceeds this");
}

std::map<std::string, std::string> echo_model_options(const ModelOptions& o, bool with_horizon) {
    std::map<std::string, std::string> echo;
    echo["model"] = o.model;
    if (o.n > 0) echo["n"] = std::to_string(o.n);
    if (!o.t0.empty()) echo["t0"] = o.t0;
    if (o.xn > 0.0) echo["xn"] = fiducial::format_double(o.xn);
    if (with_horizon) {
        echo["N"] = std::to_string(o.N);
        echo["B"] = std::to_string(o.B);
        echo["seed"] = std::to_string(o.seed);
    }
    if (o.model == "gamma") echo["shape"] = fiducial::format_double(o.shape);
    if (o.model == "normal") echo["sigma"] = fiducial::format_double(o.sigma);
    if (o.model == "weibull") {
        echo["floor"] = fiducial::format_double(o.floor);
        if (o.reflect) echo["reflect"] = "1";
    }
    if (o.model == "normalmv" && o.clamp_variance > 0.0)
        echo["clamp-variance"] = fiducial::format_double(o.clamp_variance);
    if (o.model == "copula") {
        echo["rho"] = fiducial::format_double(o.rho);
        echo["weights"] = o.weights;
        if (o.weights == "constant") echo["weight-c"] = fiducial::format_double(o.weight_c);
        echo["data"] = o.data;
        echo["column"] = o.column;
        echo["grid-size"] = std::to_string(o.grid_size);
        echo["grid-span"] = fiducial::format_double(o.grid_span);
        echo["functional"] = o.functional;
    }
    return echo;
}

struct BuiltModel {
    fiducial::ModelSpec spec;
    fiducial::ChainState start;
};

BuiltModel build_model(ModelOptions& o) {
    using fiducial::ModelSpec;
    BuiltModel built{ModelSpec::exponential(), {}};
    if (o.model == "copula") {
        if (o.data.empty() || o.column.empty())
            throw std::invalid_argument("copula model requires --data and --column");
        const std::vector<double> values = read_csv_column(o.data, o.column);
        o.n = static_cast<std::int64_t>(values.size());
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        const double sd = values.size() > 1 ? std::sqrt(var / (values.size() - 1.0)) : 1.0;
        const double lo = *std::min_element(values.begin(), values.end()) - o.grid_span * sd;
        const double hi = *std::max_element(values.begin(), values.end()) + o.grid_span * sd;
        if (o.grid_size < 2) throw std::invalid_argument("--grid-size must be >= 2");
        std::vector<double> xs(o.grid_size);
        for (int i = 0; i < o.grid_size; ++i)
            xs[i] = lo + (hi - lo) * i / static_cast<double>(o.grid_size - 1);
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        std::vector<double> Fs(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const auto le =
                std::upper_bound(sorted.begin(), sorted.end(), xs[i]) - sorted.begin();
            Fs[i] = static_cast<double>(le) / static_cast<double>(sorted.size());
        }
        const auto schedule = o.weights == "constant" ? fiducial::CopulaWeights::Constant
                                                      : fiducial::CopulaWeights::Harmonic;
        if (o.weights != "constant" && o.weights != "harmonic")
            throw std::invalid_argument("--weights must be harmonic or constant");
        built.spec = ModelSpec::copula_df(std::move(xs), o.rho, schedule, o.weight_c);
        built.start = {o.n, std::move(Fs)};
        return built;
    }

    if (o.n <= 0) throw std::invalid_argument("--n must be a positive integer");
    if (o.model == "gamma")
        built.spec = ModelSpec::gamma(o.shape);
    else if (o.model == "normal")
        built.spec = ModelSpec::normal(o.sigma);
    else if (o.model == "normalmv")
        built.spec = ModelSpec::normal_mean_var(
            o.clamp_variance > 0.0 ? std::optional<double>(o.clamp_variance) : std::nullopt);
    else if (o.model == "exponential")
        built.spec = ModelSpec::exponential();
    else if (o.model == "weibull")
        built.spec = ModelSpec::weibull(o.floor, o.reflect);
    else if (o.model == "uniform1")
        built.spec = ModelSpec::uniform1();
    else if (o.model == "uniform2")
        built.spec = ModelSpec::uniform2();
    else
        throw std::invalid_argument("unknown model '" + o.model + "'");

    std::vector<double> t0;
    if (o.model == "uniform1" && o.t0.empty()) {
        if (!(o.xn > 0.0))
            throw std::invalid_argument("uniform1 requires --t0 or --xn");
        // Unbiased statistic (n+1)/n * x_(n).
        t0 = {static_cast<double>(o.n + 1) / static_cast<double>(o.n) * o.xn};
    } else {
        if (o.t0.empty()) throw std::invalid_argument("--t0 is required for this model");
        t0 = parse_reals(o.t0, "--t0");
    }
    if (t0.size() != built.spec.dim())
        throw std::invalid_argument("--t0 must have " + std::to_string(built.spec.dim()) +
                                    " coordinate(s) for model '" + o.model + "'");
    built.start = {o.n, std::move(t0)};
    return built;
}

fiducial::SampleOptions sample_options_for(const ModelOptions& o,
                                           const fiducial::ModelSpec& spec) {
    fiducial::SampleOptions opts;
    if (spec.family == fiducial::Family::CopulaDF) {
        fiducial::Integrand g;
        if (o.functional == "mean")
            g = fiducial::Integrand::Mean;
        else if (o.functional == "m2")
            g = fiducial::Integrand::SecondMoment;
        else if (o.functional == "mass")
            g = fiducial::Integrand::Mass;
        else
            throw std::invalid_argument("--functional must be mean, m2 or mass");
        const std::vector<double> xs = spec.copula_xs;
        opts.projection = [xs, g](const fiducial::ChainState& s) {
            return std::vector<double>{fiducial::df_functional(xs, s.value, g)};
        };
        opts.projection_names = {o.functional};
    }
    return opts;
}

void report_run_warnings(const fiducial::SampleSet& set, double warn_increment) {
    if (set.trailing_increment_sup > warn_increment)
        std::cerr << "warning: trailing increment sup " << set.trailing_increment_sup
                  << " exceeds " << warn_increment
                  << "; the chains may be far from their limits (consider a larger --N)\n";
    if (set.clamp_events > 0)
        std::cerr << "note: variance clamp triggered " << set.clamp_events << " time(s)\n";
}

int cmd_sample(ModelOptions& o, const std::string& out_path, const std::string& summary_path) {
    BuiltModel built = build_model(o);
    if (o.N < 0) o.N = o.n + 1000;
    if (o.N <= o.n) throw std::invalid_argument("--N must exceed n");
    if (o.B < 1) throw std::invalid_argument("--B must be >= 1");

    const auto set = fiducial::sample_fiducial(built.spec, built.start, o.N, o.B, o.seed,
                                               sample_options_for(o, built.spec));
    OutputGuard guard;
    guard.track(out_path);
    fiducial::write_samples_csv(out_path, set);
    if (!summary_path.empty()) {
        json doc = base_doc("sample", echo_model_options(o, true));
        doc["out"] = out_path;
        doc["n"] = set.n;
        doc["N"] = set.N;
        doc["B"] = set.B;
        doc["master_seed"] = set.master_seed;
        doc["summaries"] = summary_for(set);
        doc["trailing_increment_sup"] = set.trailing_increment_sup;
        doc["clamp_events"] = set.clamp_events;
        guard.track(summary_path);
        write_json(summary_path, doc);
    }
    guard.committed = true;
    report_run_warnings(set, o.warn_increment);
    std::cout << "wrote " << set.B << " samples (" << set.dim << " coordinate"
              << (set.dim == 1 ? "" : "s") << ") to " << out_path << '\n';
    for (std::size_t j = 0; j < set.dim; ++j)
        std::cout << "  " << set.coordinate_names[j] << ": mean " << set.summaries[j].mean
                  << ", sd " << set.summaries[j].sd << '\n';
    return kExitOk;
}

int cmd_compare(ModelOptions& o, const std::string& out_path, const std::string& summary_path) {
    fiducial::OracleFamily family;
    double oracle_stat = 0.0;
    if (o.model == "normal") {
        family = fiducial::OracleFamily::Normal;
    } else if (o.model == "exponential") {
        family = fiducial::OracleFamily::Exponential;
    } else if (o.model == "uniform1") {
        family = fiducial::OracleFamily::Uniform;
        if (!(o.xn > 0.0)) throw std::invalid_argument("compare uniform1 requires --xn");
    } else {
        throw std::invalid_argument("no Fisher oracle for model '" + o.model +
                                    "'; supported: normal, exponential, uniform1");
    }
    BuiltModel built = build_model(o);
    if (o.N < 0) o.N = o.n + 1000;
    if (o.B < 1) throw std::invalid_argument("--B must be >= 1");
    oracle_stat = o.model == "uniform1" ? o.xn : built.start.value[0];
    const auto oracle = fiducial::fisher_oracle(family, oracle_stat, o.n, o.sigma);

    const auto set = fiducial::sample_fiducial(built.spec, built.start, o.N, o.B, o.seed, {});
    std::vector<double> samples = set.column(0);
    const double ks = fiducial::ks_distance(samples, oracle);

    OutputGuard guard;
    guard.track(out_path);
    {
        std::ofstream table(out_path);
        if (!table) throw std::runtime_error("cannot open '" + out_path + "' for writing");
        table << "p,empirical,oracle\n";
        std::sort(samples.begin(), samples.end());
        for (int i = 1; i <= 199; ++i) {
            const double p = i / 200.0;
            table << fiducial::format_double(p) << ','
                  << fiducial::format_double(fiducial::sorted_quantile(samples, p)) << ','
                  << fiducial::format_double(oracle.quantile(p)) << '\n';
        }
        if (!table) throw std::runtime_error("write failed for '" + out_path + "'");
    }
    if (!summary_path.empty()) {
        json doc = base_doc("compare", echo_model_options(o, true));
        doc["out"] = out_path;
        doc["oracle"] = {{"description", oracle.describe()},
                         {"param1", oracle.param1()},
                         {"param2", oracle.param2()},
                         {"mean", oracle.mean()}};
        doc["ks"] = ks;
        doc["sample_mean"] = set.summaries[0].mean;
        doc["B"] = set.B;
        doc["N"] = set.N;
        guard.track(summary_path);
        write_json(summary_path, doc);
    }
    guard.committed = true;
    report_run_warnings(set, o.warn_increment);
    std::cout << "oracle " << oracle.describe() << ", KS distance " << ks << '\n';
    return kExitOk;
}

int cmd_diagnose(ModelOptions& o, const std::string& diagnostic, std::int64_t M, int mc_draws,
                 const std::string& out_path, const std::string& summary_path) {
    if (o.n <= 0) throw std::invalid_argument("--n must be a positive integer");
    if (M <= o.n) throw std::invalid_argument("--M must exceed n");
    OutputGuard guard;
    json doc = base_doc("diagnose", echo_model_options(o, false));
    doc["diagnostic"] = diagnostic;
    doc["M"] = M;
    doc["out"] = out_path;

    if (diagnostic == "kakutani") {
        fiducial::ModelSpec spec = o.model == "uniform1" ? fiducial::ModelSpec::uniform1()
                                                         : fiducial::ModelSpec::exponential();
        if (o.model != "uniform1" && o.model != "exponential")
            throw std::invalid_argument("kakutani diagnostic supports exponential and uniform1");
        const auto report = fiducial::kakutani_diagnostic(spec, o.n, M);
        guard.track(out_path);
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
        out << "m,term,partial_sum\n";
        for (std::size_t i = 0; i < report.ms.size(); ++i)
            out << report.ms[i] << ',' << fiducial::format_double(report.kakutani_terms[i]) << ','
                << fiducial::format_double(report.kakutani_partial[i]) << '\n';
        if (!out) throw std::runtime_error("write failed for '" + out_path + "'");
        doc["total"] = report.kakutani_partial.back();
        std::cout << "kakutani partial sum over m in [" << o.n << "," << M
                  << "]: " << report.kakutani_partial.back() << '\n';
    } else if (diagnostic == "series") {
        BuiltModel built = build_model(o);
        fiducial::RunOptions run_options;
        run_options.record_trajectory = true;
        const auto run = fiducial::run_chain(built.spec, built.start, M, o.seed, 0, run_options);
        const auto report =
            fiducial::convergence_series_diagnostic(built.spec, run.trajectory, M, mc_draws, o.seed);
        const auto names = built.spec.coordinate_names();
        guard.track(out_path);
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
        out << "m,coord,mean_term,mean_partial,sq_term,sq_partial\n";
        for (std::size_t i = 0; i < report.ms.size(); ++i)
            for (std::size_t c = 0; c < report.mean_terms.size(); ++c)
                out << report.ms[i] << ',' << names[c] << ','
                    << fiducial::format_double(report.mean_terms[c][i]) << ','
                    << fiducial::format_double(report.mean_partial[c][i]) << ','
                    << fiducial::format_double(report.sq_terms[c][i]) << ','
                    << fiducial::format_double(report.sq_partial[c][i]) << '\n';
        if (!out) throw std::runtime_error("write failed for '" + out_path + "'");
        json totals = json::array();
        for (std::size_t c = 0; c < report.mean_partial.size(); ++c)
            totals.push_back({{"coord", names[c]},
                              {"mean_partial", report.mean_partial[c].back()},
                              {"sq_partial", report.sq_partial[c].back()}});
        doc["totals"] = totals;
        doc["increment_sup"] = report.increment_sup;
        doc["seed"] = o.seed;
        doc["mc_draws"] = mc_draws;
        std::cout << "series diagnostic written for m in [" << o.n << "," << M << ")\n";
    } else {
        throw std::invalid_argument("--diagnostic must be kakutani or series");
    }
    if (!summary_path.empty()) {
        guard.track(summary_path);
        write_json(summary_path, doc);
    }
    guard.committed = true;
    return kExitOk;
}

struct RegressOptions {
    std::string data, response;
    bool no_standardize = false, no_intercept = false;
    std::string theta0, init;
    bool fit = false;
    std::int64_t B = 1000, N = -1;
    std::uint64_t seed = 1;
    bool redraw_degenerate = false;
    int hist_bins = 0;
    std::string hist_prefix;
};

int cmd_regress(const RegressOptions& o, const std::string& out_path,
                const std::string& summary_path) {
    const auto data = fiducial::load_regression_csv(o.data, o.response, !o.no_standardize,
                                                    !o.no_intercept);
    const auto model = fiducial::logistic_model();
    std::vector<double> theta_hat;
    fiducial::FitResult fit_result;
    bool fitted = false;
    if (!o.theta0.empty()) {
        theta_hat = parse_reals(o.theta0, "--theta0");
        if (theta_hat.size() != data.p)
            throw std::invalid_argument("--theta0 must have " + std::to_string(data.p) +
                                        " coordinates (including the intercept)");
    } else if (o.fit) {
        std::vector<double> init(data.p, 0.0);
        if (!o.init.empty()) {
            init = parse_reals(o.init, "--init");
            if (init.size() != data.p)
                throw std::invalid_argument("--init must have " + std::to_string(data.p) +
                                            " coordinates");
        }
        fit_result = fiducial::fit_least_squares(data, model, init);
        theta_hat = fit_result.theta;
        fitted = true;
    } else {
        throw std::invalid_argument("regress requires --theta0 or --fit");
    }

    std::int64_t N = o.N;
    if (N < 0) N = static_cast<std::int64_t>(data.n) + 1000;
    fiducial::RegressionRunOptions run_options;
    run_options.redraw_on_degenerate = o.redraw_degenerate;
    const auto set =
        fiducial::run_regression_fiducial(data, model, theta_hat, o.B, N, o.seed, run_options);

    OutputGuard guard;
    guard.track(out_path);
    fiducial::write_samples_csv(out_path, set);
    if (o.hist_bins > 0) {
        for (std::size_t j = 0; j < set.dim; ++j) {
            const auto h = fiducial::make_histogram(set.column(j), o.hist_bins);
            const std::string path = o.hist_prefix + set.coordinate_names[j] + ".csv";
            guard.track(path);
            fiducial::write_histogram_csv(path, h);
        }
    }
    if (!summary_path.empty()) {
        std::map<std::string, std::string> echo;
        echo["data"] = o.data;
        echo["response"] = o.response;
        if (o.no_standardize) echo["no-standardize"] = "1";
        if (o.no_intercept) echo["no-intercept"] = "1";
        if (!o.theta0.empty()) echo["theta0"] = o.theta0;
        if (o.fit) echo["fit"] = "1";
        if (!o.init.empty()) echo["init"] = o.init;
        echo["B"] = std::to_string(o.B);
        echo["N"] = std::to_string(N);
        echo["seed"] = std::to_string(o.seed);
        if (o.redraw_degenerate) echo["redraw-degenerate"] = "1";
        if (o.hist_bins > 0) {
            echo["hist-bins"] = std::to_string(o.hist_bins);
            echo["hist-prefix"] = o.hist_prefix;
        }
        json doc = base_doc("regress", echo);
        doc["out"] = out_path;
        doc["n"] = set.n;
        doc["p"] = data.p;
        doc["N"] = set.N;
        doc["B"] = set.B;
        doc["master_seed"] = set.master_seed;
        doc["theta_hat"] = theta_hat;
        if (fitted)
            doc["fit"] = {{"converged", fit_result.converged},
                          {"iterations", fit_result.iterations},
                          {"grad_norm", fit_result.grad_norm},
                          {"loss", fit_result.loss}};
        doc["summaries"] = summary_for(set);
        guard.track(summary_path);
        write_json(summary_path, doc);
    }
    guard.committed = true;
    std::cout << "wrote " << set.B << " coefficient samples (" << set.dim << " columns) to "
              << out_path << '\n';
    return kExitOk;
}

int cmd_hist(const std::string& in_path, const std::string& column, int bins,
             const std::string& out_path) {
    const auto values = read_csv_column(in_path, column);
    const auto h = fiducial::make_histogram(values, bins);
    OutputGuard guard;
    guard.track(out_path);
    fiducial::write_histogram_csv(out_path, h);
    guard.committed = true;
    std::cout << "wrote " << h.count.size() << " bins to " << out_path << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Doob fiducial samplers, oracles and diagnostics"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", fiducial::kVersion);
    app.set_config("--config", "",
                   "key=value config file; subcommand options live in a [subcommand] section");

    ModelOptions sample_opts, compare_opts, diagnose_opts;
    std::string sample_out, sample_summary;
    std::string compare_out, compare_summary;
    std::string diagnose_out, diagnose_summary, diagnostic = "kakutani";
    std::int64_t diagnose_M = 0;
    int diagnose_mc_draws = 10000;
    RegressOptions regress_opts;
    std::string regress_out, regress_summary;
    std::string hist_in, hist_column, hist_out;
    int hist_bins = 50;

    auto* sample = app.add_subcommand("sample", "draw B chains to their horizon");
    add_model_options(sample, sample_opts);
    sample->add_option("--out", sample_out, "samples CSV path")->required();
    sample->add_option("--summary", sample_summary, "summary JSON path");

    auto* compare = app.add_subcommand("compare", "sample and compare against the Fisher oracle");
    add_model_options(compare, compare_opts);
    compare->add_option("--out", compare_out, "CDF table CSV path")->required();
    compare->add_option("--summary", compare_summary, "summary JSON path");

    auto* diagnose = app.add_subcommand("diagnose", "convergence diagnostics");
    add_model_options(diagnose, diagnose_opts, false);
    diagnose->add_option("--diagnostic", diagnostic, "kakutani|series");
    diagnose->add_option("--M", diagnose_M, "upper index for the partial sums")->required();
    diagnose->add_option("--seed", diagnose_opts.seed, "seed for the series trajectory");
    diagnose->add_option("--mc-draws", diagnose_mc_draws, "inner Monte Carlo draws per term");
    diagnose->add_option("--out", diagnose_out, "diagnostics CSV path")->required();
    diagnose->add_option("--summary", diagnose_summary, "summary JSON path");

    auto* regress = app.add_subcommand("regress", "regression fiducial sampler");
    regress->add_option("--data", regress_opts.data, "dataset CSV path")->required();
    regress->add_option("--response", regress_opts.response, "response column name")->required();
    regress->add_flag("--no-standardize", regress_opts.no_standardize,
                      "skip min-max standardization of covariates");
    regress->add_flag("--no-intercept", regress_opts.no_intercept, "omit the intercept column");
    regress->add_option("--theta0", regress_opts.theta0, "starting estimate (comma separated)");
    regress->add_flag("--fit", regress_opts.fit, "fit the squared-loss estimate first");
    regress->add_option("--init", regress_opts.init, "initial point for --fit");
    regress->add_option("--B", regress_opts.B, "number of chains");
    regress->add_option("--N", regress_opts.N, "chain horizon (default n+1000)");
    regress->add_option("--seed", regress_opts.seed, "master seed");
    regress->add_flag("--redraw-degenerate", regress_opts.redraw_degenerate,
                      "redraw the covariate at phi=0 design points");
    regress->add_option("--hist-bins", regress_opts.hist_bins,
                        "write per-coefficient histograms with this many bins");
    regress->add_option("--hist-prefix", regress_opts.hist_prefix, "histogram CSV path prefix");
    regress->add_option("--out", regress_out, "samples CSV path")->required();
    regress->add_option("--summary", regress_summary, "summary JSON path");

    auto* hist = app.add_subcommand("hist", "histogram a CSV column");
    hist->add_option("--in", hist_in, "input CSV path")->required();
    hist->add_option("--column", hist_column, "column name")->required();
    hist->add_option("--bins", hist_bins, "bin count");
    hist->add_option("--out", hist_out, "histogram CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sample->parsed()) return cmd_sample(sample_opts, sample_out, sample_summary);
        if (compare->parsed()) return cmd_compare(compare_opts, compare_out, compare_summary);
        if (diagnose->parsed())
            return cmd_diagnose(diagnose_opts, diagnostic, diagnose_M, diagnose_mc_draws,
                                diagnose_out, diagnose_summary);
        if (regress->parsed()) return cmd_regress(regress_opts, regress_out, regress_summary);
        if (hist->parsed()) return cmd_hist(hist_in, hist_column, hist_bins, hist_out);
    } catch (const fiducial::ChainFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const fiducial::FlaggedStep& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const fiducial::NumericError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
