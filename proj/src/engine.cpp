#include "fiducial/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

namespace fiducial {

namespace {

void check_finite(std::span<const double> value, std::int64_t m, const char* family) {
    for (double v : value)
        if (!std::isfinite(v))
            throw NumericError(std::string(family) + ": non-finite state after step at m=" +
                                   std::to_string(m),
                               m);
}

double increment_norm(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
    return d;
}

// Kahan-Neumaier compensated accumulator.
struct Accumulator {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double total() const { return sum + comp; }
};

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                            double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Work is split into fixed blocks so the partition, and hence every chain's
// stream, is independent of scheduling.
void parallel_for(std::int64_t count, int workers, const std::function<void(std::int64_t)>& body) {
    if (workers <= 1 || count < 2) {
        for (std::int64_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    std::mutex err_mutex;
    std::exception_ptr first_error;
    const std::int64_t block = std::max<std::int64_t>(1, count / (8 * workers));
    auto worker = [&] {
        for (;;) {
            const std::int64_t begin = next.fetch_add(block);
            if (begin >= count) return;
            const std::int64_t end = std::min(count, begin + block);
            try {
                for (std::int64_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

std::vector<double> SampleSet::column(std::size_t j) const {
    std::vector<double> out(static_cast<std::size_t>(B));
    for (std::int64_t b = 0; b < B; ++b) out[b] = samples[static_cast<std::size_t>(b) * dim + j];
    return out;
}

int default_workers() {
    if (const char* env = std::getenv("FIDUCIAL_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

double draw_innovation(const ModelSpec& model, ChainStream& stream) {
    switch (model.innovation()) {
        case InnovationKind::StdNormal: return stream.normal();
        case InnovationKind::StdExponential: return stream.exponential();
        case InnovationKind::Uniform01: return stream.uniform01();
        case InnovationKind::GammaShape: return stream.gamma(model.gamma_shape);
    }
    throw std::logic_error("unknown innovation kind");
}

ChainState step(const ModelSpec& model, const ChainState& state, double z, std::int64_t m) {
    if (state.m != m)
        throw std::invalid_argument("step: state index does not match m");
    model.validate_state(state.value, m);
    ChainState out;
    out.m = m + 1;
    out.value.resize(state.value.size());
    apply_step(model, state.value, z, m, out.value, nullptr);
    check_finite(out.value, m, model.family_name());
    return out;
}

RunResult run_chain(const ModelSpec& model, const ChainState& t_n, std::int64_t N,
                    ChainStream& stream, const RunOptions& options) {
    if (N <= t_n.m) throw std::invalid_argument("run_chain: N must exceed the starting index");
    model.validate_state(t_n.value, t_n.m);

    RunResult result;
    result.terminal = t_n;
    const std::size_t d = t_n.value.size();
    std::vector<double> scratch(d);
    const int window = std::max(1, options.trailing_window);
    std::vector<double> recent(static_cast<std::size_t>(window), 0.0);
    std::size_t recent_pos = 0;
    StepFlags flags;

    if (options.record_trajectory) {
        result.trajectory.reserve(static_cast<std::size_t>(N - t_n.m) + 1);
        result.trajectory.push_back(t_n);
    }
    for (std::int64_t m = t_n.m; m < N; ++m) {
        const double z = draw_innovation(model, stream);
        apply_step(model, result.terminal.value, z, m, scratch, &flags);
        check_finite(scratch, m, model.family_name());
        recent[recent_pos] = increment_norm(scratch, result.terminal.value);
        recent_pos = (recent_pos + 1) % recent.size();
        result.terminal.value.swap(scratch);
        result.terminal.m = m + 1;
        if (options.record_trajectory) result.trajectory.push_back(result.terminal);
    }
    result.trailing_increment_sup = *std::max_element(recent.begin(), recent.end());
    result.clamp_events = flags.clamp_events;
    return result;
}

RunResult run_chain(const ModelSpec& model, const ChainState& t_n, std::int64_t N,
                    std::uint64_t master_seed, std::uint64_t chain_index,
                    const RunOptions& options) {
    ChainStream stream(master_seed, chain_index);
    return run_chain(model, t_n, N, stream, options);
}

SampleSet sample_fiducial(const ModelSpec& model, const ChainState& t_n, std::int64_t N,
                          std::int64_t B, std::uint64_t master_seed,
                          const SampleOptions& options) {
    if (B < 1) throw std::invalid_argument("sample_fiducial: B must be >= 1");
    if (N <= t_n.m) throw std::invalid_argument("sample_fiducial: N must exceed n");
    model.validate_state(t_n.value, t_n.m);

    SampleSet set;
    set.model = model.family_name();
    set.n = t_n.m;
    set.t_n = t_n.value;
    set.N = N;
    set.B = B;
    set.master_seed = master_seed;
    set.dim = options.projection ? options.projection_names.size() : model.dim();
    set.coordinate_names =
        options.projection ? options.projection_names : model.coordinate_names();
    set.samples.assign(static_cast<std::size_t>(B) * set.dim, 0.0);

    const int workers = options.workers > 0 ? options.workers : default_workers();
    std::mutex agg_mutex;
    double increment_sup = 0.0;
    std::int64_t clamp_events = 0;
    std::int64_t failures = 0;
    std::int64_t first_chain = -1;
    std::string first_message;

    RunOptions run_options;
    run_options.trailing_window = options.trailing_window;

    parallel_for(B, workers, [&](std::int64_t b) {
        try {
            ChainStream stream(master_seed, static_cast<std::uint64_t>(b));
            RunResult r = run_chain(model, t_n, N, stream, run_options);
            const std::vector<double> out_row =
                options.projection ? options.projection(r.terminal) : r.terminal.value;
            if (out_row.size() != set.dim)
                throw std::logic_error("sample_fiducial: projection dimension mismatch");
            std::copy(out_row.begin(), out_row.end(),
                      set.samples.begin() + static_cast<std::size_t>(b) * set.dim);
            std::lock_guard lock(agg_mutex);
            increment_sup = std::max(increment_sup, r.trailing_increment_sup);
            clamp_events += r.clamp_events;
        } catch (const std::exception& e) {
            std::lock_guard lock(agg_mutex);
            ++failures;
            if (first_chain < 0 || b < first_chain) {
                first_chain = b;
                first_message = e.what();
            }
        }
    });

    if (failures > 0) {
        std::ostringstream os;
        os << "sample_fiducial: " << failures << " of " << B << " chains failed; first failure in "
           << "chain " << first_chain << ": " << first_message;
        throw ChainFailure(os.str(), first_chain, failures);
    }

    set.trailing_increment_sup = increment_sup;
    set.clamp_events = clamp_events;
    set.summaries = summarize(set.samples, set.dim);
    return set;
}

double tail_sum_inverse_squares(std::int64_t n, double rel_tol) {
    if (n < 1) throw std::invalid_argument("tail_sum_inverse_squares: n must be >= 1");
    if (!(rel_tol > 0.0)) throw std::invalid_argument("tail_sum_inverse_squares: bad tolerance");
    // Bracket 1/(M+1) < tail(M) < 1/M; the midpoint estimate is off by at most
    // half the width 1/(M(M+1)). Choose M so that this is below rel_tol times
    // the lower bound 1/(n+1) of the result.
    const double target = static_cast<double>(n + 1) / rel_tol;
    std::int64_t M = static_cast<std::int64_t>(std::ceil(std::sqrt(target)));
    M = std::max(M, n + 1);
    Accumulator acc;
    for (std::int64_t m = M; m > n; --m) {
        const double md = static_cast<double>(m);
        acc.add(1.0 / (md * md));
    }
    acc.add(0.5 * (1.0 / static_cast<double>(M) + 1.0 / static_cast<double>(M + 1)));
    return acc.total();
}

double partial_sum_inverse_squares(std::int64_t lo, std::int64_t hi) {
    if (lo < 1 || hi < lo) throw std::invalid_argument("partial_sum_inverse_squares: bad range");
    Accumulator acc;
    for (std::int64_t m = hi; m >= lo; --m) {
        const double md = static_cast<double>(m);
        acc.add(1.0 / (md * md));
    }
    return acc.total();
}

double normal_closed_form_sample(double t_n, double sigma, std::int64_t n, double z) {
    if (!(sigma > 0.0)) throw std::invalid_argument("normal_closed_form_sample: sigma must be > 0");
    return t_n + sigma * z * std::sqrt(tail_sum_inverse_squares(n));
}

std::vector<double> sample_normal_closed_form(double t_n, double sigma, std::int64_t n,
                                              std::int64_t B, std::uint64_t master_seed) {
    if (B < 1) throw std::invalid_argument("sample_normal_closed_form: B must be >= 1");
    const double scale = sigma * std::sqrt(tail_sum_inverse_squares(n));
    std::vector<double> out(static_cast<std::size_t>(B));
    for (std::int64_t b = 0; b < B; ++b) {
        ChainStream stream(master_seed, static_cast<std::uint64_t>(b));
        out[b] = t_n + scale * stream.normal();
    }
    return out;
}

double uniform1_kakutani_am(std::int64_t m) {
    const double md = static_cast<double>(m);
    const double numer = 2.0 / 3.0 * std::sqrt((md + 1.0) / md) + md / (3.0 * (md + 1.0));
    const double denom = std::sqrt(1.0 + 0.5 * (1.0 / md - 1.0 / (md + 1.0)));
    return numer / denom;
}

double exponential_kakutani_am(std::int64_t m) {
    const double md = static_cast<double>(m);
    // 1 - a_m = sqrt(m/(m+1)) * Integral e^-z { sqrt(1+1/m) - sqrt(1+z/m) } dz.
    // The brace equals (1-z)/m / (sqrt(1+1/m) + sqrt(1+z/m)), which avoids the
    // cancellation that otherwise swamps the O(1/m^2) result.
    const double root = std::sqrt(1.0 + 1.0 / md);
    auto integrand = [md, root](double z) {
        return std::exp(-z) * (1.0 - z) / (root + std::sqrt(1.0 + z / md));
    };
    const double integral = adaptive_simpson(integrand, 0.0, 60.0, 1e-14);
    return 1.0 - std::sqrt(md / (md + 1.0)) * integral / md;
}

DiagnosticsReport kakutani_diagnostic(const ModelSpec& model, std::int64_t n, std::int64_t M) {
    if (model.family != Family::Exponential && model.family != Family::Uniform1)
        throw std::invalid_argument("kakutani_diagnostic: supported for exponential and uniform1");
    if (n < 1 || M <= n) throw std::invalid_argument("kakutani_diagnostic: need 1 <= n < M");
    DiagnosticsReport report;
    Accumulator acc;
    report.ms.reserve(static_cast<std::size_t>(M - n + 1));
    for (std::int64_t m = n; m <= M; ++m) {
        const double am = model.family == Family::Uniform1 ? uniform1_kakutani_am(m)
                                                           : exponential_kakutani_am(m);
        const double term = 1.0 - am;
        acc.add(term);
        report.ms.push_back(m);
        report.kakutani_terms.push_back(term);
        report.kakutani_partial.push_back(acc.total());
    }
    return report;
}

DiagnosticsReport convergence_series_diagnostic(const ModelSpec& model,
                                             std::span<const ChainState> trajectory,
                                             std::int64_t M, int mc_draws,
                                             std::uint64_t mc_seed) {
    if (trajectory.size() < 2)
        throw std::invalid_argument("convergence_series_diagnostic: trajectory too short");
    if (model.family == Family::CopulaDF)
        throw std::invalid_argument("convergence_series_diagnostic: unsupported family");
    const std::size_t d = model.dim();
    DiagnosticsReport report;
    report.mean_terms.assign(d, {});
    report.mean_partial.assign(d, {});
    report.sq_terms.assign(d, {});
    report.sq_partial.assign(d, {});
    std::vector<Accumulator> mean_acc(d), sq_acc(d);

    const std::size_t window = std::min<std::size_t>(50, trajectory.size() - 1);
    for (std::size_t idx = trajectory.size() - window; idx < trajectory.size(); ++idx)
        report.increment_sup =
            std::max(report.increment_sup,
                     increment_norm(trajectory[idx].value, trajectory[idx - 1].value));

    // The last trajectory state has no innovation applied to it.
    for (std::size_t idx = 0; idx + 1 < trajectory.size(); ++idx) {
        const ChainState& state = trajectory[idx];
        if (state.m > M) break;
        report.ms.push_back(state.m);
        for (std::size_t coord = 0; coord < d; ++coord) {
            double mean_term, sq_term;
            const auto analytic_mean = g_conditional_mean(model, state.value, state.m, coord);
            const auto analytic_sq = g_conditional_sq(model, state.value, state.m, coord);
            if (analytic_mean && analytic_sq) {
                mean_term = *analytic_mean;
                sq_term = *analytic_sq;
            } else {
                ChainStream stream(mc_seed, static_cast<std::uint64_t>(state.m) * d + coord);
                Accumulator g1, g2;
                for (int k = 0; k < mc_draws; ++k) {
                    const double z = draw_innovation(model, stream);
                    const double g = decomposition_g(model, state.value, z, state.m, coord);
                    g1.add(g);
                    g2.add(g * g);
                }
                mean_term = g1.total() / mc_draws;
                sq_term = g2.total() / mc_draws;
            }
            mean_acc[coord].add(mean_term);
            sq_acc[coord].add(sq_term);
            report.mean_terms[coord].push_back(mean_term);
            report.mean_partial[coord].push_back(mean_acc[coord].total());
            report.sq_terms[coord].push_back(sq_term);
            report.sq_partial[coord].push_back(sq_acc[coord].total());
        }
    }
    return report;
}

double sorted_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("sorted_quantile: empty input");
    if (sorted.size() == 1) return sorted[0];
    const double h = p * (static_cast<double>(sorted.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<CoordinateSummary> summarize(std::span<const double> samples, std::size_t dim) {
    if (dim == 0 || samples.size() % dim != 0)
        throw std::invalid_argument("summarize: samples size not a multiple of dim");
    const std::size_t rows = samples.size() / dim;
    std::vector<CoordinateSummary> out(dim);
    std::vector<double> col(rows);
    for (std::size_t j = 0; j < dim; ++j) {
        for (std::size_t i = 0; i < rows; ++i) col[i] = samples[i * dim + j];
        Accumulator mean_acc;
        for (double v : col) mean_acc.add(v);
        const double mean = mean_acc.total() / static_cast<double>(rows);
        Accumulator var_acc;
        for (double v : col) var_acc.add((v - mean) * (v - mean));
        const double sd =
            rows > 1 ? std::sqrt(var_acc.total() / (static_cast<double>(rows) - 1.0)) : 0.0;
        std::sort(col.begin(), col.end());
        out[j].mean = mean;
        out[j].sd = sd;
        out[j].q025 = sorted_quantile(col, 0.025);
        out[j].q25 = sorted_quantile(col, 0.25);
        out[j].q50 = sorted_quantile(col, 0.5);
        out[j].q75 = sorted_quantile(col, 0.75);
        out[j].q975 = sorted_quantile(col, 0.975);
    }
    return out;
}

}  // namespace fiducial
