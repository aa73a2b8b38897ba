#include "fiducial/models.hpp"

#include <algorithm>
#include <cmath>

#include "fiducial/special.hpp"

namespace fiducial {

namespace {

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

ModelSpec ModelSpec::gamma(double shape) {
    require(shape > 0.0 && std::isfinite(shape), "gamma model: shape must be positive");
    ModelSpec m;
    m.family = Family::Gamma;
    m.gamma_shape = shape;
    return m;
}

ModelSpec ModelSpec::normal(double sigma) {
    require(sigma > 0.0 && std::isfinite(sigma), "normal model: sigma must be positive");
    ModelSpec m;
    m.family = Family::Normal;
    m.sigma = sigma;
    return m;
}

ModelSpec ModelSpec::normal_mean_var(std::optional<double> variance_clamp) {
    if (variance_clamp) require(*variance_clamp > 0.0, "normal_mean_var: clamp must be positive");
    ModelSpec m;
    m.family = Family::NormalMeanVar;
    m.variance_clamp = variance_clamp;
    return m;
}

ModelSpec ModelSpec::exponential() {
    ModelSpec m;
    m.family = Family::Exponential;
    return m;
}

ModelSpec ModelSpec::weibull(double floor, bool reflect) {
    require(floor > 0.0, "weibull model: floor must be positive");
    ModelSpec m;
    m.family = Family::Weibull;
    m.weibull_floor = floor;
    m.weibull_reflect = reflect;
    return m;
}

ModelSpec ModelSpec::uniform1() {
    ModelSpec m;
    m.family = Family::Uniform1;
    return m;
}

ModelSpec ModelSpec::uniform2() {
    ModelSpec m;
    m.family = Family::Uniform2;
    return m;
}

ModelSpec ModelSpec::copula_df(std::vector<double> xs, double rho, CopulaWeights weights,
                               double weight_c, double clamp_eps) {
    require(rho > 0.0 && rho < 1.0, "copula model: rho must lie in (0,1)");
    require(xs.size() >= 2, "copula model: grid needs at least two points");
    for (std::size_t i = 1; i < xs.size(); ++i)
        require(xs[i] > xs[i - 1], "copula model: grid must be strictly increasing");
    if (weights == CopulaWeights::Constant)
        require(weight_c > 0.0 && weight_c < 1.0, "copula model: constant weight must lie in (0,1)");
    require(clamp_eps > 0.0 && clamp_eps < 0.5, "copula model: clamp eps must lie in (0,0.5)");
    ModelSpec m;
    m.family = Family::CopulaDF;
    m.rho = rho;
    m.weights = weights;
    m.weight_c = weight_c;
    m.copula_xs = std::move(xs);
    m.copula_clamp_eps = clamp_eps;
    return m;
}

InnovationKind ModelSpec::innovation() const {
    switch (family) {
        case Family::Gamma: return InnovationKind::GammaShape;
        case Family::Normal:
        case Family::NormalMeanVar:
        case Family::CopulaDF: return InnovationKind::StdNormal;
        case Family::Exponential:
        case Family::Weibull: return InnovationKind::StdExponential;
        case Family::Uniform1:
        case Family::Uniform2: return InnovationKind::Uniform01;
    }
    throw std::logic_error("unknown family");
}

std::size_t ModelSpec::dim() const {
    switch (family) {
        case Family::NormalMeanVar:
        case Family::Uniform2: return 2;
        case Family::CopulaDF: return copula_xs.size();
        default: return 1;
    }
}

const char* ModelSpec::family_name() const {
    switch (family) {
        case Family::Gamma: return "gamma";
        case Family::Normal: return "normal";
        case Family::NormalMeanVar: return "normalmv";
        case Family::Exponential: return "exponential";
        case Family::Weibull: return "weibull";
        case Family::Uniform1: return "uniform1";
        case Family::Uniform2: return "uniform2";
        case Family::CopulaDF: return "copula";
    }
    return "?";
}

std::vector<std::string> ModelSpec::coordinate_names() const {
    switch (family) {
        case Family::NormalMeanVar: return {"mean", "variance"};
        case Family::Uniform2: return {"center", "halfwidth"};
        case Family::Weibull: return {"theta"};
        case Family::CopulaDF: {
            std::vector<std::string> names(copula_xs.size());
            for (std::size_t i = 0; i < names.size(); ++i) names[i] = "F" + std::to_string(i);
            return names;
        }
        default: return {"t"};
    }
}

double ModelSpec::copula_weight(std::int64_t m) const {
    if (weights == CopulaWeights::Constant) return weight_c;
    return 1.0 / static_cast<double>(m + 1);
}

void ModelSpec::validate_state(std::span<const double> value, std::int64_t m) const {
    require(value.size() == dim(), std::string(family_name()) + ": state has wrong dimension");
    for (double v : value)
        require(std::isfinite(v), std::string(family_name()) + ": state must be finite");
    switch (family) {
        case Family::Gamma:
        case Family::Exponential:
        case Family::Uniform1:
            require(value[0] > 0.0, std::string(family_name()) + ": statistic must be positive");
            break;
        case Family::Weibull:
            require(value[0] > weibull_floor, "weibull: statistic must exceed the floor");
            break;
        case Family::NormalMeanVar:
            require(m >= 2, "normalmv: index m must be >= 2");
            require(value[1] > 0.0, "normalmv: variance must be positive");
            break;
        case Family::Uniform2:
            require(m >= 2, "uniform2: index m must be >= 2");
            require(value[1] > 0.0, "uniform2: half-width must be positive");
            break;
        case Family::CopulaDF: {
            DFGrid g{copula_xs, std::vector<double>(value.begin(), value.end()), copula_clamp_eps};
            g.validate();
            break;
        }
        case Family::Normal: break;
    }
}

double gamma_step(double t, double z, std::int64_t m, double shape) {
    return t * (static_cast<double>(m) + z / shape) / static_cast<double>(m + 1);
}

double normal_step(double t, double z, std::int64_t m, double sigma) {
    return t + sigma * z / static_cast<double>(m + 1);
}

std::pair<double, double> normalmv_step(double t1, double t2, double z, std::int64_t m) {
    if (m < 2) throw std::invalid_argument("normalmv_step: requires m >= 2");
    const double md = static_cast<double>(m);
    const double t1p = t1 + std::sqrt(t2) * z / (md + 1.0);
    const double t2p = t2 * (1.0 - 1.0 / md + z * z / (md + 1.0));
    return {t1p, t2p};
}

double exponential_step(double t, double z, std::int64_t m) {
    return t * (static_cast<double>(m) + z) / static_cast<double>(m + 1);
}

double weibull_score(double x, double theta) {
    const double lx = std::log(x);
    return 1.0 / theta + lx - std::pow(x, theta) * lx;
}

double weibull_step(double t, double z, std::int64_t m, double floor, bool reflect) {
    // x = z^(1/t) gives x^t = z exactly, so evaluate the score in that form.
    const double lx = std::log(z) / t;
    const double s = 1.0 / t + lx - z * lx;
    double tp = t + s / static_cast<double>(m + 1);
    if (!(tp > floor)) {
        if (!reflect) throw FlaggedStep("weibull: statistic fell to the positivity floor", m, {t}, z);
        tp = 2.0 * floor - tp;
    }
    return tp;
}

double uniform1_step(double t, double u, std::int64_t m) {
    const double md = static_cast<double>(m);
    return (md + 2.0) / (md + 1.0) * std::max(md / (md + 1.0), u) * t;
}

std::pair<double, double> uniform2_step(double a, double b, double u, std::int64_t m) {
    if (m < 2) throw std::invalid_argument("uniform2_step: requires m >= 2");
    const double md = static_cast<double>(m);
    const double v = positive_part(u - md / (md + 1.0));
    const double w = positive_part(1.0 / (md + 1.0) - u);
    const double ap = a + b * (v - w);
    const double bp = b * (1.0 - 2.0 / (md * (md + 1.0)) + (md + 2.0) / md * (v + w));
    return {ap, bp};
}

double uniform1_factor_mean(std::int64_t m) {
    const double md = static_cast<double>(m);
    return (md + 2.0) / (md + 1.0) * md / (md + 1.0) * (1.0 + 1.0 / (2.0 * md * (md + 1.0)));
}

void DFGrid::validate() const {
    require(xs.size() >= 2, "DFGrid: need at least two grid points");
    require(xs.size() == Fs.size(), "DFGrid: xs and Fs sizes differ");
    require(clamp_eps > 0.0 && clamp_eps < 0.5, "DFGrid: clamp eps must lie in (0,0.5)");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        require(std::isfinite(xs[i]) && std::isfinite(Fs[i]), "DFGrid: entries must be finite");
        if (i > 0) {
            require(xs[i] > xs[i - 1], "DFGrid: xs must be strictly increasing");
            require(Fs[i] >= Fs[i - 1], "DFGrid: Fs must be nondecreasing");
        }
    }
    require(Fs.front() >= 0.0 && Fs.back() <= 1.0, "DFGrid: Fs must lie within [0,1]");
}

void copula_df_step_values(std::span<double> Fs, double z, double rho, double a_m,
                           double clamp_eps) {
    const double denom = std::sqrt(1.0 - rho * rho);
    double prev = 0.0;
    for (std::size_t i = 0; i < Fs.size(); ++i) {
        const double f = std::clamp(Fs[i], clamp_eps, 1.0 - clamp_eps);
        const double shifted = normal_cdf((normal_quantile(f) - rho * z) / denom);
        double out = (1.0 - a_m) * Fs[i] + a_m * shifted;
        // The map is monotone in F; the max only settles ulp-level ties.
        if (i > 0) out = std::max(out, prev);
        Fs[i] = prev = out;
    }
}

DFGrid copula_df_step(const DFGrid& F, double z, std::int64_t m, double rho, double a_m) {
    require(rho > 0.0 && rho < 1.0, "copula_df_step: rho must lie in (0,1)");
    require(a_m > 0.0 && a_m < 1.0, "copula_df_step: a_m must lie in (0,1)");
    (void)m;
    F.validate();
    DFGrid out = F;
    copula_df_step_values(out.Fs, z, rho, a_m, F.clamp_eps);
    return out;
}

double df_functional(std::span<const double> xs, std::span<const double> Fs, Integrand g) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double mid = 0.5 * (xs[i] + xs[i + 1]);
        const double dF = Fs[i + 1] - Fs[i];
        switch (g) {
            case Integrand::Mass: sum += dF; break;
            case Integrand::Mean: sum += mid * dF; break;
            case Integrand::SecondMoment: sum += mid * mid * dF; break;
        }
    }
    return sum;
}

double df_functional(const DFGrid& F, Integrand g) {
    F.validate();
    return df_functional(F.xs, F.Fs, g);
}

void apply_step(const ModelSpec& model, std::span<const double> in, double z, std::int64_t m,
                std::span<double> out, StepFlags* flags) {
    switch (model.family) {
        case Family::Gamma:
            out[0] = gamma_step(in[0], z, m, model.gamma_shape);
            break;
        case Family::Normal:
            out[0] = normal_step(in[0], z, m, model.sigma);
            break;
        case Family::NormalMeanVar: {
            auto [t1, t2] = normalmv_step(in[0], in[1], z, m);
            if (model.variance_clamp && t2 > *model.variance_clamp) {
                t2 = *model.variance_clamp;
                if (flags) ++flags->clamp_events;
            }
            out[0] = t1;
            out[1] = t2;
            break;
        }
        case Family::Exponential:
            out[0] = exponential_step(in[0], z, m);
            break;
        case Family::Weibull:
            out[0] = weibull_step(in[0], z, m, model.weibull_floor, model.weibull_reflect);
            break;
        case Family::Uniform1:
            out[0] = uniform1_step(in[0], z, m);
            break;
        case Family::Uniform2: {
            auto [a, b] = uniform2_step(in[0], in[1], z, m);
            out[0] = a;
            out[1] = b;
            break;
        }
        case Family::CopulaDF: {
            if (out.data() != in.data()) std::copy(in.begin(), in.end(), out.begin());
            copula_df_step_values(out, z, model.rho, model.copula_weight(m),
                                  model.copula_clamp_eps);
            break;
        }
    }
}

double decomposition_phi(const ModelSpec& model, std::size_t coord, double t) {
    switch (model.family) {
        case Family::Gamma:
        case Family::Exponential:
        case Family::Uniform1: return std::log(t);
        case Family::Normal:
        case Family::NormalMeanVar:
        case Family::Weibull: return t;
        case Family::Uniform2: return coord == 1 ? std::log(t) : t;
        case Family::CopulaDF: break;
    }
    throw std::invalid_argument("decomposition_phi: unsupported family");
}

double decomposition_phi_inv(const ModelSpec& model, std::size_t coord, double w) {
    switch (model.family) {
        case Family::Gamma:
        case Family::Exponential:
        case Family::Uniform1: return std::exp(w);
        case Family::Normal:
        case Family::NormalMeanVar:
        case Family::Weibull: return w;
        case Family::Uniform2: return coord == 1 ? std::exp(w) : w;
        case Family::CopulaDF: break;
    }
    throw std::invalid_argument("decomposition_phi_inv: unsupported family");
}

double decomposition_g(const ModelSpec& model, std::span<const double> state, double z,
                       std::int64_t m, std::size_t coord) {
    const double md = static_cast<double>(m);
    switch (model.family) {
        case Family::Gamma:
            return std::log((md + z / model.gamma_shape) / (md + 1.0));
        case Family::Normal:
            return model.sigma * z / (md + 1.0);
        case Family::NormalMeanVar:
            if (coord == 0) return std::sqrt(state[1]) * z / (md + 1.0);
            return state[1] * (z * z / (md + 1.0) - 1.0 / md);
        case Family::Exponential:
            return std::log((md + z) / (md + 1.0));
        case Family::Weibull: {
            const double lx = std::log(z) / state[0];
            return (1.0 / state[0] + lx - z * lx) / (md + 1.0);
        }
        case Family::Uniform1:
            return std::log((md + 2.0) / (md + 1.0) * std::max(md / (md + 1.0), z));
        case Family::Uniform2: {
            const double v = positive_part(z - md / (md + 1.0));
            const double w = positive_part(1.0 / (md + 1.0) - z);
            if (coord == 0) return state[1] * (v - w);
            return std::log(1.0 - 2.0 / (md * (md + 1.0)) + (md + 2.0) / md * (v + w));
        }
        case Family::CopulaDF: break;
    }
    throw std::invalid_argument("decomposition_g: unsupported family");
}

std::optional<double> g_conditional_mean(const ModelSpec& model, std::span<const double> state,
                                         std::int64_t m, std::size_t coord) {
    const double md = static_cast<double>(m);
    switch (model.family) {
        case Family::NormalMeanVar:
            if (coord == 0) return 0.0;
            return -state[1] / (md * (md + 1.0));
        case Family::Uniform2: {
            if (coord == 0) return 0.0;
            // E log(c + d*(v+w)) with v+w uniform on (0, 1/(m+1)) on each end band.
            const double c = 1.0 - 2.0 / (md * (md + 1.0));
            const double d = (md + 2.0) / md;
            const double L = 1.0 / (md + 1.0);
            const double top = c + d * L;
            const double band = (top * (std::log(top) - 1.0) - c * (std::log(c) - 1.0)) / d;
            return (md - 1.0) / (md + 1.0) * std::log(c) + 2.0 * band;
        }
        default: return std::nullopt;
    }
}

std::optional<double> g_conditional_sq(const ModelSpec& model, std::span<const double> state,
                                       std::int64_t m, std::size_t coord) {
    const double md = static_cast<double>(m);
    switch (model.family) {
        case Family::NormalMeanVar:
            if (coord == 0) return state[1] / ((md + 1.0) * (md + 1.0));
            // E z^4 = 3 for a standard normal innovation.
            return state[1] * state[1] *
                   (3.0 / ((md + 1.0) * (md + 1.0)) - 2.0 / (md * (md + 1.0)) + 1.0 / (md * md));
        case Family::Uniform2: {
            if (coord == 0)
                return 2.0 * state[1] * state[1] / (3.0 * (md + 1.0) * (md + 1.0) * (md + 1.0));
            const double c = 1.0 - 2.0 / (md * (md + 1.0));
            const double d = (md + 2.0) / md;
            const double L = 1.0 / (md + 1.0);
            const double top = c + d * L;
            auto sq_antideriv = [](double x) {
                const double lx = std::log(x);
                return x * (lx * lx - 2.0 * lx + 2.0);
            };
            const double band = (sq_antideriv(top) - sq_antideriv(c)) / d;
            const double lc = std::log(c);
            return (md - 1.0) / (md + 1.0) * lc * lc + 2.0 * band;
        }
        default: return std::nullopt;
    }
}

double parameter_transform(const ModelSpec& model, double t) {
    switch (model.family) {
        case Family::Exponential: return t;
        case Family::Gamma: return model.gamma_shape / t;
        default:
            throw std::invalid_argument("parameter_transform: no transform for this family");
    }
}

}  // namespace fiducial
