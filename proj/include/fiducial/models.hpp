#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Per-model one-step update rules, their phi/g decompositions, analytic
// conditional moments where available, and the distribution-function
// recursion driven by a Gaussian copula.
namespace fiducial {

enum class Family {
    Gamma,          // mean chain, innovations Gamma(a,1)
    Normal,         // mean chain with known sigma, standard normal innovations
    NormalMeanVar,  // joint (mean, variance) chain, standard normal innovations
    Exponential,    // mean chain, standard exponential innovations
    Weibull,        // shape chain driven by the score, standard exponential innovations
    Uniform1,       // scale chain for uniform on [0, theta], uniform innovations
    Uniform2,       // (center, half-width) chain for uniform on [a-b, a+b]
    CopulaDF,       // distribution-function chain on a fixed grid, normal innovations
};

enum class InnovationKind { StdNormal, StdExponential, Uniform01, GammaShape };

enum class CopulaWeights { Harmonic, Constant };

// Raised when an update leaves the model's domain; carries the failing step.
struct FlaggedStep : std::runtime_error {
    FlaggedStep(const std::string& what, std::int64_t m_, std::vector<double> state_, double z_)
        : std::runtime_error(what), m(m_), state(std::move(state_)), z(z_) {}
    std::int64_t m;
    std::vector<double> state;
    double z;
};

struct StepFlags {
    std::int64_t clamp_events = 0;
};

struct ModelSpec {
    Family family = Family::Normal;
    double gamma_shape = 0.0;                    // a > 0
    double sigma = 0.0;                          // known sigma > 0
    double rho = 0.0;                            // copula correlation in (0,1)
    CopulaWeights weights = CopulaWeights::Harmonic;
    double weight_c = 0.5;                       // constant schedule value in (0,1)
    double weibull_floor = 1e-8;                 // positivity floor for the shape chain
    bool weibull_reflect = false;                // reflect at the floor instead of flagging
    std::optional<double> variance_clamp;        // upper clamp on the variance coordinate
    std::vector<double> copula_xs;               // strictly increasing grid
    double copula_clamp_eps = 1e-10;             // quantile-transform safety clamp

    static ModelSpec gamma(double shape);
    static ModelSpec normal(double sigma);
    static ModelSpec normal_mean_var(std::optional<double> variance_clamp = std::nullopt);
    static ModelSpec exponential();
    static ModelSpec weibull(double floor = 1e-8, bool reflect = false);
    static ModelSpec uniform1();
    static ModelSpec uniform2();
    static ModelSpec copula_df(std::vector<double> xs, double rho,
                               CopulaWeights weights = CopulaWeights::Harmonic,
                               double weight_c = 0.5, double clamp_eps = 1e-10);

    InnovationKind innovation() const;
    std::size_t dim() const;
    const char* family_name() const;
    std::vector<std::string> coordinate_names() const;
    double copula_weight(std::int64_t m) const;

    // Throws std::invalid_argument when the state violates the model domain.
    void validate_state(std::span<const double> value, std::int64_t m) const;
};

// One-step update rules. All pure functions of their arguments.
double gamma_step(double t, double z, std::int64_t m, double shape);
double normal_step(double t, double z, std::int64_t m, double sigma);
// Returns (mean', variance'); requires m >= 2.
std::pair<double, double> normalmv_step(double t1, double t2, double z, std::int64_t m);
double exponential_step(double t, double z, std::int64_t m);
// Log-density derivative in the shape parameter for x ~ Weibull(theta).
double weibull_score(double x, double theta);
double weibull_step(double t, double z, std::int64_t m, double floor = 1e-8,
                    bool reflect = false);
double uniform1_step(double t, double u, std::int64_t m);
// Returns (center', half-width'); requires m >= 2.
std::pair<double, double> uniform2_step(double a, double b, double u, std::int64_t m);

// Mean of the one-step factor of the uniform scale chain; always < 1.
double uniform1_factor_mean(std::int64_t m);

struct DFGrid {
    std::vector<double> xs;   // strictly increasing
    std::vector<double> Fs;   // nondecreasing, within [0,1]
    double clamp_eps = 1e-10;
    void validate() const;
};

// Pointwise update of the grid values; preserves monotonicity.
void copula_df_step_values(std::span<double> Fs, double z, double rho, double a_m,
                           double clamp_eps);
DFGrid copula_df_step(const DFGrid& F, double z, std::int64_t m, double rho, double a_m);

enum class Integrand { Mass, Mean, SecondMoment };
// Midpoint Stieltjes sum of the selected integrand against dF.
double df_functional(const DFGrid& F, Integrand g);
double df_functional(std::span<const double> xs, std::span<const double> Fs, Integrand g);

// Dispatches to the family's rule; writes the new state into `out`.
void apply_step(const ModelSpec& model, std::span<const double> in, double z, std::int64_t m,
                std::span<double> out, StepFlags* flags = nullptr);

// phi / g decomposition: step(t, z) == phi_inv(phi(t) + g(t, z)) per coordinate.
double decomposition_phi(const ModelSpec& model, std::size_t coord, double t);
double decomposition_phi_inv(const ModelSpec& model, std::size_t coord, double w);
double decomposition_g(const ModelSpec& model, std::span<const double> state, double z,
                       std::int64_t m, std::size_t coord);

// Analytic E(g | state) and E(g^2 | state) where a closed form exists.
std::optional<double> g_conditional_mean(const ModelSpec& model, std::span<const double> state,
                                         std::int64_t m, std::size_t coord);
std::optional<double> g_conditional_sq(const ModelSpec& model, std::span<const double> state,
                                       std::int64_t m, std::size_t coord);

// Optional statistic-space -> parameter-space transform (exponential: identity,
// gamma: theta = a / t). Never applied implicitly.
double parameter_transform(const ModelSpec& model, double t);

}  // namespace fiducial
