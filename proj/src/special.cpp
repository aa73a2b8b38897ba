#include "fiducial/special.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fiducial {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
constexpr int kMaxSeriesIter = 10000;

// P(s,x) by the lower series, valid for x < s + 1.
double gamma_p_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    for (int k = 1; k < kMaxSeriesIter; ++k) {
        term *= x / (s + k);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Q(s,x) by the Lentz continued fraction, valid for x >= s + 1.
double gamma_q_cf(double s, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxSeriesIter; ++i) {
        const double an = -static_cast<double>(i) * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

double beta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxSeriesIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return h;
}

// Bisection on a monotone cdf; the callers guarantee cdf(lo) <= p <= cdf(hi).
template <typename Cdf>
double invert_cdf(Cdf&& cdf, double p, double lo, double hi) {
    for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + std::fabs(lo) + std::fabs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double normal_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.39894228040143267794;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile: p must lie in (0,1), got " + std::to_string(p));
    const double q = std::min(p, 1.0 - p);
    // Abramowitz-Stegun 26.2.23 start (|error| < 4.5e-4), then Newton.
    const double t = std::sqrt(-2.0 * std::log(q));
    double x = t - (2.30753 + 0.27061 * t) / (1.0 + 0.99229 * t + 0.04481 * t * t);
    if (p < 0.5) x = -x;
    for (int i = 0; i < 6; ++i) {
        const double dens = normal_pdf(x);
        if (dens < 1e-300) break;
        const double step = (normal_cdf(x) - p) / dens;
        x -= step;
        if (std::fabs(step) < 1e-15 * (1.0 + std::fabs(x))) break;
    }
    return x;
}

double lower_gamma_reg(double s, double x) {
    if (!(s > 0.0)) throw std::domain_error("lower_gamma_reg: shape must be > 0");
    if (x < 0.0) throw std::domain_error("lower_gamma_reg: x must be >= 0");
    if (x == 0.0) return 0.0;
    if (x < s + 1.0) return gamma_p_series(s, x);
    return 1.0 - gamma_q_cf(s, x);
}

double upper_gamma_reg(double s, double x) {
    if (!(s > 0.0)) throw std::domain_error("upper_gamma_reg: shape must be > 0");
    if (x < 0.0) throw std::domain_error("upper_gamma_reg: x must be >= 0");
    if (x == 0.0) return 1.0;
    if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
    return gamma_q_cf(s, x);
}

double gamma_quantile_reg(double p, double s) {
    if (!(p >= 0.0 && p < 1.0)) throw std::domain_error("gamma_quantile_reg: p must lie in [0,1)");
    if (p == 0.0) return 0.0;
    double hi = s + 10.0 * std::sqrt(s) + 10.0;
    while (lower_gamma_reg(s, hi) < p) hi *= 2.0;
    return invert_cdf([s](double x) { return lower_gamma_reg(s, x); }, p, 0.0, hi);
}

double incomplete_beta_reg(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw std::domain_error("incomplete_beta_reg: a,b must be > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double beta_quantile_reg(double p, double a, double b) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("beta_quantile_reg: p must lie in [0,1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    return invert_cdf([a, b](double x) { return incomplete_beta_reg(a, b, x); }, p, 0.0, 1.0);
}

}  // namespace fiducial
