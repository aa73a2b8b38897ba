#pragma once

#include <cstdint>

// Special functions backing the closed-form distributions. Absolute error
// below 1e-10 on the primary domains; quantiles solved by bracketed
// root-finding on the cdf.
namespace fiducial {

double normal_cdf(double x);
double normal_pdf(double x);
double normal_quantile(double p);  // domain (0,1)

// Regularized incomplete gamma P(s,x) and Q(s,x) = 1 - P(s,x), s > 0, x >= 0.
double lower_gamma_reg(double s, double x);
double upper_gamma_reg(double s, double x);
// x such that P(s,x) = p.
double gamma_quantile_reg(double p, double s);

// Regularized incomplete beta I_x(a,b).
double incomplete_beta_reg(double a, double b, double x);
// x such that I_x(a,b) = p.
double beta_quantile_reg(double p, double a, double b);

}  // namespace fiducial
