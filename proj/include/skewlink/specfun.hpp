#pragma once

namespace skewlink {

// Univariate distribution functions and their inverses. Everything here is
// deterministic and thread-safe; accuracy targets are ~1e-12 absolute for
// the normal cdf and ~1e-9 for the incomplete-function inversions.

double norm_pdf(double x);
double norm_cdf(double x);
double norm_logcdf(double x);     // stable into the deep lower tail
double norm_quantile(double p);   // AS 241 double-precision rational fits

// Regularized incomplete gamma P(a,x) and Q(a,x)=1-P(a,x).
double lower_gamma_reg(double a, double x);
double upper_gamma_reg(double a, double x);
// Solves P(shape, x/scale') = p with scale'=1; gamma_quantile applies scale.
double gamma_quantile(double p, double shape, double scale);

double chisq_cdf(double x, double nu);
double chisq_quantile(double p, double nu);

// Regularized incomplete beta I_x(a,b).
double inc_beta(double a, double b, double x);

double student_t_pdf(double x, double nu);
double student_t_cdf(double x, double nu);
double student_t_quantile(double p, double nu);

// E[Z | Z <= z] for standard normal, computed through logs so it stays
// finite for z far in the lower tail.
double trunc_upper_mean(double z);

}  // namespace skewlink
