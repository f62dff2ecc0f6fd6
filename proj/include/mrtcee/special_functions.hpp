#pragma once

namespace mrtcee {

/// Regularized incomplete beta I_x(a, b) by continued fraction, switching
/// to I_{1-x}(b, a) when x > (a + 1) / (a + b + 2).
/// Throws std::domain_error unless a > 0, b > 0, 0 <= x <= 1.
double reg_inc_beta(double a, double b, double x);

/// Central F distribution with (d1, d2) degrees of freedom.
double f_cdf(double d1, double d2, double x);
double f_sf(double d1, double d2, double x);

/// x with f_cdf(d1, d2, x) = p. Throws NumericalError after 200 iterations
/// without reaching |cdf - p| <= 1e-10.
double f_quantile(double d1, double d2, double p);

/// P(F <= x) for the noncentral F with noncentrality lambda, summed as a
/// Poisson mixture of incomplete beta terms until the unvisited Poisson
/// mass falls below 1e-13.
double noncentral_f_cdf(double d1, double d2, double lambda, double x);

}  // namespace mrtcee
