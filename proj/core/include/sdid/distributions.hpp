#pragma once

// Standard-normal and chi-squared distribution functions used by the
// inference and pre-trends code.
//
//   erfc          W. J. Cody's rational Chebyshev approximations (Math. Comp.
//                 1969), three intervals; ~1e-16 relative in double precision.
//   normal_cdf    0.5 * erfc(-x / sqrt(2)); absolute error well below 1e-12.
//   normal_quantile
//                 Wichura's AS 241 (PPND16), Appl. Statist. 1988; about 1e-16
//                 relative.
//   chi_squared_sf
//                 regularized upper incomplete gamma Q(k/2, x/2): power series
//                 for x < a + 1, modified Lentz continued fraction otherwise,
//                 both iterated to 1e-15 relative.

namespace sdid::dist {

double erfc(double x);
double normal_cdf(double x);
/// Upper tail 1 - Phi(x), computed without cancellation.
double normal_sf(double x);
/// Inverse of normal_cdf on (0, 1). Throws UsageError outside the open interval.
double normal_quantile(double p);
/// Two-sided critical value z with P(|Z| <= z) = level.
double normal_critical(double level);

/// Regularized lower/upper incomplete gamma functions P(a, x), Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double chi_squared_cdf(double x, double df);
/// P(chi2_df > x).
double chi_squared_sf(double x, double df);

}  // namespace sdid::dist
