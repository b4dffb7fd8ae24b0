#pragma once

namespace relopt {

// Standard normal density, CDF and inverse CDF. The quantile is accurate to
// ~1e-15 relative over the full double range of p, which is required for
// reliability indices up to beta = 8 (tail probabilities near 6e-16).
double normal_pdf(double x);
double normal_cdf(double x);
double normal_cdf_upper(double x);
double normal_quantile(double p);

// ln(1 - Phi(x)), valid for any x (asymptotic expansion beyond the range
// where erfc stays normal).
double log_normal_cdf_upper(double x);

// ln(Phi(b) - Phi(a)) for a < b, stable when both tails underflow.
double log_normal_cdf_interval(double a, double b);

}  // namespace relopt
