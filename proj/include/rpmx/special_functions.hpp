#pragma once

#include <span>

namespace rpmx {

// Standard normal density, cdf and friends.  The cdf pair is tail-stable:
// log_normal_cdf stays accurate far past where the plain cdf underflows.
double normal_pdf(double x);
double normal_logpdf(double x);

// log N(y | mean, precision).  Precision parametrization throughout.
double normal_logpdf_prec(double y, double mean, double prec);

double normal_cdf(double x);
double log_normal_cdf(double x);

// Inverse standard normal cdf.  Accurate over (0, 1) including extreme
// tails; Newton-refined against the erfc-based cdf.
double normal_quantile(double p);

double log_beta(double a, double b);

// log of the rising factorial a(a+1)...(a+n-1).
double log_rising_factorial(double a, int n);

double log_sum_exp(std::span<const double> logs);

}  // namespace rpmx
