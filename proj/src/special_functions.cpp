#include "rpmx/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rpmx {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;
}  // namespace

double normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double normal_logpdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double normal_logpdf_prec(double y, double mean, double prec) {
  double r = y - mean;
  return 0.5 * std::log(prec) - 0.5 * prec * r * r - kLogSqrt2Pi;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_normal_cdf(double x) {
  if (x > -37.0) {
    // erfc keeps full relative accuracy here.
    return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  }
  // Asymptotic expansion of the lower tail: Phi(x) ~ phi(x)/|x| * (1 - 1/x^2 + 3/x^4).
  double x2 = x * x;
  double corr = std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
  return -0.5 * x2 - kLogSqrt2Pi - std::log(-x) + corr;
}

namespace {

// Crude inverse used only as a Newton starting point.
double quantile_seed(double p) {
  if (p < 0.02425) {
    // Lower-tail asymptotic inversion of -log p ~ x^2/2 + log(sqrt(2pi) |x|).
    double t = -2.0 * std::log(p);
    double x = -std::sqrt(t - std::log(t) - std::log(2.0 * 3.14159265358979323846) + 1e-12);
    return x;
  }
  // Symmetric rational fit near the center (Bowling-style logistic inverse
  // is plenty; Newton does the rest).
  return -std::sqrt(2.0) * 0.88622692545275801 * std::log(1.0 / p - 1.0) * 0.62665706865775006;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
  bool flip = p > 0.5;
  double q = flip ? 1.0 - p : p;
  double x = quantile_seed(q);
  // Newton on log Phi(x) = log q; stable in the extreme tail because it
  // works with log-cdf values instead of tiny tail areas.
  for (int it = 0; it < 60; ++it) {
    double lc = log_normal_cdf(x);
    double step = (lc - std::log(q)) * std::exp(lc - normal_logpdf(x));
    x -= step;
    if (std::abs(step) < 1e-14 * (1.0 + std::abs(x))) break;
  }
  return flip ? -x : x;
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double log_rising_factorial(double a, int n) {
  double out = 0.0;
  for (int i = 0; i < n; ++i) out += std::log(a + i);
  return out;
}

double log_sum_exp(std::span<const double> logs) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logs)
    if (v > mx) mx = v;
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double v : logs) s += std::exp(v - mx);
  return mx + std::log(s);
}

}  // namespace rpmx
