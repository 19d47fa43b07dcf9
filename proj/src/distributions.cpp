#include "rpmx/distributions.hpp"

#include <cmath>
#include <stdexcept>

#include "rpmx/special_functions.hpp"

namespace rpmx {

BetaParams beta_bernoulli_update(const BetaParams& prior,
                                 std::span<const int> data) {
  if (!(prior.a > 0.0) || !(prior.b > 0.0))
    throw std::invalid_argument("beta_bernoulli_update: prior must be positive");
  int ones = 0;
  for (int v : data) {
    if (v != 0 && v != 1)
      throw std::invalid_argument("beta_bernoulli_update: data must be 0/1");
    ones += v;
  }
  return {prior.a + ones, prior.b + (static_cast<double>(data.size()) - ones)};
}

NormalPosterior normal_coeff_conditional(double prior_mean, double prior_prec,
                                         double noise_prec,
                                         std::span<const double> x,
                                         std::span<const double> resid) {
  if (x.size() != resid.size())
    throw std::invalid_argument("normal_coeff_conditional: size mismatch");
  if (!(prior_prec > 0.0) || !(noise_prec > 0.0))
    throw std::invalid_argument("normal_coeff_conditional: precisions must be positive");
  double sxx = 0.0, sxr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += x[i] * x[i];
    sxr += x[i] * resid[i];
  }
  double prec = prior_prec + noise_prec * sxx;
  double mean = (prior_prec * prior_mean + noise_prec * sxr) / prec;
  return {mean, prec};
}

GammaParams gamma_precision_update(const GammaParams& prior, std::size_t n,
                                   double sum_sq) {
  if (!(prior.shape > 0.0) || !(prior.rate > 0.0))
    throw std::invalid_argument("gamma_precision_update: prior must be positive");
  if (sum_sq < 0.0)
    throw std::invalid_argument("gamma_precision_update: negative sum of squares");
  return {prior.shape + 0.5 * static_cast<double>(n), prior.rate + 0.5 * sum_sq};
}

namespace {

// Standard-normal draw conditioned on z > lo.  Returns the offset z - lo,
// which is positive by construction; the caller rescales.  For lo <= 5 the
// inverse cdf through the upper tail is exact enough; beyond that the
// exponential proposal of the classic tail-rejection method takes over.
double std_truncated_above_offset(Rng& rng, double lo) {
  if (lo <= 5.0) {
    double tail = 0.5 * std::erfc(lo * 0.70710678118654752440);
    for (;;) {
      double p = rng.uniform() * tail;  // upper-tail area of the draw
      double z = -normal_quantile(p);
      double off = z - lo;
      if (off > 0.0) return off;
    }
  }
  double a = 0.5 * (lo + std::sqrt(lo * lo + 4.0));
  for (;;) {
    double w = rng.exponential(a);
    double z = lo + w;
    double d = z - a;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return w;
  }
}

}  // namespace

double truncated_normal_draw(Rng& rng, double mean, double sd, HalfLine side) {
  if (!(sd > 0.0))
    throw std::invalid_argument("truncated_normal_draw: sd must be positive");
  if (side == HalfLine::Positive) {
    double lo = -mean / sd;
    // mean + sd*z telescopes to sd*(z - lo); computing it that way keeps the
    // result strictly positive even under heavy truncation.
    return sd * std_truncated_above_offset(rng, lo);
  }
  double lo = mean / sd;
  return -sd * std_truncated_above_offset(rng, lo);
}

double slab_minus_spike_log_evidence(double prior_mean, double prior_prec,
                                     double noise_prec,
                                     std::span<const double> x,
                                     std::span<const double> resid) {
  NormalPosterior post =
      normal_coeff_conditional(prior_mean, prior_prec, noise_prec, x, resid);
  // Completing the square in the coefficient leaves
  //   0.5 log(prior_prec / post_prec) + M^2/(2 post_prec) - prior_prec*mu^2/2
  // where M = post_mean * post_prec; the residual sum of squares cancels
  // against the spike evidence.
  double m = post.mean * post.prec;
  return 0.5 * (std::log(prior_prec) - std::log(post.prec)) +
         0.5 * m * m / post.prec -
         0.5 * prior_prec * prior_mean * prior_mean;
}

}  // namespace rpmx
