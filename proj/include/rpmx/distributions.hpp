#pragma once

#include <cstddef>
#include <span>

#include "rpmx/rng.hpp"

namespace rpmx {

struct BetaParams {
  double a = 1.0;
  double b = 1.0;
};

struct GammaParams {
  double shape = 1.0;
  double rate = 1.0;
};

// Posterior of a Beta(a,b) prior after Bernoulli observations in {0,1}.
BetaParams beta_bernoulli_update(const BetaParams& prior,
                                 std::span<const int> data);

struct NormalPosterior {
  double mean = 0.0;
  double prec = 0.0;
};

// Conjugate update for a single regression coefficient with known noise
// precision: residuals r_i = x_i * coeff + noise.
NormalPosterior normal_coeff_conditional(double prior_mean, double prior_prec,
                                         double noise_prec,
                                         std::span<const double> x,
                                         std::span<const double> resid);

// Gamma posterior for a Normal precision given n residuals with
// sum of squares sum_sq.
GammaParams gamma_precision_update(const GammaParams& prior, std::size_t n,
                                   double sum_sq);

enum class HalfLine { Positive, Negative };

// Draw from N(mean, sd^2) restricted to one side of zero.  Inverse-cdf in
// the moderate regime, exponential rejection deep in the tail; the result
// is strictly on the requested side even when |mean| >> sd.
double truncated_normal_draw(Rng& rng, double mean, double sd, HalfLine side);

// Marginal likelihood pieces shared by the spike-and-slab updates: the log
// evidence of residuals r_i = x_i * coeff + N(0, 1/noise_prec) noise with
// coeff ~ N(prior_mean, 1/prior_prec) integrated out, minus the evidence
// with coeff pinned at zero.
double slab_minus_spike_log_evidence(double prior_mean, double prior_prec,
                                     double noise_prec,
                                     std::span<const double> x,
                                     std::span<const double> resid);

}  // namespace rpmx
