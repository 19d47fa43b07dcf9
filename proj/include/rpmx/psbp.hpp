#pragma once

#include <span>
#include <vector>

#include "rpmx/archive.hpp"
#include "rpmx/dataset.hpp"
#include "rpmx/distributions.hpp"
#include "rpmx/matrix.hpp"
#include "rpmx/rng.hpp"

namespace rpmx {

struct PsbpPriors {
  int K = 20;                        // truncation level
  double a_kappa = 0.5, b_kappa = 0.5;
  double a_tau = 1.0, b_tau = 5.0;   // regression coefficient precision
  double a_lambda = 1.0, b_lambda = 1.0;
  double mu_xi = 0.0, tau_xi = 0.1;  // slab for the weight coefficients
};

// Truncated mixture with component weights built from probit sticks
// nu_k(x) = xi_k . x.  A shared indicator gamma_kd gates both the weight
// coefficient xi_kd and the regression coefficient theta_kd: when it is 0
// both are exactly 0.  kappa_d is the per-covariate inclusion rate, itself
// spiked at 0 through the binary u_d.
struct PsbpState {
  int K = 0;
  Matrix<double> xi;     // K x d
  Matrix<int> gamma;     // K x d
  std::vector<double> kappa;
  std::vector<int> u;
  Matrix<double> theta;  // K x d
  std::vector<double> tau;
  double lambda = 1.0;
  std::vector<int> alloc;                    // component of each observation
  std::vector<std::vector<double>> latents;  // per-observation probit latents
};

PsbpState psbp_init(const Dataset& data, const PsbpPriors& priors);

// Component weights at one covariate profile.  The last component absorbs
// whatever mass the first K-1 sticks leave, so the weights sum to one.
std::vector<double> probit_weights(const Matrix<double>& xi,
                                   std::span<const double> x);

void psbp_allocation_update(Rng& rng, PsbpState& state, const Dataset& data);

// Latent Gaussians behind the probit sticks: one per stick up to the
// allocated component, positive at the component itself, negative before it.
void psbp_probit_augmentation_update(Rng& rng, PsbpState& state,
                                     const Dataset& data);

// Log posterior odds of gamma_kd = 1 vs 0 with both gated coefficients
// integrated out; exposed for the quadrature oracle.
double psbp_gamma_log_odds(const PsbpState& state, const Dataset& data, int k,
                           int d, const PsbpPriors& priors);

void psbp_xi_gamma_update(Rng& rng, PsbpState& state, const Dataset& data,
                          const PsbpPriors& priors);

void psbp_kappa_u_update(Rng& rng, PsbpState& state, const PsbpPriors& priors);

void psbp_tau_lambda_update(Rng& rng, PsbpState& state, const Dataset& data,
                            const PsbpPriors& priors);

void psbp_sweep(Rng& rng, PsbpState& state, const Dataset& data,
                const PsbpPriors& priors);

double psbp_joint_loglik(const PsbpState& state, const Dataset& data);

PsbpState psbp_prior_draw(Rng& rng, const Dataset& data, const PsbpPriors& priors);
void psbp_draw_response(Rng& rng, const PsbpState& state, Dataset& data);

std::vector<FieldSpec> psbp_schema();
DrawRecord psbp_record(const PsbpState& state, long iter);

// Posterior probability that covariate d is involved anywhere in the
// weights, i.e. one minus the frequency of an all-zero gamma column.
double psbp_inclusion_probability(const DrawArchive& draws, int d);

std::vector<double> psbp_predictive_density(const DrawArchive& draws,
                                            std::span<const double> xtilde,
                                            std::span<const double> grid);

double psbp_predictive_mean(const DrawArchive& draws,
                            std::span<const double> xtilde);

}  // namespace rpmx
