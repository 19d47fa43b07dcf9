#pragma once

#include <span>
#include <vector>

#include "rpmx/archive.hpp"
#include "rpmx/dataset.hpp"
#include "rpmx/dp_prior.hpp"
#include "rpmx/partition.hpp"
#include "rpmx/rng.hpp"

namespace rpmx {

struct PrPriors {
  double theta_prec = 0.01;             // cluster intercept prior precision
  double a_pi = 1.0, b_pi = 1.0;        // relevance weight per covariate
  double a_zeta = 1.0, b_zeta = 1.0;    // binary profile probabilities
  double a_lambda = 1.0, b_lambda = 1.0;
  GammaParams alpha_prior{1.0, 1.0};
  double x_mean0 = 0.0, x_prec0 = 1.0, x_noise_prec = 1.0;
  int m_aux = 3;
};

// Fixed per-covariate fallback densities.  Estimated once from the observed
// columns and never updated by the sampler.
struct PrEmpirical {
  std::vector<ColumnType> types;
  std::vector<double> p1;    // binary columns: frequency of ones
  std::vector<double> mean;  // continuous columns: sample mean
  std::vector<double> prec;  // continuous columns: reciprocal sample variance

  double log_density(std::size_t d, double x) const;
};

PrEmpirical pr_empirical_from_data(const Dataset& data);

struct PrCluster {
  double theta = 0.0;         // response intercept
  std::vector<double> zeta;   // covariate profile (prob or location)
};

struct PrState {
  Partition partition;
  std::vector<PrCluster> clusters;
  std::vector<double> pi;     // per-covariate relevance weight
  double lambda = 1.0;
  DpConcentration conc;
  Matrix<int> member;         // n x d; 1 = cluster profile, 0 = fallback
};

// Density of one covariate value as a relevance-weighted mixture of the
// cluster profile and the fixed fallback.
double vs_covariate_density(double pi_d, double model_density,
                            double fallback_density);

// log p(x_id | zeta_jd) under the cluster profile branch.
double pr_profile_log_density(ColumnType type, double zeta, double x,
                              const PrPriors& priors);

PrState pr_init(const Dataset& data, const PrPriors& priors);

PrCluster pr_draw_g0(Rng& rng, const PrPriors& priors,
                     std::span<const ColumnType> types);

// log weight of observation i under a cluster: response plus the covariate
// mixture, with the member indicators integrated out.
double pr_obs_log_weight(const PrState& st, const PrCluster& cluster,
                         const PrEmpirical& emp, const Dataset& data, int i,
                         const PrPriors& priors);

void pr_reallocate_observation(Rng& rng, PrState& st, int i,
                               const Dataset& data, const PrEmpirical& emp,
                               const PrPriors& priors);

// Redraw all member indicators from their conditional given the allocation.
void pr_update_memberships(Rng& rng, PrState& st, const Dataset& data,
                           const PrEmpirical& emp, const PrPriors& priors);

void pr_update_clusters(Rng& rng, PrState& st, const Dataset& data,
                        const PrPriors& priors);

void pr_update_hypers(Rng& rng, PrState& st, const Dataset& data,
                      const PrPriors& priors);

void pr_sweep(Rng& rng, PrState& st, const Dataset& data,
              const PrEmpirical& emp, const PrPriors& priors,
              bool fixed_partition = false);

double pr_joint_loglik(const PrState& st, const Dataset& data,
                       const PrEmpirical& emp, const PrPriors& priors);

PrState pr_prior_draw(Rng& rng, int n, std::span<const ColumnType> types,
                      const PrPriors& priors);

// Redraw covariates and response given the state; covariates come from the
// branch each member indicator points at.
void pr_draw_data(Rng& rng, const PrState& st, const PrEmpirical& emp,
                  const PrPriors& priors, Dataset& data);

std::vector<FieldSpec> pr_schema();
DrawRecord pr_record(const PrState& st, long iter);

std::vector<double> pr_predictive_density(const DrawArchive& draws,
                                          const PrEmpirical& emp,
                                          std::span<const double> xtilde,
                                          std::span<const double> grid,
                                          Rng& rng, const PrPriors& priors);

double pr_predictive_mean(const DrawArchive& draws, const PrEmpirical& emp,
                          std::span<const double> xtilde, Rng& rng,
                          const PrPriors& priors);

// Posterior probability that covariate d is cluster-driven, i.e. the mean of
// the relevance weight over retained draws.
double pr_relevance(const DrawArchive& draws, int d);

}  // namespace rpmx
