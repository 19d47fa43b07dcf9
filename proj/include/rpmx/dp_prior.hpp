#pragma once

#include <span>
#include <vector>

#include "rpmx/distributions.hpp"
#include "rpmx/matrix.hpp"
#include "rpmx/partition.hpp"
#include "rpmx/rng.hpp"

namespace rpmx {

struct StickBreakResult {
  std::vector<double> weights;
  double leftover = 1.0;  // mass not assigned to any listed component
};

// Turns raw stick fractions in (0,1) into mixture weights.
StickBreakResult stick_break(std::span<const double> sticks);

// Exact log prior probability of a partition under the exchangeable
// product form alpha^k / (alpha)_n * prod_j (n_j - 1)!.
double eppf_log_prob(const Partition& p, double alpha);

// Seating probabilities for one more observation given a partition of the
// others: k entries proportional to cluster sizes plus one (last) entry
// proportional to alpha.  Normalized.
std::vector<double> crp_predictive(const Partition& others, double alpha);

struct DpConcentration {
  double alpha = 1.0;
  GammaParams prior{1.0, 1.0};
};

// Auxiliary-variable resample of the concentration given the cluster count;
// with an empty partition this reduces to a draw from the prior.
double sample_alpha(Rng& rng, const Partition& p, const DpConcentration& conc);

enum class ColumnType { Binary, Continuous };

// Per-column similarity used by the covariate-dependent product partition
// prior: Beta-Bernoulli for binary columns, Normal location with fixed
// noise precision for continuous ones.
struct SimilarityColumn {
  ColumnType type = ColumnType::Binary;
  BetaParams beta{1.0, 1.0};
  double mean0 = 0.0;
  double prec0 = 1.0;
  double noise_prec = 1.0;
};

// Log marginal of the values in one column of one cluster under the
// column's similarity model.
double similarity_log_marginal(const SimilarityColumn& col,
                               std::span<const double> values);

// Unnormalized log prior of a partition with per-cluster selection
// indicators: cohesion alpha * (n_j - 1)! per cluster times the similarity
// marginal of each cluster/column with gamma = 1.
double ppmx_log_prior(const Partition& p, const Matrix<double>& x,
                      const Matrix<int>& gamma, double alpha,
                      std::span<const SimilarityColumn> similarity);

}  // namespace rpmx
