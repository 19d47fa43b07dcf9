#pragma once

#include <span>
#include <vector>

#include "rpmx/archive.hpp"
#include "rpmx/matrix.hpp"

namespace rpmx {

// Pairwise posterior co-assignment frequencies across retained draws.
Matrix<double> coclustering_matrix(const DrawArchive& draws);

struct PointEstimate {
  std::vector<int> assign;
  std::size_t draw_index = 0;  // earliest minimizer wins ties
  double loss = 0.0;
};

// Retained draw minimizing the pairwise misclassification loss against the
// co-assignment frequencies.
PointEstimate binder_point_estimate(const DrawArchive& draws);
PointEstimate binder_point_estimate(const DrawArchive& draws,
                                    const Matrix<double>& cocluster);

double binder_loss(std::span<const int> assign, const Matrix<double>& cocluster);

// Sample autocorrelation at the given lag; 0 for a constant series.
double autocorrelation(std::span<const double> series, int lag);

// Per-cluster nonzero frequency of the coefficient matrix across the draws
// of a conditional rerun on a frozen clustering.
Matrix<double> marginal_inclusion_by_cluster(const DrawArchive& draws);

// Posterior distribution of the number of occupied clusters, indexed by k-1.
std::vector<double> cluster_count_distribution(const DrawArchive& draws);

}  // namespace rpmx
