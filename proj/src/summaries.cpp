#include "rpmx/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rpmx {

Matrix<double> coclustering_matrix(const DrawArchive& draws) {
  if (draws.size() == 0)
    throw std::invalid_argument("coclustering of an empty archive");
  auto n = static_cast<std::size_t>(draws.meta().n);
  Matrix<double> p(n, n, 0.0);
  for (std::size_t t = 0; t < draws.size(); ++t) {
    const auto& a = draws.assign(t);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        if (a[i] == a[j]) {
          p(i, j) += 1.0;
          if (j != i) p(j, i) += 1.0;
        }
  }
  auto scale = static_cast<double>(draws.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) /= scale;
  return p;
}

double binder_loss(std::span<const int> assign, const Matrix<double>& cocluster) {
  if (assign.size() != cocluster.rows())
    throw std::invalid_argument("binder_loss: size mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < assign.size(); ++i)
    for (std::size_t j = i + 1; j < assign.size(); ++j) {
      double p = cocluster(i, j);
      loss += assign[i] == assign[j] ? 1.0 - p : p;
    }
  return loss;
}

PointEstimate binder_point_estimate(const DrawArchive& draws,
                                    const Matrix<double>& cocluster) {
  if (draws.size() == 0)
    throw std::invalid_argument("point estimate of an empty archive");
  PointEstimate best;
  best.loss = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < draws.size(); ++t) {
    double loss = binder_loss(draws.assign(t), cocluster);
    if (loss < best.loss) {
      best.loss = loss;
      best.draw_index = t;
      best.assign = draws.assign(t);
    }
  }
  return best;
}

PointEstimate binder_point_estimate(const DrawArchive& draws) {
  return binder_point_estimate(draws, coclustering_matrix(draws));
}

double autocorrelation(std::span<const double> series, int lag) {
  auto n = series.size();
  if (lag < 0 || static_cast<std::size_t>(lag) >= n)
    throw std::invalid_argument("autocorrelation: lag out of range");
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double v : series) denom += (v - mean) * (v - mean);
  if (denom <= 0.0) return 0.0;
  double num = 0.0;
  for (std::size_t t = 0; t + static_cast<std::size_t>(lag) < n; ++t)
    num += (series[t] - mean) * (series[t + static_cast<std::size_t>(lag)] - mean);
  // Length-corrected so a perfectly alternating series scores -1 at lag 1.
  return (num / static_cast<double>(n - static_cast<std::size_t>(lag))) /
         (denom / static_cast<double>(n));
}

Matrix<double> marginal_inclusion_by_cluster(const DrawArchive& draws) {
  if (draws.size() == 0)
    throw std::invalid_argument("inclusion summary of an empty archive");
  if (!draws.meta().fixed_partition)
    throw std::invalid_argument(
        "per-cluster inclusion needs a fixed-partition rerun");
  const auto& first = draws.mat(0, "theta");
  Matrix<double> freq(first.rows(), first.cols(), 0.0);
  for (std::size_t t = 0; t < draws.size(); ++t) {
    const auto& theta = draws.mat(t, "theta");
    if (theta.rows() != freq.rows())
      throw std::invalid_argument(
          "per-cluster inclusion: cluster count changed across draws");
    for (std::size_t j = 0; j < freq.rows(); ++j)
      for (std::size_t d = 0; d < freq.cols(); ++d)
        if (theta(j, d) != 0.0) freq(j, d) += 1.0;
  }
  auto scale = static_cast<double>(draws.size());
  for (std::size_t j = 0; j < freq.rows(); ++j)
    for (std::size_t d = 0; d < freq.cols(); ++d) freq(j, d) /= scale;
  return freq;
}

std::vector<double> cluster_count_distribution(const DrawArchive& draws) {
  if (draws.size() == 0)
    throw std::invalid_argument("cluster counts of an empty archive");
  std::vector<double> counts;
  std::vector<int> labels;
  for (std::size_t t = 0; t < draws.size(); ++t) {
    const auto& a = draws.assign(t);
    // Distinct labels, not max+1: truncated samplers leave gaps.
    labels.assign(a.begin(), a.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    std::size_t k = labels.size();
    if (k == 0) continue;
    if (k > counts.size()) counts.resize(k, 0.0);
    counts[k - 1] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(draws.size());
  return counts;
}

}  // namespace rpmx
