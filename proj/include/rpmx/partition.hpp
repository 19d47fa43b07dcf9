#pragma once

#include <vector>

namespace rpmx {

// Describes how a move_observation call renumbered clusters, so parallel
// per-cluster parameter tables can be kept in step.
struct MoveResult {
  int new_label = 0;            // label of the moved observation afterwards
  bool created_cluster = false; // the move opened a new cluster
  bool removed_cluster = false; // the move emptied (and dropped) a cluster
  // label_map[j] = new label of old cluster j, or -1 if it was dropped.
  std::vector<int> label_map;
};

// A partition of {0..n-1} into k non-empty clusters.  Labels are kept in
// canonical first-appearance order (the cluster of the lowest-indexed
// observation is 0, the next new cluster seen is 1, ...).  Canonical form
// makes partitions directly comparable and makes moves exactly invertible.
class Partition {
 public:
  Partition() = default;

  static Partition singletons(int n);
  static Partition one_cluster(int n);
  // Accepts any labeling and canonicalizes it.
  static Partition from_assign(std::vector<int> assign);

  int n() const { return static_cast<int>(assign_.size()); }
  int k() const { return static_cast<int>(sizes_.size()); }
  int label(int i) const { return assign_[static_cast<std::size_t>(i)]; }
  int cluster_size(int j) const { return sizes_[static_cast<std::size_t>(j)]; }
  const std::vector<int>& assign() const { return assign_; }
  const std::vector<int>& sizes() const { return sizes_; }

  static constexpr int kNewCluster = -1;

  // Moves observation i to an existing cluster or to a fresh one, then
  // restores canonical labeling.  Returns the relabeling that occurred.
  MoveResult move_observation(int i, int target);

  bool operator==(const Partition&) const = default;

 private:
  void canonicalize_from_raw(MoveResult* result);

  std::vector<int> assign_;
  std::vector<int> sizes_;
};

}  // namespace rpmx
