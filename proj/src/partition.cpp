#include "rpmx/partition.hpp"

#include <stdexcept>

namespace rpmx {

Partition Partition::singletons(int n) {
  Partition p;
  p.assign_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p.assign_[static_cast<std::size_t>(i)] = i;
  p.sizes_.assign(static_cast<std::size_t>(n), 1);
  return p;
}

Partition Partition::one_cluster(int n) {
  Partition p;
  if (n > 0) {
    p.assign_.assign(static_cast<std::size_t>(n), 0);
    p.sizes_.assign(1, n);
  }
  return p;
}

Partition Partition::from_assign(std::vector<int> assign) {
  Partition p;
  p.assign_ = std::move(assign);
  p.canonicalize_from_raw(nullptr);
  return p;
}

void Partition::canonicalize_from_raw(MoveResult* result) {
  // Relabel by first appearance; works for any integer labels.
  int n = static_cast<int>(assign_.size());
  std::vector<int> seen_order;  // raw label of canonical cluster j
  sizes_.clear();
  std::vector<int> raw_to_new;
  for (int i = 0; i < n; ++i) {
    int raw = assign_[static_cast<std::size_t>(i)];
    int lbl = -1;
    for (std::size_t j = 0; j < seen_order.size(); ++j) {
      if (seen_order[j] == raw) {
        lbl = static_cast<int>(j);
        break;
      }
    }
    if (lbl < 0) {
      lbl = static_cast<int>(seen_order.size());
      seen_order.push_back(raw);
      sizes_.push_back(0);
    }
    assign_[static_cast<std::size_t>(i)] = lbl;
    ++sizes_[static_cast<std::size_t>(lbl)];
    // raw labels may repeat after the rewrite; remember the mapping as we go
    if (result != nullptr) {
      if (raw >= static_cast<int>(raw_to_new.size()))
        raw_to_new.resize(static_cast<std::size_t>(raw) + 1, -2);
      raw_to_new[static_cast<std::size_t>(raw)] = lbl;
    }
  }
  if (result != nullptr) result->label_map = std::move(raw_to_new);
}

MoveResult Partition::move_observation(int i, int target) {
  if (i < 0 || i >= n()) throw std::out_of_range("move_observation: bad index");
  int old = assign_[static_cast<std::size_t>(i)];
  int kk = k();
  if (target != kNewCluster && (target < 0 || target >= kk))
    throw std::out_of_range("move_observation: bad target cluster");

  MoveResult res;
  if (target == old) {
    res.new_label = old;
    res.label_map.resize(static_cast<std::size_t>(kk));
    for (int j = 0; j < kk; ++j) res.label_map[static_cast<std::size_t>(j)] = j;
    return res;
  }

  bool was_singleton = sizes_[static_cast<std::size_t>(old)] == 1;
  res.created_cluster = target == kNewCluster;
  res.removed_cluster = was_singleton;

  // Write a provisional label and recanonicalize.  The provisional label kk
  // is never a live label, so it reads as "new cluster" in the rewrite.
  assign_[static_cast<std::size_t>(i)] = target == kNewCluster ? kk : target;
  MoveResult scratch;
  canonicalize_from_raw(&scratch);

  // canonicalize mapped raw labels 0..kk (kk present only when created).
  res.label_map.assign(static_cast<std::size_t>(kk), -1);
  for (int j = 0; j < kk; ++j)
    if (j < static_cast<int>(scratch.label_map.size()))
      res.label_map[static_cast<std::size_t>(j)] =
          scratch.label_map[static_cast<std::size_t>(j)] == -2
              ? -1
              : scratch.label_map[static_cast<std::size_t>(j)];
  res.new_label = assign_[static_cast<std::size_t>(i)];
  return res;
}

}  // namespace rpmx
