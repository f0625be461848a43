#pragma once

#include <span>
#include <vector>

#include "treeperturb/decision_path.hpp"

namespace treeperturb {

struct IndexedPath {
  TreeId treeId = 0;
  DecisionPath path;

  bool operator==(const IndexedPath&) const = default;
};

// Catalog of every feasible decision path in a forest, keyed by vote.
class PathIndex {
 public:
  static PathIndex build(const ForestModel& model);

  // Paths voting strictly above `label`, ordered by (treeId, leaf order).
  std::span<const IndexedPath> paths_above(QualityLabel label) const;

  std::span<const IndexedPath> bucket(QualityLabel vote) const;
  std::size_t num_labels() const { return buckets_.size(); }
  std::size_t size() const;
  std::size_t infeasible_count() const { return infeasible_; }

 private:
  std::vector<std::vector<IndexedPath>> buckets_;
  std::vector<std::vector<IndexedPath>> above_;
  std::size_t infeasible_ = 0;
};

inline PathIndex build_index(const ForestModel& model) { return PathIndex::build(model); }

}  // namespace treeperturb
