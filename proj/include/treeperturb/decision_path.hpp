#pragma once

#include <limits>
#include <vector>

#include "treeperturb/forest.hpp"

namespace treeperturb {

// Half-open interval (lower, upper] on a single feature.
struct FeatureInterval {
  std::size_t feature = 0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool contains(double v) const { return lower < v && v <= upper; }
  bool empty() const { return !(lower < upper); }

  bool operator==(const FeatureInterval&) const = default;
};

// Root-to-leaf conjunction of threshold tests, flattened into one interval per touched feature.
struct DecisionPath {
  std::size_t pathId = 0;  // leaf order within the tree (left-first traversal)
  NodeId leaf = 0;
  std::vector<FeatureInterval> constraints;  // sorted by feature
  QualityLabel vote = 0;
  std::vector<std::uint64_t> classCounts;
  double confidence = 0.0;

  bool matches(FeatureView x) const;
  const FeatureInterval* constraint_for(std::size_t feature) const;

  bool operator==(const DecisionPath&) const = default;
};

struct PathExtraction {
  std::vector<DecisionPath> paths;
  std::size_t infeasible = 0;
};

PathExtraction extract_paths(const Tree& tree);

}  // namespace treeperturb
