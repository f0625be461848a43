#pragma once

#include <vector>

#include "treeperturb/decision_path.hpp"

namespace treeperturb {

// Margin used to step strictly past an open lower bound.
struct EpsilonPolicy {
  double relEps = 1e-6;
  double absEps = 1e-9;

  double margin_for(double bound) const;
  void validate() const;
};

struct FeatureDelta {
  std::size_t feature = 0;
  double delta = 0.0;

  bool operator==(const FeatureDelta&) const = default;
};

// Sparse change to an instance; entries are nonzero, finite, and sorted by feature.
struct Perturbation {
  std::vector<FeatureDelta> deltas;

  std::size_t hamming() const { return deltas.size(); }
  double l2_norm() const;
  double delta_for(std::size_t feature) const;
  FeatureVector apply(FeatureView x) const;

  bool operator==(const Perturbation&) const = default;
};

inline std::size_t hamming_delta(const Perturbation& p) { return p.hamming(); }

// Per-feature smallest move that places x inside the path's box. Closed upper
// bounds are reached exactly; open lower bounds are passed by eps.margin_for(lower).
Perturbation min_perturbation(FeatureView x, const DecisionPath& path,
                              const EpsilonPolicy& eps = {});

}  // namespace treeperturb
