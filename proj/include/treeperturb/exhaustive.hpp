#pragma once

#include <cstdint>

#include "treeperturb/scoring.hpp"

namespace treeperturb {

struct ExhaustiveConfig {
  EpsilonPolicy eps;
  std::size_t maxFeatures = 12;
  std::uint64_t maxGridPoints = 10'000'000;
  bool recordContributions = true;
};

struct ExhaustiveResult {
  RawScores raw;
  std::uint64_t gridPoints = 0;       // combinations enumerated
  std::uint64_t improving = 0;        // combinations with a higher forest label
  std::vector<std::vector<double>> candidates;  // per-feature candidate values
};

// Candidate values per feature: x_f, and theta, theta + margin for every threshold on f.
std::vector<std::vector<double>> exhaustive_candidates(const ForestModel& model, FeatureView x,
                                                       const EpsilonPolicy& eps);

// Reference scorer enumerating one perturbation per model-response cell. The
// confidence of a perturbation is the fraction of trees voting for M(x + p).
ExhaustiveResult score_exhaustive(const ForestModel& model, FeatureView x,
                                  const ExhaustiveConfig& config = {});

}  // namespace treeperturb
