#pragma once

#include <vector>

#include "treeperturb/scoring.hpp"

namespace treeperturb {

struct Dataset;

// Per-feature Gaussian fit over a high-quality reference sample.
struct KrauseStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::size_t sampleSize = 0;
  double multiplier = 1.5;
};

KrauseStats fit_krause(const Dataset& highQualitySample, double multiplier = 1.5);
KrauseStats fit_krause(std::span<const FeatureVector> rows, double multiplier = 1.5);

struct KrauseFlag {
  std::size_t feature = 0;
  Direction direction = Direction::None;  // toward the mean

  bool operator==(const KrauseFlag&) const = default;
};

// Flags every feature at least `multiplier` standard deviations from its mean.
std::vector<KrauseFlag> krause_feedback(const KrauseStats& stats, FeatureView x);

}  // namespace treeperturb
