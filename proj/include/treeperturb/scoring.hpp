#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treeperturb/path_index.hpp"
#include "treeperturb/perturbation.hpp"

namespace treeperturb {

struct Dataset;

// Contribution of one higher-quality decision path to the feature scores.
struct ImpactContribution {
  TreeId treeId = 0;
  std::size_t pathId = kNoIndex;
  Perturbation perturbation;
  std::size_t delta = 0;     // hamming size of the perturbation
  double confidence = 0.0;   // in [0, 1]
  QualityLabel voteGain = 0; // target label minus base label
  double impact = 0.0;       // voteGain / delta * confidence
};

struct RawScores {
  QualityLabel baseLabel = 0;
  std::vector<double> scores;
  std::vector<ImpactContribution> contributions;
};

// Impact of moving x onto `path` from prediction `baseLabel`; nullopt when x
// already lies on the path. Requires path.vote > baseLabel.
std::optional<ImpactContribution> path_impact(FeatureView x, const DecisionPath& path,
                                              QualityLabel baseLabel,
                                              const EpsilonPolicy& eps = {});

// Heuristic feature scores. The base label is the forest's plurality vote on x.
RawScores score_features(const PathIndex& index, const ForestModel& model, FeatureView x,
                         const EpsilonPolicy& eps = {});

// Same accumulation against an externally fixed base label.
RawScores score_against(const PathIndex& index, std::size_t numFeatures, FeatureView x,
                        QualityLabel baseLabel, const EpsilonPolicy& eps = {});

enum class SampleSelection {
  AsGiven,       // caller vouches every row is low quality
  PredictedLow,  // keep rows the model predicts below the top label
  LabeledLow,    // keep rows whose label is below the top label
};

std::string_view to_string(SampleSelection s);
SampleSelection parse_sample_selection(std::string_view s);

struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::size_t sampleSize = 0;
  std::uint64_t seed = 0;
  SampleSelection selection = SampleSelection::AsGiven;
};

NormalizationStats fit_normalization(const PathIndex& index, const ForestModel& model,
                                     const Dataset& sample, const EpsilonPolicy& eps = {},
                                     SampleSelection selection = SampleSelection::AsGiven,
                                     std::uint64_t seed = 0);

inline constexpr double kDegenerateSigma = 1e-12;

struct NormalizedScores {
  std::vector<double> values;
  // Some feature had sigma below kDegenerateSigma while its raw score differed from the mean.
  bool degenerateSigma = false;
};

NormalizedScores normalize_scores(std::span<const double> raw, const NormalizationStats& stats);

enum class Direction { None, Increase, Decrease, Mixed };

std::string_view to_string(Direction d);

// Impact-weighted net sign of the suggested change per feature.
std::vector<Direction> feature_directions(std::span<const ImpactContribution> contributions,
                                          std::size_t numFeatures);

// Category name -> member feature indices. Unlisted features become singleton
// categories named after the feature.
using CategoryMap = std::map<std::string, std::vector<std::size_t>>;

std::map<std::string, double> aggregate_categories(std::span<const double> scores,
                                                   const CategoryMap& categories,
                                                   std::span<const std::string> featureNames = {});

struct ExplainConfig {
  std::size_t topK = 1;
  EpsilonPolicy eps;
  std::optional<CategoryMap> categories;
  std::optional<NormalizationStats> normalization;
};

struct RankedFeature {
  std::size_t feature = 0;
  double score = 0.0;
  Direction direction = Direction::None;

  bool operator==(const RankedFeature&) const = default;
};

struct ImpactReport {
  QualityLabel baseLabel = 0;
  bool noFeedbackNeeded = false;
  RawScores raw;
  std::optional<NormalizedScores> normalized;
  std::vector<Direction> directions;
  std::optional<std::map<std::string, double>> categoryScores;
  std::optional<std::string> topCategory;
  std::vector<RankedFeature> topFeatures;
};

// Ranks features by descending score, ties by ascending index. Only strictly
// positive scores are eligible when `positiveOnly` is set.
std::vector<RankedFeature> rank_features(std::span<const double> scores,
                                         std::span<const Direction> directions,
                                         std::size_t k, bool positiveOnly);

ImpactReport explain(const ForestModel& model, const PathIndex& index, FeatureView x,
                     const ExplainConfig& config);

}  // namespace treeperturb
