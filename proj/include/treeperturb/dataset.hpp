#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "treeperturb/types.hpp"

namespace treeperturb {

// Labeled feature rows, optionally tagged with the id of the parent document.
struct Dataset {
  std::vector<FeatureVector> rows;
  std::vector<QualityLabel> labels;
  std::vector<std::string> featureNames;
  std::optional<std::vector<std::string>> docIds;
  std::size_t numLabels = 2;

  std::size_t size() const { return rows.size(); }
  std::size_t num_features() const { return featureNames.size(); }
  bool empty() const { return rows.empty(); }

  void validate() const;
  Dataset subset(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> label_counts() const;

  bool operator==(const Dataset&) const = default;
};

// Reads a CSV with a header row. Every column except the label (and the
// optional id column) is a numeric feature, in header order.
Dataset load_dataset(const std::filesystem::path& csvPath, const std::string& labelColumn,
                     const std::optional<std::string>& idColumn = std::nullopt);
Dataset parse_dataset(std::istream& in, const std::string& labelColumn,
                      const std::optional<std::string>& idColumn = std::nullopt,
                      const std::string& sourceName = "<stream>");

// Writes features, then the label column, then "doc_id" when ids are present.
void write_dataset(std::ostream& out, const Dataset& dataset,
                   const std::string& labelColumn = "label");

// `size` rows drawn without replacement (all rows when size >= dataset size).
Dataset draw_sample(const Dataset& dataset, std::size_t size, std::uint64_t seed);

struct SegmentMap {
  std::map<std::string, QualityLabel> docLabels;
  std::vector<std::pair<std::string, FeatureVector>> segments;
  std::vector<std::string> featureNames;
};

// Each segment inherits the label of its parent document.
Dataset weak_label_segments(const SegmentMap& map);

// Label = numLabels - 1 when every x[feature] > threshold holds, else 0.
struct ThresholdConjunction {
  std::vector<std::pair<std::size_t, double>> terms;
};

// Label = number of cut points strictly below w . x; needs numLabels - 1 cuts.
struct LinearCut {
  std::vector<double> weights;
  std::vector<double> cuts;
};

using PlantedRule = std::variant<ThresholdConjunction, LinearCut>;

struct SynthSpec {
  std::size_t numFeatures = 2;
  std::size_t numRows = 100;
  std::size_t numLabels = 2;
  PlantedRule rule = ThresholdConjunction{{{0, 0.5}}};
  double noiseRate = 0.0;
};

QualityLabel planted_label(const PlantedRule& rule, FeatureView x, std::size_t numLabels);

// Features uniform in [0, 1); with probability noiseRate the planted label is
// replaced by a uniformly chosen different label.
Dataset synth_dataset(const SynthSpec& spec, std::uint64_t seed);

}  // namespace treeperturb
