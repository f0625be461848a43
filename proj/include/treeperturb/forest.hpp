#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "treeperturb/types.hpp"

namespace treeperturb {

struct Dataset;

// Split convention: x[feature] <= threshold descends left, otherwise right.
struct InternalNode {
  std::size_t feature = 0;
  double threshold = 0.0;
  NodeId left = 0;
  NodeId right = 0;

  bool operator==(const InternalNode&) const = default;
};

struct LeafNode {
  QualityLabel vote = 0;
  // Indexed by label; size equals the model's label count.
  std::vector<std::uint64_t> classCounts;

  std::uint64_t total() const;
  // Fraction of the leaf's training samples whose label equals the vote.
  double purity() const;

  bool operator==(const LeafNode&) const = default;
};

using TreeNode = std::variant<InternalNode, LeafNode>;

// Majority label of a count vector; ties go to the lower label.
QualityLabel majority_label(std::span<const std::uint64_t> counts);

struct Tree {
  std::vector<TreeNode> nodes;
  NodeId root = 0;

  const LeafNode& leaf_for(FeatureView x) const;
  NodeId leaf_id_for(FeatureView x) const;
  std::size_t leaf_count() const;

  bool operator==(const Tree&) const = default;
};

struct ForestModel {
  std::vector<Tree> trees;
  std::size_t numFeatures = 0;
  std::size_t numLabels = 0;
  std::vector<std::string> featureNames;

  QualityLabel top_label() const { return static_cast<QualityLabel>(numLabels) - 1; }
  std::string feature_name(std::size_t f) const;

  // Checks structural invariants; throws Error with a description of the first violation.
  void validate() const;

  bool operator==(const ForestModel&) const = default;
};

struct ForestPrediction {
  QualityLabel label = 0;
  // Fraction of trees voting for each label; sums to 1.
  std::vector<double> voteFraction;
};

QualityLabel predict_tree(const Tree& tree, FeatureView x);
ForestPrediction predict_forest(const ForestModel& model, FeatureView x);

struct TrainParams {
  std::size_t numTrees = 10;
  std::size_t maxDepth = 8;
  std::size_t minSamplesLeaf = 1;
  bool bootstrap = true;
  // 0 means every feature is a split candidate at every node.
  std::size_t featureSubsampleCount = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Independent generator for tree `treeIndex` of a forest seeded with `seed`.
std::mt19937_64 tree_rng(std::uint64_t seed, std::size_t treeIndex);

// Greedy CART with Gini impurity over every row of `dataset`.
Tree train_tree(const Dataset& dataset, const TrainParams& params, std::mt19937_64& rng);
Tree train_tree(const Dataset& dataset, std::span<const std::size_t> rows,
                const TrainParams& params, std::mt19937_64& rng);

ForestModel train_forest(const Dataset& dataset, const TrainParams& params);

double accuracy(const ForestModel& model, const Dataset& dataset);

}  // namespace treeperturb
