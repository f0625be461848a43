#include "test_support.hpp"

#include <cstring>

#ifndef TREEPERTURB_FIXTURE_DIR
#error "TREEPERTURB_FIXTURE_DIR must be defined"
#endif

namespace treeperturb::testing {

std::string fixture_path(const std::string& name) {
  return std::string(TREEPERTURB_FIXTURE_DIR) + "/" + name;
}

ForestModel worked_example_model() {
  auto leaf = [](QualityLabel vote, std::uint64_t low, std::uint64_t high) {
    return TreeNode{LeafNode{vote, {low, high}}};
  };
  Tree tree;
  tree.nodes = {
      InternalNode{kEmotion, 10.0, 1, 4},
      InternalNode{kLength, 20.0, 2, 3},
      leaf(1, 1, 19),  // A
      leaf(0, 3, 2),   // B
      InternalNode{kEmotion, 15.0, 5, 8},
      InternalNode{kLength, 20.0, 6, 7},
      leaf(0, 6, 4),   // C
      leaf(1, 3, 9),   // D
      leaf(0, 8, 2),   // E
  };
  tree.root = 0;
  ForestModel model;
  model.trees.push_back(std::move(tree));
  model.numFeatures = 2;
  model.numLabels = 2;
  model.featureNames = {"length", "emotion"};
  return model;
}

namespace {

NodeId grow(Tree& tree, std::mt19937_64& rng, const RandomTreeSpec& spec, std::size_t depth) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto id = static_cast<NodeId>(tree.nodes.size());
  if (depth < spec.maxDepth && unit(rng) < spec.splitProbability) {
    std::uniform_int_distribution<std::size_t> feature(0, spec.numFeatures - 1);
    std::uniform_int_distribution<int> grid(0, spec.thresholdGrid);
    tree.nodes.emplace_back(InternalNode{feature(rng), static_cast<double>(grid(rng)), 0, 0});
    const NodeId left = grow(tree, rng, spec, depth + 1);
    const NodeId right = grow(tree, rng, spec, depth + 1);
    auto& node = std::get<InternalNode>(tree.nodes[id]);
    node.left = left;
    node.right = right;
    return id;
  }
  std::uniform_int_distribution<std::uint64_t> count(0, 12);
  LeafNode leaf;
  leaf.classCounts.resize(spec.numLabels);
  for (auto& c : leaf.classCounts) c = count(rng);
  leaf.classCounts[std::uniform_int_distribution<std::size_t>(0, spec.numLabels - 1)(rng)] += 1;
  leaf.vote = majority_label(leaf.classCounts);
  tree.nodes.emplace_back(std::move(leaf));
  return id;
}

}  // namespace

Tree random_tree(std::mt19937_64& rng, const RandomTreeSpec& spec) {
  Tree tree;
  tree.root = grow(tree, rng, spec, 0);
  return tree;
}

ForestModel random_forest(std::mt19937_64& rng, std::size_t numTrees, const RandomTreeSpec& spec) {
  ForestModel model;
  model.numFeatures = spec.numFeatures;
  model.numLabels = spec.numLabels;
  for (std::size_t f = 0; f < spec.numFeatures; ++f) model.featureNames.push_back("f" + std::to_string(f));
  for (std::size_t t = 0; t < numTrees; ++t) model.trees.push_back(random_tree(rng, spec));
  return model;
}

FeatureVector random_instance(std::mt19937_64& rng, const RandomTreeSpec& spec) {
  std::uniform_int_distribution<int> half(-2, 2 * spec.thresholdGrid + 2);
  FeatureVector x(spec.numFeatures);
  for (auto& v : x) v = 0.5 * half(rng);
  return x;
}

RawScores naive_scan_scores(const ForestModel& model, FeatureView x, QualityLabel baseLabel,
                            const EpsilonPolicy& eps) {
  RawScores out;
  out.baseLabel = baseLabel;
  out.scores.assign(model.numFeatures, 0.0);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    for (const auto& path : extract_paths(model.trees[t]).paths) {
      if (path.vote <= baseLabel) continue;
      auto c = path_impact(x, path, baseLabel, eps);
      if (!c) continue;
      c->treeId = static_cast<TreeId>(t);
      for (const auto& d : c->perturbation.deltas) out.scores[d.feature] += c->impact;
      out.contributions.push_back(std::move(*c));
    }
  }
  return out;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace treeperturb::testing
