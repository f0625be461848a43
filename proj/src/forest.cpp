#include "treeperturb/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "treeperturb/dataset.hpp"

namespace treeperturb {

void check_instance(FeatureView x, std::size_t numFeatures) {
  if (x.size() != numFeatures) {
    std::ostringstream msg;
    msg << "instance has " << x.size() << " features, model expects " << numFeatures;
    throw Error(msg.str());
  }
  for (std::size_t f = 0; f < x.size(); ++f) {
    if (!std::isfinite(x[f])) {
      std::ostringstream msg;
      msg << "non-finite value at feature " << f;
      throw Error(msg.str());
    }
  }
}

std::uint64_t LeafNode::total() const {
  return std::accumulate(classCounts.begin(), classCounts.end(), std::uint64_t{0});
}

double LeafNode::purity() const {
  const auto n = total();
  if (n == 0 || vote < 0 || static_cast<std::size_t>(vote) >= classCounts.size()) return 0.0;
  return static_cast<double>(classCounts[static_cast<std::size_t>(vote)]) /
         static_cast<double>(n);
}

QualityLabel majority_label(std::span<const std::uint64_t> counts) {
  // max_element returns the first maximum, i.e. the lowest label on ties.
  const auto it = std::max_element(counts.begin(), counts.end());
  return static_cast<QualityLabel>(std::distance(counts.begin(), it));
}

NodeId Tree::leaf_id_for(FeatureView x) const {
  NodeId id = root;
  while (const auto* node = std::get_if<InternalNode>(&nodes[id])) {
    id = x[node->feature] <= node->threshold ? node->left : node->right;
  }
  return id;
}

const LeafNode& Tree::leaf_for(FeatureView x) const {
  return std::get<LeafNode>(nodes[leaf_id_for(x)]);
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) {
    return std::holds_alternative<LeafNode>(n);
  }));
}

std::string ForestModel::feature_name(std::size_t f) const {
  if (f < featureNames.size() && !featureNames[f].empty()) return featureNames[f];
  return "f" + std::to_string(f);
}

namespace {

[[noreturn]] void fail(std::size_t tree, std::size_t node, const std::string& what) {
  std::ostringstream msg;
  msg << "tree " << tree << " node " << node << ": " << what;
  throw Error(msg.str());
}

}  // namespace

void ForestModel::validate() const {
  if (numFeatures == 0) throw Error("model has no features");
  if (numLabels == 0) throw Error("model has no labels");
  if (!featureNames.empty() && featureNames.size() != numFeatures) {
    throw Error("featureNames length differs from numFeatures");
  }
  if (trees.empty()) throw Error("model has no trees");
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const Tree& tree = trees[t];
    if (tree.nodes.empty()) fail(t, 0, "tree has no nodes");
    if (tree.root >= tree.nodes.size()) fail(t, tree.root, "root id out of range");
    std::vector<int> refs(tree.nodes.size(), 0);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      if (const auto* in = std::get_if<InternalNode>(&tree.nodes[i])) {
        if (in->feature >= numFeatures) fail(t, i, "feature index out of range");
        if (!std::isfinite(in->threshold)) fail(t, i, "non-finite threshold");
        for (NodeId child : {in->left, in->right}) {
          if (child >= tree.nodes.size()) fail(t, i, "dangling child id " + std::to_string(child));
          ++refs[child];
        }
      } else {
        const auto& leaf = std::get<LeafNode>(tree.nodes[i]);
        if (leaf.classCounts.size() != numLabels) fail(t, i, "classCounts length differs from numLabels");
        if (leaf.total() == 0) fail(t, i, "leaf classCounts are all zero");
        if (leaf.vote < 0 || static_cast<std::size_t>(leaf.vote) >= numLabels) {
          fail(t, i, "vote out of range");
        }
        const auto best = *std::max_element(leaf.classCounts.begin(), leaf.classCounts.end());
        if (leaf.classCounts[static_cast<std::size_t>(leaf.vote)] != best) {
          fail(t, i, "vote is not a majority of classCounts");
        }
      }
    }
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const int expected = i == tree.root ? 0 : 1;
      if (refs[i] != expected) fail(t, i, "node referenced " + std::to_string(refs[i]) + " times");
    }
    // Exactly-once references can still hide a cycle detached from the root.
    std::size_t reached = 0;
    std::vector<NodeId> stack{tree.root};
    while (!stack.empty()) {
      const NodeId id = stack.back();
      stack.pop_back();
      if (++reached > tree.nodes.size()) break;
      if (const auto* in = std::get_if<InternalNode>(&tree.nodes[id])) {
        stack.push_back(in->left);
        stack.push_back(in->right);
      }
    }
    if (reached != tree.nodes.size()) fail(t, tree.root, "nodes unreachable from root");
  }
}

QualityLabel predict_tree(const Tree& tree, FeatureView x) {
  for (double v : x) {
    if (!std::isfinite(v)) throw Error("non-finite feature value");
  }
  return tree.leaf_for(x).vote;
}

ForestPrediction predict_forest(const ForestModel& model, FeatureView x) {
  check_instance(x, model.numFeatures);
  std::vector<std::uint64_t> votes(model.numLabels, 0);
  for (const Tree& tree : model.trees) ++votes[static_cast<std::size_t>(tree.leaf_for(x).vote)];
  ForestPrediction out;
  out.label = majority_label(votes);
  out.voteFraction.resize(model.numLabels);
  const double n = static_cast<double>(model.trees.size());
  for (std::size_t l = 0; l < votes.size(); ++l) out.voteFraction[l] = static_cast<double>(votes[l]) / n;
  return out;
}

double accuracy(const ForestModel& model, const Dataset& dataset) {
  if (dataset.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (predict_forest(model, dataset.rows[i]).label == dataset.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(dataset.size());
}

}  // namespace treeperturb
