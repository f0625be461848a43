#include "doctest.h"

#include <cmath>
#include <limits>

#include "support/test_support.hpp"
#include "treeperturb/dataset.hpp"
#include "treeperturb/forest.hpp"
#include "treeperturb/model_io.hpp"

using namespace treeperturb;
using namespace treeperturb::testing;

namespace {

Dataset tiny_dataset(std::vector<FeatureVector> rows, std::vector<QualityLabel> labels) {
  Dataset d;
  d.rows = std::move(rows);
  d.labels = std::move(labels);
  for (std::size_t f = 0; f < d.rows.front().size(); ++f) d.featureNames.push_back("f" + std::to_string(f));
  d.numLabels = 2;
  return d;
}

std::uint64_t total_leaf_samples(const Tree& tree) {
  std::uint64_t total = 0;
  for (const auto& node : tree.nodes) {
    if (const auto* leaf = std::get_if<LeafNode>(&node)) total += leaf->total();
  }
  return total;
}

}  // namespace

TEST_CASE("train_tree: pure dataset yields a single leaf") {
  auto data = tiny_dataset({{0.1}, {0.4}, {0.9}}, {1, 1, 1});
  std::mt19937_64 rng(1);
  const Tree tree = train_tree(data, TrainParams{}, rng);
  REQUIRE(tree.nodes.size() == 1);
  const auto& leaf = std::get<LeafNode>(tree.nodes[0]);
  CHECK(leaf.vote == 1);
  CHECK(leaf.classCounts == std::vector<std::uint64_t>{0, 3});
}

TEST_CASE("train_tree: midpoint split on a two-point set") {
  auto data = tiny_dataset({{0.0}, {10.0}}, {0, 1});
  TrainParams params;
  params.maxDepth = 1;
  std::mt19937_64 rng(1);
  const Tree tree = train_tree(data, params, rng);
  REQUIRE(tree.nodes.size() == 3);
  const auto& root = std::get<InternalNode>(tree.nodes[tree.root]);
  CHECK(root.feature == 0);
  CHECK(root.threshold == 5.0);
  const auto& left = std::get<LeafNode>(tree.nodes[root.left]);
  const auto& right = std::get<LeafNode>(tree.nodes[root.right]);
  CHECK(left.vote == 0);
  CHECK(left.classCounts == std::vector<std::uint64_t>{1, 0});
  CHECK(right.vote == 1);
  CHECK(right.classCounts == std::vector<std::uint64_t>{0, 1});
}

TEST_CASE("train_tree: minSamplesLeaf equal to m forces a majority leaf") {
  auto data = tiny_dataset({{0.0}, {1.0}, {2.0}, {3.0}, {4.0}}, {0, 1, 1, 0, 1});
  TrainParams params;
  params.minSamplesLeaf = data.size();
  std::mt19937_64 rng(3);
  const Tree tree = train_tree(data, params, rng);
  REQUIRE(tree.nodes.size() == 1);
  CHECK(std::get<LeafNode>(tree.nodes[0]).vote == 1);
}

TEST_CASE("train_tree: empty dataset is rejected") {
  Dataset empty;
  empty.featureNames = {"a"};
  std::mt19937_64 rng(0);
  CHECK_THROWS_WITH_AS(train_tree(empty, TrainParams{}, rng), "empty training set", Error);
  CHECK_THROWS_WITH_AS(train_forest(empty, TrainParams{}), "empty training set", Error);
}

TEST_CASE("train_tree: adjacent doubles still separate") {
  const double a = 1.0;
  const double b = std::nextafter(a, 2.0);
  auto data = tiny_dataset({{a}, {b}}, {0, 1});
  std::mt19937_64 rng(0);
  const Tree tree = train_tree(data, TrainParams{}, rng);
  CHECK(predict_tree(tree, std::vector{a}) == 0);
  CHECK(predict_tree(tree, std::vector{b}) == 1);
}

TEST_CASE("train_forest: one tree without bootstrap equals train_tree") {
  const auto data = synth_dataset({3, 200, 2, ThresholdConjunction{{{0, 0.4}, {2, 0.3}}}, 0.05}, 11);
  TrainParams params;
  params.numTrees = 1;
  params.bootstrap = false;
  params.featureSubsampleCount = 2;
  params.seed = 99;
  const auto forest = train_forest(data, params);
  auto rng = tree_rng(params.seed, 0);
  const Tree single = train_tree(data, params, rng);
  REQUIRE(forest.trees.size() == 1);
  CHECK(forest.trees[0] == single);
}

TEST_CASE("train_forest: determinism and count conservation") {
  const auto data = synth_dataset({4, 300, 3, LinearCut{{1, 1, 0, 0}, {0.7, 1.3}}, 0.1}, 5);
  TrainParams params;
  params.numTrees = 6;
  params.maxDepth = 6;
  params.featureSubsampleCount = 2;
  params.seed = 1234;
  const auto a = train_forest(data, params);
  const auto b = train_forest(data, params);
  CHECK(serialize_model(a) == serialize_model(b));
  a.validate();
  for (const auto& tree : a.trees) {
    CHECK(total_leaf_samples(tree) == data.size());
    for (const auto& node : tree.nodes) {
      if (const auto* leaf = std::get_if<LeafNode>(&node)) {
        CHECK(leaf->vote == majority_label(leaf->classCounts));
      }
    }
  }
  params.seed = 1235;
  CHECK(serialize_model(train_forest(data, params)) != serialize_model(a));
}

TEST_CASE("train_forest: separable 2-D data is fit") {
  const auto data = synth_dataset({2, 500, 2, LinearCut{{1, -1}, {0.0}}, 0.0}, 21);
  TrainParams params;
  params.numTrees = 10;
  params.maxDepth = 8;
  params.seed = 3;
  const auto model = train_forest(data, params);
  // Measured 0.996 on this set.
  CHECK(accuracy(model, data) >= 0.95);
}

TEST_CASE("predict_tree on the fixture") {
  const auto model = worked_example_model();
  const auto& tree = model.trees[0];
  CHECK(predict_tree(tree, std::vector{10.0, 30.0}) == 0);
  CHECK(predict_tree(tree, std::vector{10.0, 10.0}) == 1);
  CHECK(tree.leaf_for(std::vector{10.0, 10.0}).purity() == doctest::Approx(0.95));
  CHECK(predict_tree(tree, std::vector{30.0, 12.0}) == 1);
  CHECK_THROWS_AS(predict_tree(tree, std::vector{std::nan(""), 1.0}), Error);
  CHECK_THROWS_AS(predict_tree(tree, std::vector{std::numeric_limits<double>::infinity(), 1.0}), Error);
}

TEST_CASE("predict_tree: single leaf answers its vote everywhere") {
  Tree tree;
  tree.nodes = {LeafNode{1, {2, 5}}};
  CHECK(predict_tree(tree, std::vector{-1e300}) == 1);
  CHECK(predict_tree(tree, std::vector{42.0}) == 1);
}

namespace {

ForestModel stump_forest(std::vector<QualityLabel> votes) {
  ForestModel model;
  model.numFeatures = 1;
  model.numLabels = 2;
  model.featureNames = {"x"};
  for (auto v : votes) {
    Tree t;
    std::vector<std::uint64_t> counts{0, 0};
    counts[static_cast<std::size_t>(v)] = 1;
    t.nodes = {LeafNode{v, counts}};
    model.trees.push_back(t);
  }
  return model;
}

}  // namespace

TEST_CASE("predict_forest: plurality with lower-label ties") {
  const std::vector x{0.0};
  auto p = predict_forest(stump_forest({1, 1, 0}), x);
  CHECK(p.label == 1);
  CHECK(p.voteFraction[1] == doctest::Approx(2.0 / 3.0));
  CHECK(p.voteFraction[0] == doctest::Approx(1.0 / 3.0));

  p = predict_forest(stump_forest({1, 1}), x);
  CHECK(p.label == 1);
  CHECK(p.voteFraction[1] == 1.0);

  p = predict_forest(stump_forest({0, 1}), x);
  CHECK(p.label == 0);

  CHECK_THROWS_AS(predict_forest(stump_forest({0}), std::vector{1.0, 2.0}), Error);
}

TEST_CASE("majority_label breaks ties toward the lower label") {
  CHECK(majority_label(std::vector<std::uint64_t>{3, 3}) == 0);
  CHECK(majority_label(std::vector<std::uint64_t>{1, 4, 4}) == 1);
  CHECK(majority_label(std::vector<std::uint64_t>{0, 0, 1}) == 2);
}

TEST_CASE("ForestModel::validate catches malformed trees") {
  auto model = worked_example_model();
  model.validate();

  auto bad = model;
  std::get<InternalNode>(bad.trees[0].nodes[0]).feature = 7;
  CHECK_THROWS_AS(bad.validate(), Error);

  bad = model;
  std::get<InternalNode>(bad.trees[0].nodes[1]).right = 2;  // node 2 referenced twice
  CHECK_THROWS_AS(bad.validate(), Error);

  bad = model;
  std::get<LeafNode>(bad.trees[0].nodes[2]).vote = 0;  // not the majority
  CHECK_THROWS_AS(bad.validate(), Error);
}
