#include <algorithm>
#include <numeric>

#include "treeperturb/dataset.hpp"
#include "treeperturb/forest.hpp"

namespace treeperturb {

void TrainParams::validate() const {
  if (numTrees < 1) throw Error("numTrees must be >= 1");
  if (maxDepth < 1) throw Error("maxDepth must be >= 1");
  if (minSamplesLeaf < 1) throw Error("minSamplesLeaf must be >= 1");
}

std::mt19937_64 tree_rng(std::uint64_t seed, std::size_t treeIndex) {
  // splitmix64 over (seed, treeIndex) gives well-separated per-tree streams.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(treeIndex) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return std::mt19937_64(z);
}

namespace {

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = -1.0;  // sum over children of (sum of squared counts) / size; larger is purer
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const TrainParams& params, std::mt19937_64& rng)
      : data_(data), params_(params), rng_(rng), features_(data.num_features()) {
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  Tree build(std::vector<std::size_t> rows) {
    tree_.root = grow(rows, 0);
    return std::move(tree_);
  }

 private:
  std::vector<std::uint64_t> count_labels(std::span<const std::size_t> rows) const {
    std::vector<std::uint64_t> counts(data_.numLabels, 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(data_.labels[r])];
    return counts;
  }

  NodeId make_leaf(std::vector<std::uint64_t> counts) {
    const auto id = static_cast<NodeId>(tree_.nodes.size());
    LeafNode leaf;
    leaf.vote = majority_label(counts);
    leaf.classCounts = std::move(counts);
    tree_.nodes.emplace_back(std::move(leaf));
    return id;
  }

  std::span<const std::size_t> candidate_features() {
    const std::size_t k = params_.featureSubsampleCount;
    if (k == 0 || k >= features_.size()) return features_;
    // Partial Fisher-Yates: the first k entries become a uniform sample.
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, features_.size() - 1);
      std::swap(features_[i], features_[pick(rng_)]);
    }
    return std::span<const std::size_t>(features_).first(k);
  }

  void scan_feature(std::size_t feature, std::span<const std::size_t> rows,
                    const std::vector<std::uint64_t>& parent, SplitChoice& best) {
    sorted_.clear();
    for (std::size_t r : rows) sorted_.emplace_back(data_.rows[r][feature], data_.labels[r]);
    std::sort(sorted_.begin(), sorted_.end());

    std::vector<std::uint64_t> left(parent.size(), 0);
    std::vector<std::uint64_t> right = parent;
    std::uint64_t sqLeft = 0;
    std::uint64_t sqRight = 0;
    for (auto c : right) sqRight += c * c;

    const std::size_t m = sorted_.size();
    const std::size_t minLeaf = params_.minSamplesLeaf;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const auto y = static_cast<std::size_t>(sorted_[i].second);
      sqLeft += 2 * left[y] + 1;
      sqRight -= 2 * right[y] - 1;
      ++left[y];
      --right[y];
      if (sorted_[i].first == sorted_[i + 1].first) continue;
      const std::size_t nl = i + 1;
      const std::size_t nr = m - nl;
      if (nl < minLeaf || nr < minLeaf) continue;
      const double score = static_cast<double>(sqLeft) / static_cast<double>(nl) +
                           static_cast<double>(sqRight) / static_cast<double>(nr);
      if (score > best.score) {
        const double lo = sorted_[i].first;
        const double hi = sorted_[i + 1].first;
        double mid = std::midpoint(lo, hi);
        if (!(mid < hi)) mid = lo;
        best = {feature, mid, score};
      }
    }
  }

  NodeId grow(std::span<std::size_t> rows, std::size_t depth) {
    auto counts = count_labels(rows);
    const bool pure = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) <= 1;
    if (pure || depth >= params_.maxDepth || rows.size() < 2 * params_.minSamplesLeaf) {
      return make_leaf(std::move(counts));
    }

    SplitChoice best;
    for (std::size_t f : candidate_features()) scan_feature(f, rows, counts, best);
    if (best.score < 0.0) return make_leaf(std::move(counts));

    const auto id = static_cast<NodeId>(tree_.nodes.size());
    tree_.nodes.emplace_back(InternalNode{best.feature, best.threshold, 0, 0});
    const auto mid = std::stable_partition(rows.begin(), rows.end(), [&](std::size_t r) {
      return data_.rows[r][best.feature] <= best.threshold;
    });
    const auto nLeft = static_cast<std::size_t>(std::distance(rows.begin(), mid));
    const NodeId left = grow(rows.first(nLeft), depth + 1);
    const NodeId right = grow(rows.subspan(nLeft), depth + 1);
    auto& node = std::get<InternalNode>(tree_.nodes[id]);
    node.left = left;
    node.right = right;
    return id;
  }

  const Dataset& data_;
  const TrainParams& params_;
  std::mt19937_64& rng_;
  std::vector<std::size_t> features_;
  std::vector<std::pair<double, QualityLabel>> sorted_;
  Tree tree_;
};

void check_trainable(const Dataset& dataset) {
  if (dataset.empty()) throw Error("empty training set");
  dataset.validate();
}

}  // namespace

Tree train_tree(const Dataset& dataset, std::span<const std::size_t> rows,
                const TrainParams& params, std::mt19937_64& rng) {
  check_trainable(dataset);
  params.validate();
  if (rows.empty()) throw Error("empty training set");
  return TreeBuilder(dataset, params, rng).build({rows.begin(), rows.end()});
}

Tree train_tree(const Dataset& dataset, const TrainParams& params, std::mt19937_64& rng) {
  std::vector<std::size_t> rows(dataset.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return train_tree(dataset, rows, params, rng);
}

ForestModel train_forest(const Dataset& dataset, const TrainParams& params) {
  check_trainable(dataset);
  params.validate();

  ForestModel model;
  model.numFeatures = dataset.num_features();
  model.numLabels = dataset.numLabels;
  model.featureNames = dataset.featureNames;
  model.trees.reserve(params.numTrees);

  const std::size_t m = dataset.size();
  std::vector<std::size_t> bag(m);
  for (std::size_t t = 0; t < params.numTrees; ++t) {
    auto rng = tree_rng(params.seed, t);
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> draw(0, m - 1);
      for (auto& r : bag) r = draw(rng);
    } else {
      std::iota(bag.begin(), bag.end(), std::size_t{0});
    }
    model.trees.push_back(train_tree(dataset, bag, params, rng));
  }
  return model;
}

}  // namespace treeperturb
