#include "treeperturb/decision_path.hpp"

#include <algorithm>

namespace treeperturb {

bool DecisionPath::matches(FeatureView x) const {
  return std::all_of(constraints.begin(), constraints.end(),
                     [&](const FeatureInterval& c) { return c.contains(x[c.feature]); });
}

const FeatureInterval* DecisionPath::constraint_for(std::size_t feature) const {
  const auto it = std::lower_bound(
      constraints.begin(), constraints.end(), feature,
      [](const FeatureInterval& c, std::size_t f) { return c.feature < f; });
  return it != constraints.end() && it->feature == feature ? &*it : nullptr;
}

namespace {

class PathWalker {
 public:
  explicit PathWalker(const Tree& tree) : tree_(tree) {}

  PathExtraction run() {
    walk(tree_.root);
    return std::move(out_);
  }

 private:
  FeatureInterval& interval_for(std::size_t feature) {
    const auto it = std::lower_bound(
        box_.begin(), box_.end(), feature,
        [](const FeatureInterval& c, std::size_t f) { return c.feature < f; });
    if (it != box_.end() && it->feature == feature) return *it;
    return *box_.insert(it, FeatureInterval{feature});
  }

  void walk(NodeId id) {
    if (const auto* in = std::get_if<InternalNode>(&tree_.nodes[id])) {
      const auto saved = box_;
      auto& left = interval_for(in->feature);
      left.upper = std::min(left.upper, in->threshold);
      walk(in->left);
      box_ = saved;
      auto& right = interval_for(in->feature);
      right.lower = std::max(right.lower, in->threshold);
      walk(in->right);
      box_ = saved;
      return;
    }
    const auto& leaf = std::get<LeafNode>(tree_.nodes[id]);
    const std::size_t pathId = nextPathId_++;
    if (std::any_of(box_.begin(), box_.end(), [](const FeatureInterval& c) { return c.empty(); })) {
      ++out_.infeasible;
      return;
    }
    DecisionPath path;
    path.pathId = pathId;
    path.leaf = id;
    path.constraints = box_;
    path.vote = leaf.vote;
    path.classCounts = leaf.classCounts;
    path.confidence = leaf.purity();
    out_.paths.push_back(std::move(path));
  }

  const Tree& tree_;
  std::vector<FeatureInterval> box_;
  std::size_t nextPathId_ = 0;
  PathExtraction out_;
};

}  // namespace

PathExtraction extract_paths(const Tree& tree) { return PathWalker(tree).run(); }

}  // namespace treeperturb
