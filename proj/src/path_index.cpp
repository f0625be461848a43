#include "treeperturb/path_index.hpp"

#include <numeric>
#include <string>

namespace treeperturb {

PathIndex PathIndex::build(const ForestModel& model) {
  PathIndex index;
  index.buckets_.resize(model.numLabels);
  std::vector<IndexedPath> all;
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    auto extracted = extract_paths(model.trees[t]);
    index.infeasible_ += extracted.infeasible;
    for (auto& path : extracted.paths) {
      all.push_back({static_cast<TreeId>(t), std::move(path)});
    }
  }
  for (const auto& p : all) index.buckets_[static_cast<std::size_t>(p.path.vote)].push_back(p);

  // above_[L] keeps global (tree, leaf) order rather than bucket order so that
  // accumulation over it matches a plain scan of the forest.
  index.above_.resize(model.numLabels);
  for (std::size_t label = 0; label < model.numLabels; ++label) {
    for (const auto& p : all) {
      if (static_cast<std::size_t>(p.path.vote) > label) index.above_[label].push_back(p);
    }
  }
  return index;
}

std::span<const IndexedPath> PathIndex::paths_above(QualityLabel label) const {
  if (label < 0 || static_cast<std::size_t>(label) >= above_.size()) {
    throw Error("label " + std::to_string(label) + " out of range");
  }
  return above_[static_cast<std::size_t>(label)];
}

std::span<const IndexedPath> PathIndex::bucket(QualityLabel vote) const {
  if (vote < 0 || static_cast<std::size_t>(vote) >= buckets_.size()) {
    throw Error("label " + std::to_string(vote) + " out of range");
  }
  return buckets_[static_cast<std::size_t>(vote)];
}

std::size_t PathIndex::size() const {
  return std::accumulate(buckets_.begin(), buckets_.end(), std::size_t{0},
                         [](std::size_t acc, const auto& b) { return acc + b.size(); });
}

}  // namespace treeperturb
