#include "treeperturb/exhaustive.hpp"

#include <algorithm>
#include <limits>

namespace treeperturb {

std::vector<std::vector<double>> exhaustive_candidates(const ForestModel& model, FeatureView x,
                                                       const EpsilonPolicy& eps) {
  std::vector<std::vector<double>> thresholds(model.numFeatures);
  for (const Tree& tree : model.trees) {
    for (const TreeNode& node : tree.nodes) {
      if (const auto* in = std::get_if<InternalNode>(&node)) {
        thresholds[in->feature].push_back(in->threshold);
        thresholds[in->feature].push_back(in->threshold + eps.margin_for(in->threshold));
      }
    }
  }
  std::vector<std::vector<double>> out(model.numFeatures);
  for (std::size_t f = 0; f < model.numFeatures; ++f) {
    auto& t = thresholds[f];
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    // Slot 0 is always the unperturbed value.
    out[f].push_back(x[f]);
    for (double v : t) {
      if (v != x[f]) out[f].push_back(v);
    }
  }
  return out;
}

ExhaustiveResult score_exhaustive(const ForestModel& model, FeatureView x,
                                  const ExhaustiveConfig& config) {
  check_instance(x, model.numFeatures);
  if (model.numFeatures > config.maxFeatures) {
    throw Error("instance too large for exhaustive oracle");
  }
  ExhaustiveResult result;
  result.candidates = exhaustive_candidates(model, x, config.eps);
  std::uint64_t total = 1;
  for (const auto& c : result.candidates) {
    if (total > config.maxGridPoints / c.size()) throw Error("instance too large for exhaustive oracle");
    total *= c.size();
  }

  const std::size_t n = model.numFeatures;
  const QualityLabel base = predict_forest(model, x).label;
  RawScores& raw = result.raw;
  raw.baseLabel = base;
  raw.scores.assign(n, 0.0);

  std::vector<std::size_t> digit(n, 0);
  FeatureVector y(x.begin(), x.end());
  std::vector<std::uint64_t> votes(model.numLabels);
  for (std::uint64_t combo = 0; combo < total; ++combo) {
    if (combo > 0) {
      // Mixed-radix increment over the per-feature candidate lists.
      for (std::size_t f = 0; f < n; ++f) {
        if (++digit[f] < result.candidates[f].size()) {
          y[f] = result.candidates[f][digit[f]];
          break;
        }
        digit[f] = 0;
        y[f] = result.candidates[f][0];
      }
    }
    ++result.gridPoints;

    std::fill(votes.begin(), votes.end(), 0);
    for (const Tree& tree : model.trees) ++votes[static_cast<std::size_t>(tree.leaf_for(y).vote)];
    const QualityLabel label = majority_label(votes);
    if (label <= base) continue;
    ++result.improving;

    Perturbation p;
    for (std::size_t f = 0; f < n; ++f) {
      if (digit[f] != 0) p.deltas.push_back({f, y[f] - x[f]});
    }
    const double confidence =
        static_cast<double>(votes[static_cast<std::size_t>(label)]) /
        static_cast<double>(model.trees.size());
    const QualityLabel gain = label - base;
    const double impact = static_cast<double>(gain) / static_cast<double>(p.hamming()) * confidence;
    for (const auto& d : p.deltas) raw.scores[d.feature] += impact;
    if (config.recordContributions) {
      ImpactContribution c;
      c.treeId = std::numeric_limits<TreeId>::max();
      c.delta = p.hamming();
      c.perturbation = std::move(p);
      c.confidence = confidence;
      c.voteGain = gain;
      c.impact = impact;
      raw.contributions.push_back(std::move(c));
    }
  }
  return result;
}

}  // namespace treeperturb
