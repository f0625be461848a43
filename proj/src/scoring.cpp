#include "treeperturb/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "treeperturb/dataset.hpp"

namespace treeperturb {

std::optional<ImpactContribution> path_impact(FeatureView x, const DecisionPath& path,
                                              QualityLabel baseLabel, const EpsilonPolicy& eps) {
  if (path.vote <= baseLabel) throw Error("path does not improve on the base label");
  Perturbation p = min_perturbation(x, path, eps);
  const std::size_t delta = p.hamming();
  if (delta == 0) return std::nullopt;

  ImpactContribution c;
  c.pathId = path.pathId;
  c.perturbation = std::move(p);
  c.delta = delta;
  c.confidence = path.confidence;
  c.voteGain = path.vote - baseLabel;
  c.impact = static_cast<double>(c.voteGain) / static_cast<double>(delta) * c.confidence;
  return c;
}

RawScores score_against(const PathIndex& index, std::size_t numFeatures, FeatureView x,
                        QualityLabel baseLabel, const EpsilonPolicy& eps) {
  check_instance(x, numFeatures);
  RawScores out;
  out.baseLabel = baseLabel;
  out.scores.assign(numFeatures, 0.0);
  for (const IndexedPath& entry : index.paths_above(baseLabel)) {
    auto c = path_impact(x, entry.path, baseLabel, eps);
    if (!c) continue;
    c->treeId = entry.treeId;
    for (const auto& d : c->perturbation.deltas) out.scores[d.feature] += c->impact;
    out.contributions.push_back(std::move(*c));
  }
  return out;
}

RawScores score_features(const PathIndex& index, const ForestModel& model, FeatureView x,
                         const EpsilonPolicy& eps) {
  const auto prediction = predict_forest(model, x);
  return score_against(index, model.numFeatures, x, prediction.label, eps);
}

std::string_view to_string(SampleSelection s) {
  switch (s) {
    case SampleSelection::AsGiven: return "as-given";
    case SampleSelection::PredictedLow: return "predicted";
    case SampleSelection::LabeledLow: return "labeled";
  }
  return "as-given";
}

SampleSelection parse_sample_selection(std::string_view s) {
  if (s == "as-given") return SampleSelection::AsGiven;
  if (s == "predicted") return SampleSelection::PredictedLow;
  if (s == "labeled") return SampleSelection::LabeledLow;
  throw Error("unknown sample selection '" + std::string(s) + "'");
}

NormalizationStats fit_normalization(const PathIndex& index, const ForestModel& model,
                                     const Dataset& sample, const EpsilonPolicy& eps,
                                     SampleSelection selection, std::uint64_t seed) {
  const std::size_t n = model.numFeatures;
  std::vector<std::vector<double>> scores;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto& row = sample.rows[i];
    const auto prediction = predict_forest(model, row);
    if (selection == SampleSelection::PredictedLow && prediction.label >= model.top_label()) continue;
    if (selection == SampleSelection::LabeledLow && sample.labels[i] >= model.top_label()) continue;
    scores.push_back(score_against(index, n, row, prediction.label, eps).scores);
  }
  if (scores.size() < 2) {
    std::ostringstream msg;
    msg << "normalization sample needs at least 2 rows, got " << scores.size();
    throw Error(msg.str());
  }

  NormalizationStats stats;
  stats.sampleSize = scores.size();
  stats.seed = seed;
  stats.selection = selection;
  stats.mean.assign(n, 0.0);
  stats.stddev.assign(n, 0.0);
  const double m = static_cast<double>(scores.size());
  for (const auto& s : scores) {
    for (std::size_t f = 0; f < n; ++f) stats.mean[f] += s[f];
  }
  for (auto& mu : stats.mean) mu /= m;
  for (const auto& s : scores) {
    for (std::size_t f = 0; f < n; ++f) {
      const double d = s[f] - stats.mean[f];
      stats.stddev[f] += d * d;
    }
  }
  for (auto& sd : stats.stddev) sd = std::sqrt(sd / m);
  return stats;
}

NormalizedScores normalize_scores(std::span<const double> raw, const NormalizationStats& stats) {
  if (stats.mean.size() != raw.size() || stats.stddev.size() != raw.size()) {
    std::ostringstream msg;
    msg << "normalization stats have dimension " << stats.mean.size() << ", scores have "
        << raw.size();
    throw Error(msg.str());
  }
  NormalizedScores out;
  out.values.resize(raw.size());
  for (std::size_t f = 0; f < raw.size(); ++f) {
    if (stats.stddev[f] < kDegenerateSigma) {
      out.values[f] = 0.0;
      if (raw[f] != stats.mean[f]) out.degenerateSigma = true;
    } else {
      out.values[f] = (raw[f] - stats.mean[f]) / stats.stddev[f];
    }
  }
  return out;
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::None: return "none";
    case Direction::Increase: return "increase";
    case Direction::Decrease: return "decrease";
    case Direction::Mixed: return "mixed";
  }
  return "none";
}

std::vector<Direction> feature_directions(std::span<const ImpactContribution> contributions,
                                          std::size_t numFeatures) {
  std::vector<double> net(numFeatures, 0.0);
  std::vector<bool> touched(numFeatures, false);
  for (const auto& c : contributions) {
    for (const auto& d : c.perturbation.deltas) {
      if (d.feature >= numFeatures) throw Error("contribution touches unknown feature");
      touched[d.feature] = true;
      net[d.feature] += d.delta > 0.0 ? c.impact : -c.impact;
    }
  }
  std::vector<Direction> out(numFeatures, Direction::None);
  for (std::size_t f = 0; f < numFeatures; ++f) {
    if (!touched[f]) continue;
    out[f] = net[f] > 0.0 ? Direction::Increase : net[f] < 0.0 ? Direction::Decrease : Direction::Mixed;
  }
  return out;
}

std::map<std::string, double> aggregate_categories(std::span<const double> scores,
                                                   const CategoryMap& categories,
                                                   std::span<const std::string> featureNames) {
  std::map<std::string, double> out;
  std::vector<bool> assigned(scores.size(), false);
  for (const auto& [name, members] : categories) {
    if (members.empty()) throw Error("empty category '" + name + "'");
    double sum = 0.0;
    for (std::size_t f : members) {
      if (f >= scores.size()) {
        throw Error("category '" + name + "' references feature " + std::to_string(f) +
                    " out of range");
      }
      if (assigned[f]) throw Error("feature " + std::to_string(f) + " belongs to two categories");
      assigned[f] = true;
      sum += scores[f];
    }
    out[name] = sum / static_cast<double>(members.size());
  }
  for (std::size_t f = 0; f < scores.size(); ++f) {
    if (assigned[f]) continue;
    std::string name = f < featureNames.size() && !featureNames[f].empty() ? featureNames[f]
                                                                           : "f" + std::to_string(f);
    if (!out.emplace(name, scores[f]).second) {
      throw Error("singleton category '" + name + "' collides with a named category");
    }
  }
  return out;
}

std::vector<RankedFeature> rank_features(std::span<const double> scores,
                                         std::span<const Direction> directions, std::size_t k,
                                         bool positiveOnly) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RankedFeature> out;
  for (std::size_t f : order) {
    if (out.size() >= k) break;
    if (positiveOnly && !(scores[f] > 0.0)) continue;
    out.push_back({f, scores[f], f < directions.size() ? directions[f] : Direction::None});
  }
  return out;
}

ImpactReport explain(const ForestModel& model, const PathIndex& index, FeatureView x,
                     const ExplainConfig& config) {
  if (config.topK < 1 || config.topK > model.numFeatures) {
    throw Error("topK must be between 1 and " + std::to_string(model.numFeatures));
  }
  config.eps.validate();

  ImpactReport report;
  report.raw = score_features(index, model, x, config.eps);
  report.baseLabel = report.raw.baseLabel;
  report.directions = feature_directions(report.raw.contributions, model.numFeatures);
  report.noFeedbackNeeded = report.baseLabel >= model.top_label();

  std::span<const double> ranking = report.raw.scores;
  if (config.normalization && !report.noFeedbackNeeded) {
    report.normalized = normalize_scores(report.raw.scores, *config.normalization);
    ranking = report.normalized->values;
  }
  if (config.categories) {
    report.categoryScores = aggregate_categories(ranking, *config.categories, model.featureNames);
    if (!report.noFeedbackNeeded) {
      const auto best = std::max_element(
          report.categoryScores->begin(), report.categoryScores->end(),
          [](const auto& a, const auto& b) { return a.second < b.second; });
      if (best != report.categoryScores->end()) report.topCategory = best->first;
    }
  }
  if (!report.noFeedbackNeeded) {
    report.topFeatures =
        rank_features(ranking, report.directions, config.topK, !report.normalized.has_value());
  }
  return report;
}

}  // namespace treeperturb
