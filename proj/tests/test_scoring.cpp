#include "doctest.h"

#include <cmath>

#include "support/test_support.hpp"
#include "treeperturb/dataset.hpp"
#include "treeperturb/scoring.hpp"

using namespace treeperturb;
using namespace treeperturb::testing;

namespace {

const std::vector<double> kExampleInstance{10.0, 30.0};

// Hand evaluation of vote gain / hamming * leaf purity for the fixture's two
// high-quality leaves: A = 19/20 with one edit, D = 9/12 with two edits.
const double kImpactA = (1.0 - 0.0) / 1.0 * (19.0 / 20.0);
const double kImpactD = (1.0 - 0.0) / 2.0 * (9.0 / 12.0);

}  // namespace

TEST_CASE("path_impact on the fixture") {
  const auto extraction = extract_paths(worked_example_model().trees[0]);
  const auto a = path_impact(kExampleInstance, extraction.paths[0], 0);
  REQUIRE(a);
  CHECK(a->delta == 1);
  CHECK(a->confidence == 0.95);
  CHECK(a->voteGain == 1);
  CHECK(a->impact == doctest::Approx(kImpactA).epsilon(1e-15));

  const auto d = path_impact(kExampleInstance, extraction.paths[3], 0);
  REQUIRE(d);
  CHECK(d->delta == 2);
  CHECK(d->confidence == 0.75);
  CHECK(d->impact == doctest::Approx(kImpactD).epsilon(1e-15));

  CHECK_FALSE(path_impact(std::vector{5.0, 5.0}, extraction.paths[0], 0).has_value());
  CHECK_THROWS_AS(path_impact(kExampleInstance, extraction.paths[1], 0), Error);
}

TEST_CASE("score_features on the fixture") {
  const auto model = worked_example_model();
  const auto index = build_index(model);
  const auto raw = score_features(index, model, kExampleInstance);
  CHECK(raw.baseLabel == 0);
  CHECK(std::abs(raw.scores[kEmotion] - 1.325) <= 1e-12);
  CHECK(std::abs(raw.scores[kLength] - 0.375) <= 1e-12);
  CHECK(raw.contributions.size() == 2);

  const auto high = score_features(index, model, std::vector{10.0, 5.0});
  CHECK(high.baseLabel == 1);
  CHECK(high.scores == std::vector{0.0, 0.0});
  CHECK(high.contributions.empty());

  CHECK_THROWS_AS(score_features(index, model, std::vector{1.0}), Error);
}

TEST_CASE("property: index scoring equals the naive scan bit for bit") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    RandomTreeSpec spec;
    spec.numFeatures = 2 + trial % 6;
    spec.numLabels = 2 + trial % 3;
    spec.maxDepth = 2 + trial % 5;
    const auto model = random_forest(rng, 1 + trial % 10, spec);
    const auto index = build_index(model);
    for (int k = 0; k < 10; ++k) {
      const auto x = random_instance(rng, spec);
      const auto fast = score_features(index, model, x);
      const auto slow = naive_scan_scores(model, x, predict_forest(model, x).label);
      CHECK(bitwise_equal(fast.scores, slow.scores));
      CHECK(fast.contributions.size() == slow.contributions.size());
      for (const auto& c : fast.contributions) {
        CHECK(c.delta == c.perturbation.hamming());
        CHECK(c.voteGain >= 1);
        CHECK(c.impact == static_cast<double>(c.voteGain) / static_cast<double>(c.delta) * c.confidence);
      }
      for (double s : fast.scores) CHECK(s >= 0.0);
    }
  }
}

TEST_CASE("property: ensemble scores are the sum of single-tree scores at a shared base") {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 40; ++trial) {
    RandomTreeSpec spec;
    spec.numFeatures = 3;
    spec.numLabels = 3;
    spec.maxDepth = 4;
    const auto model = random_forest(rng, 2 + trial % 6, spec);
    const auto index = build_index(model);
    const auto x = random_instance(rng, spec);
    const auto base = predict_forest(model, x).label;
    const auto whole = score_against(index, model.numFeatures, x, base);

    std::vector<double> summed(model.numFeatures, 0.0);
    for (const auto& tree : model.trees) {
      ForestModel single = model;
      single.trees = {tree};
      const auto part = score_against(build_index(single), model.numFeatures, x, base);
      for (std::size_t f = 0; f < summed.size(); ++f) summed[f] += part.scores[f];
    }
    for (std::size_t f = 0; f < summed.size(); ++f) {
      CHECK(whole.scores[f] == doctest::Approx(summed[f]).epsilon(1e-12));
    }
  }
}

TEST_CASE("fit_normalization: moments") {
  const auto model = worked_example_model();
  const auto index = build_index(model);

  Dataset same;
  same.featureNames = model.featureNames;
  same.rows = {{10, 30}, {10, 30}, {10, 30}};
  same.labels = {0, 0, 0};
  const auto flat = fit_normalization(index, model, same);
  CHECK(flat.stddev == std::vector{0.0, 0.0});
  CHECK(flat.mean[kEmotion] == doctest::Approx(1.325));
  CHECK(flat.sampleSize == 3);

  Dataset one = same;
  one.rows.resize(1);
  one.labels.resize(1);
  CHECK_THROWS_AS(fit_normalization(index, model, one), Error);

  // (10,30) scores emotion 1.325; (25,17) sits in leaf E and needs only
  // emotion <= 15 to reach D: emotion 0.75 (D) + 0.5*0.95 (A, two edits).
  Dataset two = same;
  two.rows = {{10, 30}, {25, 17}};
  two.labels = {0, 0};
  const auto stats = fit_normalization(index, model, two, {}, SampleSelection::AsGiven, 17);
  const double s1 = 1.325;
  const double s2 = 0.75 + 0.475;
  CHECK(stats.mean[kEmotion] == doctest::Approx((s1 + s2) / 2));
  CHECK(stats.stddev[kEmotion] == doctest::Approx(std::abs(s1 - s2) / 2));
  CHECK(stats.seed == 17);
}

TEST_CASE("fit_normalization: sample selection filters high rows") {
  const auto model = worked_example_model();
  const auto index = build_index(model);
  Dataset sample;
  sample.featureNames = model.featureNames;
  sample.rows = {{10, 30}, {25, 17}, {5, 5}};
  sample.labels = {0, 1, 0};
  CHECK(fit_normalization(index, model, sample, {}, SampleSelection::AsGiven).sampleSize == 3);
  const auto predicted = fit_normalization(index, model, sample, {}, SampleSelection::PredictedLow);
  CHECK(predicted.sampleSize == 2);
  CHECK(predicted.selection == SampleSelection::PredictedLow);
  CHECK(fit_normalization(index, model, sample, {}, SampleSelection::LabeledLow).sampleSize == 2);
  sample.labels = {0, 1, 1};
  CHECK_THROWS_AS(fit_normalization(index, model, sample, {}, SampleSelection::LabeledLow), Error);
  CHECK(parse_sample_selection(to_string(SampleSelection::LabeledLow)) == SampleSelection::LabeledLow);
}

TEST_CASE("fit_normalization agrees with a single-pass recomputation") {
  const auto data = synth_dataset({4, 600, 2, LinearCut{{1, 1, 1, 0}, {1.5}}, 0.1}, 8);
  TrainParams params;
  params.numTrees = 8;
  params.maxDepth = 5;
  params.seed = 8;
  const auto model = train_forest(data, params);
  const auto index = build_index(model);
  const auto sample = draw_sample(data, 100, 3);
  const auto stats = fit_normalization(index, model, sample);

  // Welford accumulation over independently computed naive-scan scores.
  std::vector<double> mean(4, 0.0), m2(4, 0.0);
  double count = 0;
  for (const auto& row : sample.rows) {
    const auto s = naive_scan_scores(model, row, predict_forest(model, row).label).scores;
    count += 1;
    for (std::size_t f = 0; f < 4; ++f) {
      const double d = s[f] - mean[f];
      mean[f] += d / count;
      m2[f] += d * (s[f] - mean[f]);
    }
  }
  for (std::size_t f = 0; f < 4; ++f) {
    CHECK(stats.mean[f] == doctest::Approx(mean[f]).epsilon(1e-12));
    CHECK(stats.stddev[f] == doctest::Approx(std::sqrt(m2[f] / count)).epsilon(1e-10));
  }
}

TEST_CASE("normalize_scores") {
  NormalizationStats stats;
  stats.mean = {1.0, 2.0, 3.0};
  stats.stddev = {0.5, 2.0, 0.0};
  stats.sampleSize = 10;

  auto z = normalize_scores(std::vector{1.0, 2.0, 3.0}, stats);
  CHECK(z.values == std::vector{0.0, 0.0, 0.0});
  CHECK_FALSE(z.degenerateSigma);

  z = normalize_scores(std::vector{1.5, 4.0, 3.0}, stats);
  CHECK(z.values == std::vector{1.0, 1.0, 0.0});

  z = normalize_scores(std::vector{1.0, 2.0, 7.0}, stats);
  CHECK(z.values[2] == 0.0);
  CHECK(z.degenerateSigma);

  CHECK_THROWS_AS(normalize_scores(std::vector{1.0}, stats), Error);
}

TEST_CASE("feature_directions") {
  const auto model = worked_example_model();
  const auto raw = score_features(build_index(model), model, kExampleInstance);
  const auto dirs = feature_directions(raw.contributions, 2);
  CHECK(dirs[kEmotion] == Direction::Decrease);
  CHECK(dirs[kLength] == Direction::Increase);

  CHECK(feature_directions({}, 3) == std::vector(3, Direction::None));

  ImpactContribution up, down;
  up.impact = 0.5;
  up.perturbation.deltas = {{0, +0.1}};
  down.impact = 0.5;
  down.perturbation.deltas = {{0, -0.1}};
  const std::vector both{up, down};
  CHECK(feature_directions(both, 2) == std::vector{Direction::Mixed, Direction::None});
}

TEST_CASE("aggregate_categories") {
  const std::vector scores{1.0, 3.0, 5.0};
  auto out = aggregate_categories(scores, {{"A", {0, 1}}, {"B", {2}}});
  CHECK(out.size() == 2);
  CHECK(out["A"] == 2.0);
  CHECK(out["B"] == 5.0);

  out = aggregate_categories(scores, {{"all", {0, 1, 2}}});
  CHECK(out["all"] == 3.0);

  const std::vector<std::string> names{"x", "y", "z"};
  out = aggregate_categories(scores, {}, names);
  CHECK(out == std::map<std::string, double>{{"x", 1.0}, {"y", 3.0}, {"z", 5.0}});

  CHECK_THROWS_AS(aggregate_categories(scores, {{"E", {}}}), Error);
  CHECK_THROWS_AS(aggregate_categories(scores, {{"bad", {3}}}), Error);
  CHECK_THROWS_AS(aggregate_categories(scores, {{"a", {0}}, {"b", {0}}}), Error);
}

TEST_CASE("explain on the fixture") {
  const auto model = worked_example_model();
  const auto index = build_index(model);

  ExplainConfig config;
  config.topK = 1;
  auto report = explain(model, index, kExampleInstance, config);
  CHECK_FALSE(report.noFeedbackNeeded);
  REQUIRE(report.topFeatures.size() == 1);
  CHECK(report.topFeatures[0].feature == kEmotion);
  CHECK(report.topFeatures[0].score == doctest::Approx(1.325));
  CHECK(report.topFeatures[0].direction == Direction::Decrease);

  config.topK = 2;
  config.categories = CategoryMap{{"content", {kLength}}, {"tone", {kEmotion}}};
  report = explain(model, index, kExampleInstance, config);
  REQUIRE(report.topFeatures.size() == 2);
  CHECK(report.topFeatures[1] == RankedFeature{kLength, report.raw.scores[kLength], Direction::Increase});
  CHECK(report.topCategory == "tone");

  report = explain(model, index, std::vector{10.0, 5.0}, config);
  CHECK(report.noFeedbackNeeded);
  CHECK(report.topFeatures.empty());
  CHECK(report.raw.scores == std::vector{0.0, 0.0});
  CHECK_FALSE(report.topCategory.has_value());

  config.topK = 0;
  CHECK_THROWS_AS(explain(model, index, kExampleInstance, config), Error);
  config.topK = 3;
  CHECK_THROWS_AS(explain(model, index, kExampleInstance, config), Error);
}

TEST_CASE("explain ranks by normalized score when stats are supplied") {
  const auto model = worked_example_model();
  const auto index = build_index(model);
  ExplainConfig config;
  config.topK = 2;
  NormalizationStats stats;
  stats.mean = {0.0, 2.0};
  stats.stddev = {0.125, 1.0};
  stats.sampleSize = 5;
  config.normalization = stats;
  const auto report = explain(model, index, kExampleInstance, config);
  REQUIRE(report.normalized);
  // length: (0.375 - 0) / 0.125 = 3; emotion: (1.325 - 2) / 1 < 0.
  REQUIRE(report.topFeatures.size() == 2);
  CHECK(report.topFeatures[0].feature == kLength);
  CHECK(report.topFeatures[0].score == doctest::Approx(3.0));
  CHECK(report.topFeatures[1].score < 0.0);
}

TEST_CASE("rank_features ties break by ascending index") {
  const std::vector scores{0.5, 1.0, 1.0, 0.0};
  const std::vector dirs(4, Direction::None);
  const auto ranked = rank_features(scores, dirs, 4, true);
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].feature == 1);
  CHECK(ranked[1].feature == 2);
  CHECK(ranked[2].feature == 0);
  CHECK(rank_features(scores, dirs, 4, false).size() == 4);
}
