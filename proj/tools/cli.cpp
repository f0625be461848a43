#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "treeperturb/dataset.hpp"
#include "treeperturb/exhaustive.hpp"
#include "treeperturb/krause.hpp"
#include "treeperturb/model_io.hpp"
#include "treeperturb/scoring.hpp"

namespace treeperturb::cli {

namespace {

using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("TREEPERTURB_SEED")) {
    std::uint64_t seed = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw UsageError("TREEPERTURB_SEED must be an unsigned integer");
    }
    return seed;
  }
  return 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("cannot write " + path);
}

FeatureVector parse_instance(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error&) {
    throw UsageError("--instance must be a JSON array of numbers");
  }
  if (!j.is_array()) throw UsageError("--instance must be a JSON array of numbers");
  FeatureVector x;
  for (const auto& v : j) {
    if (!v.is_number()) throw UsageError("--instance must be a JSON array of numbers");
    x.push_back(v.get<double>());
  }
  return x;
}

std::size_t resolve_feature(const ordered_json& ref, const ForestModel& model) {
  if (ref.is_number_unsigned()) return ref.get<std::size_t>();
  if (ref.is_string()) {
    const auto name = ref.get<std::string>();
    for (std::size_t f = 0; f < model.numFeatures; ++f) {
      if (model.feature_name(f) == name) return f;
    }
    throw Error("categories: unknown feature '" + name + "'");
  }
  throw Error("categories: members must be feature names or indices");
}

CategoryMap load_categories(const std::string& path, const ForestModel& model) {
  const auto j = ordered_json::parse(read_file(path));
  if (!j.is_object()) throw Error("categories: expected an object of name -> [features]");
  CategoryMap out;
  for (const auto& [name, members] : j.items()) {
    if (!members.is_array()) throw Error("categories: '" + name + "' must map to an array");
    auto& list = out[name];
    for (const auto& m : members) list.push_back(resolve_feature(m, model));
  }
  return out;
}

ordered_json stats_to_json(const NormalizationStats& stats) {
  ordered_json j;
  j["mean"] = stats.mean;
  j["stddev"] = stats.stddev;
  j["sampleSize"] = stats.sampleSize;
  j["seed"] = stats.seed;
  j["selection"] = std::string(to_string(stats.selection));
  return j;
}

NormalizationStats load_stats(const std::string& path) {
  try {
    const auto j = ordered_json::parse(read_file(path));
    NormalizationStats stats;
    stats.mean = j.at("mean").get<std::vector<double>>();
    stats.stddev = j.at("stddev").get<std::vector<double>>();
    stats.sampleSize = j.at("sampleSize").get<std::size_t>();
    stats.seed = j.value("seed", std::uint64_t{0});
    stats.selection = parse_sample_selection(j.value("selection", std::string("as-given")));
    return stats;
  } catch (const ordered_json::exception& e) {
    throw Error("normalization stats " + path + ": " + e.what());
  }
}

std::optional<std::string> id_column(const std::string& name) {
  return name.empty() ? std::nullopt : std::optional<std::string>(name);
}

std::size_t top_index(std::span<const double> scores) {
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

struct InstanceArgs {
  std::string inline_json;
  std::string data;
  std::size_t row = 0;
  std::string label = "quality";
  std::string idColumn;

  void add_to(CLI::App* app) {
    app->add_option("--instance", inline_json, "Instance as a JSON array, e.g. '[10,30]'");
    app->add_option("--data", data, "CSV holding the instance");
    app->add_option("--row", row, "1-based data row of --data")->check(CLI::PositiveNumber);
    app->add_option("--label", label, "Label column of --data");
    app->add_option("--id-column", idColumn, "Non-feature id column of --data");
  }

  FeatureVector resolve(const ForestModel& model) const {
    FeatureVector x;
    if (!inline_json.empty()) {
      x = parse_instance(inline_json);
    } else if (!data.empty() && row > 0) {
      const auto d = load_dataset(data, label, id_column(idColumn));
      if (row > d.size()) throw UsageError("--row exceeds the dataset size");
      x = d.rows[row - 1];
    } else {
      throw UsageError("an instance is required: --instance or --data with --row");
    }
    if (x.size() != model.numFeatures) {
      throw UsageError("instance has " + std::to_string(x.size()) + " features, model expects " +
                       std::to_string(model.numFeatures));
    }
    return x;
  }
};

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string label = "quality";
  std::string idColumn;
  std::string out;
  TrainParams params;
  bool noBootstrap = false;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto dataset = load_dataset(a.data, a.label, id_column(a.idColumn));
  TrainParams params = a.params;
  params.bootstrap = !a.noBootstrap;
  params.seed = a.seed.value_or(default_seed());
  const auto model = train_forest(dataset, params);
  save_model(model, a.out);
  out << "trained " << model.trees.size() << " trees on " << dataset.size() << " rows\n";
  out << "training accuracy: " << num(accuracy(model, dataset)) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- explain

struct ExplainArgs {
  std::string model;
  InstanceArgs instance;
  std::size_t k = 1;
  std::string stats;
  std::string categories;
  std::string format = "table";
  bool oracle = false;
  std::string baseline;
  std::string reference;
  double relEps = EpsilonPolicy{}.relEps;
  double absEps = EpsilonPolicy{}.absEps;
};

ordered_json report_to_json(const ForestModel& model, const ImpactReport& report) {
  ordered_json j;
  j["baseLabel"] = report.baseLabel;
  j["noFeedbackNeeded"] = report.noFeedbackNeeded;
  j["degenerateSigma"] = report.normalized ? report.normalized->degenerateSigma : false;
  ordered_json features = ordered_json::array();
  for (std::size_t f = 0; f < model.numFeatures; ++f) {
    ordered_json e;
    e["index"] = f;
    e["name"] = model.feature_name(f);
    e["raw"] = report.raw.scores[f];
    if (report.normalized) e["normalized"] = report.normalized->values[f];
    e["direction"] = std::string(to_string(report.directions[f]));
    features.push_back(std::move(e));
  }
  j["features"] = std::move(features);
  ordered_json top = ordered_json::array();
  for (const auto& r : report.topFeatures) {
    top.push_back({{"index", r.feature},
                   {"name", model.feature_name(r.feature)},
                   {"score", r.score},
                   {"direction", std::string(to_string(r.direction))}});
  }
  j["top"] = std::move(top);
  if (report.categoryScores) {
    ordered_json cats = ordered_json::object();
    for (const auto& [name, score] : *report.categoryScores) cats[name] = score;
    j["categories"] = std::move(cats);
  }
  j["topCategory"] = report.topCategory ? ordered_json(*report.topCategory) : ordered_json(nullptr);
  ordered_json contributions = ordered_json::array();
  for (const auto& c : report.raw.contributions) {
    ordered_json p = ordered_json::object();
    for (const auto& d : c.perturbation.deltas) p[model.feature_name(d.feature)] = d.delta;
    contributions.push_back({{"tree", c.treeId},
                             {"path", c.pathId},
                             {"delta", c.delta},
                             {"confidence", c.confidence},
                             {"voteGain", c.voteGain},
                             {"impact", c.impact},
                             {"perturbation", std::move(p)}});
  }
  j["contributions"] = std::move(contributions);
  return j;
}

void print_report_table(std::ostream& out, const ForestModel& model, const ImpactReport& report) {
  out << "base label: " << report.baseLabel << '\n';
  if (report.noFeedbackNeeded) {
    out << "no feedback needed\n";
    return;
  }
  out << std::left << std::setw(6) << "rank" << std::setw(20) << "feature" << std::setw(24) << "score"
      << "direction\n";
  for (std::size_t i = 0; i < report.topFeatures.size(); ++i) {
    const auto& r = report.topFeatures[i];
    out << std::setw(6) << i + 1 << std::setw(20) << model.feature_name(r.feature) << std::setw(24)
        << num(r.score) << to_string(r.direction) << '\n';
  }
  if (report.normalized && report.normalized->degenerateSigma) {
    out << "warning: degenerate sigma on at least one feature\n";
  }
  if (report.categoryScores) {
    out << "categories:\n";
    for (const auto& [name, score] : *report.categoryScores) out << "  " << name << ' ' << num(score) << '\n';
    if (report.topCategory) out << "top category: " << *report.topCategory << '\n';
  }
  out << "contributions:\n";
  for (const auto& c : report.raw.contributions) {
    out << "  tree " << c.treeId << " path " << c.pathId << " delta " << c.delta << " confidence "
        << num(c.confidence) << " impact " << num(c.impact) << " :";
    for (const auto& d : c.perturbation.deltas) out << ' ' << model.feature_name(d.feature) << ' ' << num(d.delta);
    out << '\n';
  }
}

ordered_json oracle_json(const ForestModel& model, const ExhaustiveResult& result,
                         std::optional<std::size_t> heuristicTop) {
  ordered_json j;
  j["baseLabel"] = result.raw.baseLabel;
  j["gridPoints"] = result.gridPoints;
  j["improving"] = result.improving;
  ordered_json scores = ordered_json::object();
  for (std::size_t f = 0; f < model.numFeatures; ++f) scores[model.feature_name(f)] = result.raw.scores[f];
  j["scores"] = std::move(scores);
  const bool any = std::any_of(result.raw.scores.begin(), result.raw.scores.end(), [](double s) { return s > 0; });
  j["top"] = any ? ordered_json(model.feature_name(top_index(result.raw.scores))) : ordered_json(nullptr);
  if (heuristicTop) {
    j["heuristicTop"] = model.feature_name(*heuristicTop);
    j["top1Agreement"] = any && top_index(result.raw.scores) == *heuristicTop;
  }
  return j;
}

void print_oracle_table(std::ostream& out, const ForestModel& model, const ordered_json& j) {
  out << "oracle grid points: " << j["gridPoints"].get<std::uint64_t>()
      << ", improving: " << j["improving"].get<std::uint64_t>() << '\n';
  for (std::size_t f = 0; f < model.numFeatures; ++f) {
    out << "  " << model.feature_name(f) << ' ' << num(j["scores"][model.feature_name(f)].get<double>()) << '\n';
  }
  out << "oracle top-1: " << (j["top"].is_null() ? std::string("none") : j["top"].get<std::string>()) << '\n';
  if (j.contains("top1Agreement")) {
    out << "top-1 agreement: " << (j["top1Agreement"].get<bool>() ? "yes" : "no") << '\n';
  }
}

int cmd_krause(const ExplainArgs& a, const ForestModel& model, const FeatureVector& x, std::ostream& out) {
  if (a.reference.empty()) throw UsageError("--baseline krause needs --reference");
  const auto ref = load_dataset(a.reference, a.instance.label, id_column(a.instance.idColumn));
  std::vector<FeatureVector> high;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (ref.labels[i] == model.top_label()) high.push_back(ref.rows[i]);
  }
  const auto stats = fit_krause(high);
  const auto flags = krause_feedback(stats, x);
  if (a.format == "json") {
    ordered_json j;
    j["baseline"] = "krause";
    j["sampleSize"] = stats.sampleSize;
    ordered_json list = ordered_json::array();
    for (const auto& f : flags) {
      list.push_back({{"index", f.feature},
                      {"name", model.feature_name(f.feature)},
                      {"direction", std::string(to_string(f.direction))}});
    }
    j["flags"] = std::move(list);
    out << j.dump(2) << '\n';
  } else {
    out << "krause baseline over " << stats.sampleSize << " high-quality rows\n";
    if (flags.empty()) out << "no outlier features\n";
    for (const auto& f : flags) out << "  " << model.feature_name(f.feature) << ' ' << to_string(f.direction) << '\n';
  }
  return kExitOk;
}

int cmd_explain(const ExplainArgs& a, std::ostream& out) {
  const auto model = load_model(a.model);
  const auto x = a.instance.resolve(model);
  if (!a.baseline.empty()) {
    if (a.baseline != "krause") throw UsageError("unknown baseline '" + a.baseline + "'");
    return cmd_krause(a, model, x, out);
  }
  if (a.k < 1 || a.k > model.numFeatures) {
    throw UsageError("--k must be between 1 and " + std::to_string(model.numFeatures));
  }

  ExplainConfig config;
  config.topK = a.k;
  config.eps = {a.relEps, a.absEps};
  if (!a.categories.empty()) config.categories = load_categories(a.categories, model);
  if (!a.stats.empty()) config.normalization = load_stats(a.stats);

  auto start = Clock::now();
  const auto index = build_index(model);
  const double indexMs = ms_since(start);
  start = Clock::now();
  const auto report = explain(model, index, x, config);
  const double explainMs = ms_since(start);

  std::optional<ordered_json> oracle;
  if (a.oracle) {
    const auto result = score_exhaustive(model, x, {config.eps, 12, 10'000'000, false});
    const bool any = std::any_of(report.raw.scores.begin(), report.raw.scores.end(), [](double s) { return s > 0; });
    oracle = oracle_json(model, result,
                         any ? std::optional<std::size_t>(top_index(report.raw.scores)) : std::nullopt);
  }

  if (a.format == "json") {
    auto j = report_to_json(model, report);
    j["timing"] = {{"indexMs", indexMs}, {"explainMs", explainMs}};
    if (oracle) j["oracle"] = *oracle;
    out << j.dump(2) << '\n';
  } else {
    print_report_table(out, model, report);
    if (oracle) print_oracle_table(out, model, *oracle);
    out << "index build: " << num(indexMs) << " ms, explain: " << num(explainMs) << " ms\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- oracle

struct OracleArgs {
  std::string model;
  InstanceArgs instance;
  std::string format = "table";
};

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
  const auto model = load_model(a.model);
  const auto x = a.instance.resolve(model);
  const auto result = score_exhaustive(model, x, {{}, 12, 10'000'000, false});
  const auto heuristic = score_features(build_index(model), model, x);
  const bool any = std::any_of(heuristic.scores.begin(), heuristic.scores.end(), [](double s) { return s > 0; });
  const auto j = oracle_json(model, result, any ? std::optional<std::size_t>(top_index(heuristic.scores)) : std::nullopt);
  if (a.format == "json") {
    out << j.dump(2) << '\n';
  } else {
    print_oracle_table(out, model, j);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- normalize-stats

struct NormalizeArgs {
  std::string model;
  std::string data;
  std::string label = "quality";
  std::string idColumn;
  std::string selection = "predicted";
  std::size_t sampleSize = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_normalize(const NormalizeArgs& a, std::ostream& out) {
  const auto model = load_model(a.model);
  auto data = load_dataset(a.data, a.label, id_column(a.idColumn));
  const std::uint64_t seed = a.seed.value_or(default_seed());
  if (a.sampleSize > 0) data = draw_sample(data, a.sampleSize, seed);
  const auto stats = fit_normalization(build_index(model), model, data, {}, parse_sample_selection(a.selection), seed);
  write_file(a.out, stats_to_json(stats).dump(2) + "\n");
  out << "normalization stats over " << stats.sampleSize << " rows (" << to_string(stats.selection)
      << ") written to " << a.out << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- weak-label

struct WeakLabelArgs {
  std::string docs;
  std::string segments;
  std::string docColumn = "doc_id";
  std::string label = "quality";
  std::string out;
};

int cmd_weak_label(const WeakLabelArgs& a, std::ostream& out) {
  const auto docs = load_dataset(a.docs, a.label, a.docColumn);
  SegmentMap map;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!map.docLabels.emplace((*docs.docIds)[i], docs.labels[i]).second) {
      throw Error("duplicate document id '" + (*docs.docIds)[i] + "'");
    }
  }
  std::ifstream in(a.segments);
  if (!in) throw Error("cannot open " + a.segments);
  std::ostringstream withLabel;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    withLabel << line << (header ? ",__label" : ",0") << '\n';
    header = false;
  }
  std::istringstream segIn(withLabel.str());
  const auto segs = parse_dataset(segIn, "__label", a.docColumn, a.segments);
  map.featureNames = segs.featureNames;
  for (std::size_t i = 0; i < segs.size(); ++i) map.segments.emplace_back((*segs.docIds)[i], segs.rows[i]);

  const auto labeled = weak_label_segments(map);
  std::ostringstream csv;
  write_dataset(csv, labeled, a.label);
  write_file(a.out, csv.str());
  out << "labeled " << labeled.size() << " segments from " << map.docLabels.size() << " documents\n";
  const auto counts = labeled.label_counts();
  for (std::size_t l = 0; l < counts.size(); ++l) out << "  label " << l << ": " << counts[l] << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string model;
  std::size_t synthTrees = 100;
  std::size_t synthDepth = 10;
  std::size_t synthFeatures = 20;
  std::size_t synthRows = 4000;
  std::size_t instances = 200;
  std::size_t k = 5;
  std::optional<std::uint64_t> seed;
  std::string format = "table";
};

ForestModel synthetic_bench_model(const BenchArgs& a, std::uint64_t seed) {
  SynthSpec spec;
  spec.numFeatures = a.synthFeatures;
  spec.numRows = a.synthRows;
  spec.numLabels = 2;
  spec.rule = LinearCut{std::vector<double>(a.synthFeatures, 1.0), {0.5 * static_cast<double>(a.synthFeatures)}};
  spec.noiseRate = 0.2;
  TrainParams params;
  params.numTrees = a.synthTrees;
  params.maxDepth = a.synthDepth;
  params.featureSubsampleCount = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(a.synthFeatures)));
  params.seed = seed;
  return train_forest(synth_dataset(spec, seed), params);
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.instances == 0) throw UsageError("--instances must be positive");
  const std::uint64_t seed = a.seed.value_or(default_seed());
  const auto model = a.model.empty() ? synthetic_bench_model(a, seed) : load_model(a.model);
  const auto index = build_index(model);

  // Instances are drawn per feature over the span of that feature's thresholds, padded on both sides.
  std::vector<double> lo(model.numFeatures, std::numeric_limits<double>::infinity());
  std::vector<double> hi(model.numFeatures, -std::numeric_limits<double>::infinity());
  for (const auto& tree : model.trees) {
    for (const auto& node : tree.nodes) {
      if (const auto* in = std::get_if<InternalNode>(&node)) {
        lo[in->feature] = std::min(lo[in->feature], in->threshold);
        hi[in->feature] = std::max(hi[in->feature], in->threshold);
      }
    }
  }
  std::mt19937_64 rng(seed);
  ExplainConfig config;
  config.topK = std::min(a.k, model.numFeatures);
  std::vector<double> latencies;
  std::size_t needingFeedback = 0;
  for (std::size_t i = 0; i < a.instances; ++i) {
    FeatureVector x(model.numFeatures);
    for (std::size_t f = 0; f < x.size(); ++f) {
      const double a0 = std::isfinite(lo[f]) ? lo[f] : 0.0;
      const double b0 = std::isfinite(hi[f]) ? hi[f] : 1.0;
      const double pad = std::max(1.0, b0 - a0) * 0.25;
      x[f] = std::uniform_real_distribution<double>(a0 - pad, b0 + pad)(rng);
    }
    const auto start = Clock::now();
    const auto report = explain(model, index, x, config);
    latencies.push_back(ms_since(start));
    if (!report.noFeedbackNeeded) ++needingFeedback;
  }
  std::vector<double> sorted = latencies;
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (double l : latencies) mean += l;
  mean /= static_cast<double>(latencies.size());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(sorted.size())));
  const double p95 = sorted[std::max<std::size_t>(rank, 1) - 1];

  std::size_t paths = index.size();
  if (a.format == "json") {
    ordered_json j;
    j["trees"] = model.trees.size();
    j["features"] = model.numFeatures;
    j["paths"] = paths;
    j["instances"] = latencies.size();
    j["needingFeedback"] = needingFeedback;
    j["meanMs"] = mean;
    j["p95Ms"] = p95;
    j["maxMs"] = sorted.back();
    out << j.dump(2) << '\n';
  } else {
    out << "model: " << model.trees.size() << " trees, " << model.numFeatures << " features, " << paths
        << " paths\n";
    out << "instances: " << latencies.size() << " (" << needingFeedback << " needing feedback)\n";
    out << "mean latency: " << num(mean) << " ms\n";
    out << "p95 latency: " << num(p95) << " ms\n";
    out << "max latency: " << num(sorted.back()) << " ms\n";
  }
  return kExitOk;
}

void add_format(CLI::App* app, std::string& format) {
  app->add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "json"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Perturbation-based feature feedback for tree-ensemble quality models", "treeperturb"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* trainCmd = app.add_subcommand("train", "Train a forest from a CSV dataset");
  trainCmd->add_option("--data", train.data, "Training CSV")->required();
  trainCmd->add_option("--label", train.label, "Label column");
  trainCmd->add_option("--id-column", train.idColumn, "Non-feature id column");
  trainCmd->add_option("--out", train.out, "Output model JSON")->required();
  trainCmd->add_option("--trees", train.params.numTrees)->check(CLI::PositiveNumber);
  trainCmd->add_option("--max-depth", train.params.maxDepth)->check(CLI::PositiveNumber);
  trainCmd->add_option("--min-samples-leaf", train.params.minSamplesLeaf)->check(CLI::PositiveNumber);
  trainCmd->add_option("--feature-subsample", train.params.featureSubsampleCount, "Features tried per node (0 = all)");
  trainCmd->add_flag("--no-bootstrap", train.noBootstrap);
  trainCmd->add_option("--seed", train.seed);

  ExplainArgs explainArgs;
  auto* explainCmd = app.add_subcommand("explain", "Rank the features whose change most improves an instance");
  explainCmd->add_option("--model", explainArgs.model)->required();
  explainArgs.instance.add_to(explainCmd);
  explainCmd->add_option("--k", explainArgs.k, "Number of features to report");
  explainCmd->add_option("--stats", explainArgs.stats, "Normalization stats JSON");
  explainCmd->add_option("--categories", explainArgs.categories, "Category map JSON");
  explainCmd->add_flag("--oracle", explainArgs.oracle, "Also run the exhaustive oracle");
  explainCmd->add_option("--baseline", explainArgs.baseline, "Run a baseline instead (krause)");
  explainCmd->add_option("--reference", explainArgs.reference, "Reference CSV for the krause baseline");
  explainCmd->add_option("--rel-eps", explainArgs.relEps)->check(CLI::PositiveNumber);
  explainCmd->add_option("--abs-eps", explainArgs.absEps)->check(CLI::PositiveNumber);
  add_format(explainCmd, explainArgs.format);

  OracleArgs oracle;
  auto* oracleCmd = app.add_subcommand("oracle", "Score an instance with the exhaustive oracle");
  oracleCmd->add_option("--model", oracle.model)->required();
  oracle.instance.add_to(oracleCmd);
  add_format(oracleCmd, oracle.format);

  NormalizeArgs norm;
  auto* normCmd = app.add_subcommand("normalize-stats", "Fit score normalization on a low-quality sample");
  normCmd->add_option("--model", norm.model)->required();
  normCmd->add_option("--data", norm.data)->required();
  normCmd->add_option("--label", norm.label);
  normCmd->add_option("--id-column", norm.idColumn);
  normCmd->add_option("--selection", norm.selection)->check(CLI::IsMember({"predicted", "labeled", "as-given"}));
  normCmd->add_option("--sample-size", norm.sampleSize, "Rows drawn from --data (0 = all)");
  normCmd->add_option("--seed", norm.seed);
  normCmd->add_option("--out", norm.out)->required();

  WeakLabelArgs weak;
  auto* weakCmd = app.add_subcommand("weak-label", "Label segments with their parent document's label");
  weakCmd->add_option("--docs", weak.docs, "CSV of document ids and labels")->required();
  weakCmd->add_option("--segments", weak.segments, "CSV of document ids and segment features")->required();
  weakCmd->add_option("--doc-column", weak.docColumn);
  weakCmd->add_option("--label", weak.label);
  weakCmd->add_option("--out", weak.out)->required();

  BenchArgs bench;
  auto* benchCmd = app.add_subcommand("bench", "Measure explain latency");
  benchCmd->add_option("--model", bench.model, "Model JSON (default: synthesize one)");
  benchCmd->add_option("--synth-trees", bench.synthTrees)->check(CLI::PositiveNumber);
  benchCmd->add_option("--synth-depth", bench.synthDepth)->check(CLI::PositiveNumber);
  benchCmd->add_option("--synth-features", bench.synthFeatures)->check(CLI::PositiveNumber);
  benchCmd->add_option("--synth-rows", bench.synthRows)->check(CLI::PositiveNumber);
  benchCmd->add_option("--instances", bench.instances);
  benchCmd->add_option("--k", bench.k)->check(CLI::PositiveNumber);
  benchCmd->add_option("--seed", bench.seed);
  add_format(benchCmd, bench.format);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (trainCmd->parsed()) return cmd_train(train, out);
    if (explainCmd->parsed()) return cmd_explain(explainArgs, out);
    if (oracleCmd->parsed()) return cmd_oracle(oracle, out);
    if (normCmd->parsed()) return cmd_normalize(norm, out);
    if (weakCmd->parsed()) return cmd_weak_label(weak, out);
    if (benchCmd->parsed()) return cmd_bench(bench, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace treeperturb::cli
