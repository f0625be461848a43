#include <random>

#include "treeperturb/dataset.hpp"

namespace treeperturb {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

QualityLabel planted_label(const PlantedRule& rule, FeatureView x, std::size_t numLabels) {
  return std::visit(
      Overloaded{
          [&](const ThresholdConjunction& r) {
            for (const auto& [f, theta] : r.terms) {
              if (!(x[f] > theta)) return QualityLabel{0};
            }
            return static_cast<QualityLabel>(numLabels - 1);
          },
          [&](const LinearCut& r) {
            double s = 0.0;
            for (std::size_t f = 0; f < r.weights.size(); ++f) s += r.weights[f] * x[f];
            QualityLabel label = 0;
            for (double cut : r.cuts) {
              if (cut < s) ++label;
            }
            return label;
          },
      },
      rule);
}

Dataset synth_dataset(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.numRows < 1) throw Error("synthetic dataset needs at least one row");
  if (spec.numLabels < 2) throw Error("synthetic dataset needs at least two labels");
  if (const auto* cut = std::get_if<LinearCut>(&spec.rule)) {
    if (cut->weights.size() > spec.numFeatures) throw Error("linear cut has more weights than features");
    if (cut->cuts.size() + 1 != spec.numLabels) throw Error("linear cut needs numLabels - 1 cut points");
  } else {
    for (const auto& [f, theta] : std::get<ThresholdConjunction>(spec.rule).terms) {
      if (f >= spec.numFeatures) throw Error("threshold rule references unknown feature");
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> otherLabel(1, spec.numLabels - 1);

  Dataset data;
  data.numLabels = spec.numLabels;
  for (std::size_t f = 0; f < spec.numFeatures; ++f) data.featureNames.push_back("f" + std::to_string(f));
  data.rows.reserve(spec.numRows);
  data.labels.reserve(spec.numRows);
  for (std::size_t i = 0; i < spec.numRows; ++i) {
    FeatureVector x(spec.numFeatures);
    for (auto& v : x) v = unit(rng);
    QualityLabel label = planted_label(spec.rule, x, spec.numLabels);
    if (unit(rng) < spec.noiseRate) {
      label = static_cast<QualityLabel>((static_cast<std::size_t>(label) + otherLabel(rng)) % spec.numLabels);
    }
    data.rows.push_back(std::move(x));
    data.labels.push_back(label);
  }
  return data;
}

}  // namespace treeperturb
