#include "treeperturb/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace treeperturb {

double EpsilonPolicy::margin_for(double bound) const {
  return std::max(absEps, relEps * std::max(1.0, std::abs(bound)));
}

void EpsilonPolicy::validate() const {
  if (!(relEps > 0.0) || !(absEps > 0.0)) throw Error("epsilon policy requires relEps > 0 and absEps > 0");
}

double Perturbation::l2_norm() const {
  double sq = 0.0;
  for (const auto& d : deltas) sq += d.delta * d.delta;
  return std::sqrt(sq);
}

double Perturbation::delta_for(std::size_t feature) const {
  const auto it = std::lower_bound(deltas.begin(), deltas.end(), feature,
                                   [](const FeatureDelta& d, std::size_t f) { return d.feature < f; });
  return it != deltas.end() && it->feature == feature ? it->delta : 0.0;
}

FeatureVector Perturbation::apply(FeatureView x) const {
  FeatureVector out(x.begin(), x.end());
  for (const auto& d : deltas) out[d.feature] += d.delta;
  return out;
}

namespace {

// Smallest delta moving v into `c`. Rounding in v + delta is corrected by
// stepping delta one ulp at a time until the sum lands inside.
double move_into(double v, const FeatureInterval& c, const EpsilonPolicy& eps) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double target;
  if (v > c.upper) {
    target = c.upper;
  } else {
    target = c.lower + eps.margin_for(c.lower);
    if (!(target <= c.upper)) target = c.upper;
    if (!(target > c.lower)) target = std::nextafter(c.lower, kInf);
  }
  double delta = target - v;
  for (int step = 0; step < 64 && !c.contains(v + delta); ++step) {
    delta = v + delta > c.upper ? std::nextafter(delta, -kInf) : std::nextafter(delta, kInf);
  }
  if (!c.contains(v + delta) || delta == 0.0 || !std::isfinite(delta)) {
    throw Error("cannot place value inside interval for feature " + std::to_string(c.feature));
  }
  return delta;
}

}  // namespace

Perturbation min_perturbation(FeatureView x, const DecisionPath& path, const EpsilonPolicy& eps) {
  Perturbation p;
  for (const auto& c : path.constraints) {
    if (c.empty()) throw Error("infeasible path");
  }
  for (const auto& c : path.constraints) {
    const double v = x[c.feature];
    if (!std::isfinite(v)) throw Error("non-finite value at feature " + std::to_string(c.feature));
    if (c.contains(v)) continue;
    p.deltas.push_back({c.feature, move_into(v, c, eps)});
  }
  return p;
}

}  // namespace treeperturb
