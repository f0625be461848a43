#include "treeperturb/krause.hpp"

#include <cmath>

#include "treeperturb/dataset.hpp"

namespace treeperturb {

KrauseStats fit_krause(std::span<const FeatureVector> rows, double multiplier) {
  if (rows.size() < 2) throw Error("krause reference sample needs at least 2 rows");
  if (!(multiplier > 0.0)) throw Error("krause multiplier must be positive");
  const std::size_t n = rows.front().size();
  KrauseStats stats;
  stats.sampleSize = rows.size();
  stats.multiplier = multiplier;
  stats.mean.assign(n, 0.0);
  stats.stddev.assign(n, 0.0);
  for (const auto& r : rows) {
    if (r.size() != n) throw Error("ragged krause reference sample");
    for (std::size_t f = 0; f < n; ++f) stats.mean[f] += r[f];
  }
  const double m = static_cast<double>(rows.size());
  for (auto& mu : stats.mean) mu /= m;
  for (const auto& r : rows) {
    for (std::size_t f = 0; f < n; ++f) {
      const double d = r[f] - stats.mean[f];
      stats.stddev[f] += d * d;
    }
  }
  for (auto& sd : stats.stddev) sd = std::sqrt(sd / m);
  return stats;
}

KrauseStats fit_krause(const Dataset& highQualitySample, double multiplier) {
  return fit_krause(highQualitySample.rows, multiplier);
}

std::vector<KrauseFlag> krause_feedback(const KrauseStats& stats, FeatureView x) {
  check_instance(x, stats.mean.size());
  std::vector<KrauseFlag> flags;
  for (std::size_t f = 0; f < x.size(); ++f) {
    const double mu = stats.mean[f];
    const double sd = stats.stddev[f];
    if (!(sd > 0.0)) continue;
    // Inclusive: x == mu + k*sd is flagged.
    const double reach = stats.multiplier * sd;
    if (x[f] >= mu + reach) {
      flags.push_back({f, Direction::Decrease});
    } else if (x[f] <= mu - reach) {
      flags.push_back({f, Direction::Increase});
    }
  }
  return flags;
}

}  // namespace treeperturb
