#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace treeperturb {

// Ordinal quality class: 0 is the lowest quality, higher is better.
using QualityLabel = std::int32_t;

using FeatureVector = std::vector<double>;
using FeatureView = std::span<const double>;

using NodeId = std::uint32_t;
using TreeId = std::uint32_t;

inline constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws unless x has `numFeatures` finite entries.
void check_instance(FeatureView x, std::size_t numFeatures);

}  // namespace treeperturb
