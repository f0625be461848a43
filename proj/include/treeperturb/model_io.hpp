#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "treeperturb/forest.hpp"

namespace treeperturb {

inline constexpr int kModelFormatVersion = 1;

// JSON interchange document; keys are written in a fixed order.
std::string serialize_model(const ForestModel& model);

// Strict parse. Schema violations throw Error naming the JSON pointer of the offending value.
ForestModel parse_model(std::string_view document);

ForestModel load_model(const std::filesystem::path& path);
void save_model(const ForestModel& model, const std::filesystem::path& path);

}  // namespace treeperturb
