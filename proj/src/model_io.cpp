#include "treeperturb/model_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"

namespace treeperturb {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json node_to_json(const TreeNode& node) {
  ordered_json j;
  if (const auto* in = std::get_if<InternalNode>(&node)) {
    j["type"] = "internal";
    j["feature"] = in->feature;
    j["threshold"] = in->threshold;
    j["left"] = in->left;
    j["right"] = in->right;
  } else {
    const auto& leaf = std::get<LeafNode>(node);
    j["type"] = "leaf";
    j["vote"] = leaf.vote;
    ordered_json counts = ordered_json::object();
    for (std::size_t l = 0; l < leaf.classCounts.size(); ++l) counts[std::to_string(l)] = leaf.classCounts[l];
    j["classCounts"] = std::move(counts);
  }
  return j;
}

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error("model schema error at " + (path.empty() ? std::string("/") : path) + ": " + what);
}

void require_object(const json& j, const std::string& path, std::initializer_list<const char*> required,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) schema_error(path, "expected an object");
  for (const char* key : required) {
    if (!j.contains(key)) schema_error(path, std::string("missing field \"") + key + "\"");
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) schema_error(path + "/" + key, "unknown field");
  }
}

std::uint64_t get_unsigned(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  schema_error(path, "expected a non-negative integer");
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

TreeNode parse_node(const json& j, const std::string& path, std::size_t numFeatures,
                    std::size_t numLabels, std::size_t numNodes) {
  if (!j.is_object()) schema_error(path, "expected an object");
  if (!j.contains("type") || !j["type"].is_string()) schema_error(path + "/type", "missing node type");
  const auto type = j["type"].get<std::string>();
  if (type == "internal") {
    require_object(j, path, {"type", "feature", "threshold", "left", "right"},
                   {"type", "feature", "threshold", "left", "right"});
    InternalNode in;
    in.feature = get_unsigned(j["feature"], path + "/feature");
    if (in.feature >= numFeatures) schema_error(path + "/feature", "feature index out of range");
    in.threshold = get_number(j["threshold"], path + "/threshold");
    for (auto [key, slot] : {std::pair{"left", &in.left}, std::pair{"right", &in.right}}) {
      const auto id = get_unsigned(j[key], path + "/" + key);
      if (id >= numNodes) schema_error(path + "/" + key, "dangling child id " + std::to_string(id));
      *slot = static_cast<NodeId>(id);
    }
    return in;
  }
  if (type == "leaf") {
    require_object(j, path, {"type", "vote", "classCounts"}, {"type", "vote", "classCounts"});
    LeafNode leaf;
    const auto vote = get_unsigned(j["vote"], path + "/vote");
    if (vote >= numLabels) schema_error(path + "/vote", "label " + std::to_string(vote) + " >= numLabels");
    leaf.vote = static_cast<QualityLabel>(vote);
    const auto& counts = j["classCounts"];
    if (!counts.is_object()) schema_error(path + "/classCounts", "expected an object");
    leaf.classCounts.assign(numLabels, 0);
    for (const auto& [key, value] : counts.items()) {
      const std::string where = path + "/classCounts/" + key;
      std::size_t label = 0;
      std::istringstream ks(key);
      if (!(ks >> label) || !ks.eof() || std::to_string(label) != key) schema_error(where, "label key is not an integer");
      if (label >= numLabels) schema_error(where, "label " + key + " >= numLabels");
      leaf.classCounts[label] = get_unsigned(value, where);
    }
    if (leaf.total() == 0) schema_error(path + "/classCounts", "no samples");
    if (leaf.classCounts[vote] != leaf.classCounts[static_cast<std::size_t>(majority_label(leaf.classCounts))]) {
      schema_error(path + "/vote", "vote is not a majority of classCounts");
    }
    return leaf;
  }
  schema_error(path + "/type", "unknown node type \"" + type + "\"");
}

}  // namespace

std::string serialize_model(const ForestModel& model) {
  ordered_json j;
  j["version"] = kModelFormatVersion;
  j["numFeatures"] = model.numFeatures;
  j["numLabels"] = model.numLabels;
  ordered_json names = ordered_json::array();
  for (std::size_t f = 0; f < model.numFeatures; ++f) names.push_back(model.feature_name(f));
  j["featureNames"] = std::move(names);
  ordered_json trees = ordered_json::array();
  for (const Tree& tree : model.trees) {
    ordered_json t;
    ordered_json nodes = ordered_json::array();
    for (const TreeNode& node : tree.nodes) nodes.push_back(node_to_json(node));
    t["nodes"] = std::move(nodes);
    t["root"] = tree.root;
    trees.push_back(std::move(t));
  }
  j["trees"] = std::move(trees);
  return j.dump(1) + "\n";
}

ForestModel parse_model(std::string_view document) {
  json j;
  try {
    j = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(std::string("malformed model JSON: ") + e.what());
  }
  require_object(j, "", {"version", "numFeatures", "numLabels", "featureNames", "trees"},
                 {"version", "numFeatures", "numLabels", "featureNames", "trees"});
  if (get_unsigned(j["version"], "/version") != kModelFormatVersion) {
    schema_error("/version", "unsupported version");
  }

  ForestModel model;
  model.numFeatures = get_unsigned(j["numFeatures"], "/numFeatures");
  model.numLabels = get_unsigned(j["numLabels"], "/numLabels");
  if (model.numFeatures == 0) schema_error("/numFeatures", "must be positive");
  if (model.numLabels == 0) schema_error("/numLabels", "must be positive");

  const auto& names = j["featureNames"];
  if (!names.is_array()) schema_error("/featureNames", "expected an array");
  if (names.size() != model.numFeatures) schema_error("/featureNames", "length differs from numFeatures");
  for (std::size_t f = 0; f < names.size(); ++f) {
    if (!names[f].is_string()) schema_error("/featureNames/" + std::to_string(f), "expected a string");
    model.featureNames.push_back(names[f].get<std::string>());
  }

  const auto& trees = j["trees"];
  if (!trees.is_array()) schema_error("/trees", "expected an array");
  if (trees.empty()) schema_error("/trees", "no trees");
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const std::string tpath = "/trees/" + std::to_string(t);
    require_object(trees[t], tpath, {"nodes", "root"}, {"nodes", "root"});
    const auto& nodes = trees[t]["nodes"];
    if (!nodes.is_array() || nodes.empty()) schema_error(tpath + "/nodes", "expected a non-empty array");
    Tree tree;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      tree.nodes.push_back(parse_node(nodes[i], tpath + "/nodes/" + std::to_string(i), model.numFeatures,
                                      model.numLabels, nodes.size()));
    }
    const auto root = get_unsigned(trees[t]["root"], tpath + "/root");
    if (root >= nodes.size()) schema_error(tpath + "/root", "root id out of range");
    tree.root = static_cast<NodeId>(root);
    model.trees.push_back(std::move(tree));
  }

  try {
    model.validate();
  } catch (const Error& e) {
    throw Error(std::string("model schema error: ") + e.what());
  }
  return model;
}

ForestModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

void save_model(const ForestModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace treeperturb
