#include "treeperturb/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace treeperturb {

void Dataset::validate() const {
  const std::size_t n = num_features();
  if (labels.size() != rows.size()) throw Error("dataset rows and labels differ in length");
  if (docIds && docIds->size() != rows.size()) throw Error("dataset rows and docIds differ in length");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != n) {
      throw Error("dataset row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                  " features, expected " + std::to_string(n));
    }
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= numLabels) {
      throw Error("dataset row " + std::to_string(i) + " has label " + std::to_string(labels[i]) +
                  " outside [0, " + std::to_string(numLabels) + ")");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.featureNames = featureNames;
  out.numLabels = numLabels;
  if (docIds) out.docIds.emplace();
  for (std::size_t i : indices) {
    out.rows.push_back(rows.at(i));
    out.labels.push_back(labels.at(i));
    if (docIds) out.docIds->push_back((*docIds)[i]);
  }
  return out;
}

std::vector<std::size_t> Dataset::label_counts() const {
  std::vector<std::size_t> counts(numLabels, 0);
  for (auto l : labels) ++counts.at(static_cast<std::size_t>(l));
  return counts;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Dataset parse_dataset(std::istream& in, const std::string& labelColumn,
                      const std::optional<std::string>& idColumn, const std::string& sourceName) {
  std::string line;
  std::size_t lineNo = 0;
  auto location = [&](std::size_t row) {
    return sourceName + ": row " + std::to_string(row) + " (line " + std::to_string(lineNo) + ")";
  };

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineNo;
    if (trim(line).empty()) continue;
    for (auto f : split_fields(line)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw Error(sourceName + ": missing header row");

  const auto find_column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(sourceName + ": missing column '" + name + "'");
    return static_cast<std::size_t>(std::distance(header.begin(), it));
  };
  const std::size_t labelCol = find_column(labelColumn);
  const std::size_t idCol = idColumn ? find_column(*idColumn) : kNoIndex;

  Dataset data;
  std::vector<std::size_t> featureCols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == labelCol || c == idCol) continue;
    featureCols.push_back(c);
    data.featureNames.push_back(header[c]);
  }
  if (idColumn) data.docIds.emplace();

  QualityLabel maxLabel = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw Error(location(row) + ": expected " + std::to_string(header.size()) + " fields, got " +
                  std::to_string(fields.size()));
    }
    QualityLabel label = 0;
    if (!parse_number(fields[labelCol], label) || label < 0) {
      throw Error(location(row) + ", column '" + header[labelCol] + "': invalid label '" +
                  std::string(fields[labelCol]) + "'");
    }
    FeatureVector values;
    values.reserve(featureCols.size());
    for (std::size_t c : featureCols) {
      double v = 0.0;
      if (!parse_number(fields[c], v) || !std::isfinite(v)) {
        throw Error(location(row) + ", column '" + header[c] + "': non-numeric value '" +
                    std::string(fields[c]) + "'");
      }
      values.push_back(v);
    }
    data.rows.push_back(std::move(values));
    data.labels.push_back(label);
    maxLabel = std::max(maxLabel, label);
    if (idColumn) data.docIds->emplace_back(fields[idCol]);
  }
  if (data.rows.empty()) throw Error(sourceName + ": empty dataset");
  data.numLabels = std::max<std::size_t>(2, static_cast<std::size_t>(maxLabel) + 1);
  return data;
}

Dataset load_dataset(const std::filesystem::path& csvPath, const std::string& labelColumn,
                     const std::optional<std::string>& idColumn) {
  std::ifstream in(csvPath);
  if (!in) throw Error("cannot open " + csvPath.string());
  return parse_dataset(in, labelColumn, idColumn, csvPath.string());
}

void write_dataset(std::ostream& out, const Dataset& dataset, const std::string& labelColumn) {
  for (const auto& name : dataset.featureNames) out << name << ',';
  out << labelColumn;
  if (dataset.docIds) out << ",doc_id";
  out << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (double v : dataset.rows[i]) out << format_double(v) << ',';
    out << dataset.labels[i];
    if (dataset.docIds) out << ',' << (*dataset.docIds)[i];
    out << '\n';
  }
}

Dataset draw_sample(const Dataset& dataset, std::size_t size, std::uint64_t seed) {
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (size < idx.size()) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(size);
    std::sort(idx.begin(), idx.end());
  }
  return dataset.subset(idx);
}

Dataset weak_label_segments(const SegmentMap& map) {
  Dataset out;
  out.featureNames = map.featureNames;
  out.docIds.emplace();
  QualityLabel maxLabel = 0;
  for (const auto& [doc, label] : map.docLabels) maxLabel = std::max(maxLabel, label);
  out.numLabels = std::max<std::size_t>(2, static_cast<std::size_t>(maxLabel) + 1);
  for (const auto& [doc, features] : map.segments) {
    const auto it = map.docLabels.find(doc);
    if (it == map.docLabels.end()) throw Error("segment references unknown document '" + doc + "'");
    out.rows.push_back(features);
    out.labels.push_back(it->second);
    out.docIds->push_back(doc);
  }
  return out;
}

}  // namespace treeperturb
