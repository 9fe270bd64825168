// SPDX-License-Identifier: Apache-2.0
#include "rsr/data/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rsr/errors.hpp"
#include "rsr/nn/binary_io.hpp"

namespace rsr::data {

namespace bin = rsr::nn::binary;
using nlohmann::json;

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

ClassId parse_id(const json& v, const char* where) {
  if (!v.is_number_integer() || v.get<long long>() < 0 ||
      v.get<long long>() > static_cast<long long>(UINT32_MAX)) {
    throw ParseError(std::string(where) + ": class ids must be non-negative integers");
  }
  return static_cast<ClassId>(v.get<long long>());
}

}  // namespace

void write_features(std::ostream& out, const FeatureSet& features) {
  bin::write_bytes(out, "RSRF");
  bin::write_u32(out, kFeatureFormatVersion);
  bin::write_u32(out, static_cast<std::uint32_t>(features.size()));
  for (std::uint32_t d : features.feature_shape) bin::write_u32(out, d);
  for (ClassId id : features.labels) bin::write_u32(out, id);
  for (float v : features.features) bin::write_f32(out, v);
}

FeatureSet read_features(std::istream& in) {
  bin::expect_magic(in, "RSRF");
  const std::uint32_t version = bin::read_u32(in, "feature version");
  if (version != kFeatureFormatVersion) {
    throw ParseError("unsupported feature file version " + std::to_string(version));
  }
  FeatureSet fs;
  const std::uint32_t n = bin::read_u32(in, "instance count");
  for (auto& d : fs.feature_shape) d = bin::read_u32(in, "feature dimension");
  if (fs.feature_dim() == 0) throw InvariantError("feature shape has a zero dimension");
  fs.labels.resize(n);
  for (auto& id : fs.labels) id = bin::read_u32(in, "labels");
  const std::size_t count = std::size_t{n} * fs.feature_dim();
  fs.features.resize(count);
  // Bulk read then decode; the host order is irrelevant thanks to read_u32 semantics.
  std::vector<unsigned char> raw(count * 4);
  bin::read_exact(in, reinterpret_cast<char*>(raw.data()), raw.size(), "feature payload");
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* b = raw.data() + 4 * i;
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                               (static_cast<std::uint32_t>(b[2]) << 16) |
                               (static_cast<std::uint32_t>(b[3]) << 24);
    fs.features[i] = std::bit_cast<float>(bits);
  }
  return fs;
}

void save_features(const std::filesystem::path& path, const FeatureSet& features) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_features(out, features);
  if (!out) throw DataError("failed writing " + path.string());
}

FeatureSet load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_features(in);
}

FeatureSet load_features(const std::filesystem::path& path, const Split& split) {
  FeatureSet fs = load_features(path);
  std::set<ClassId> known(split.seen.begin(), split.seen.end());
  known.insert(split.unseen.begin(), split.unseen.end());
  for (ClassId id : fs.labels) {
    if (!known.count(id)) {
      throw LabelMismatchError("instance label " + std::to_string(id) + " is not in the split");
    }
  }
  return fs;
}

void write_attributes(std::ostream& out, const AttributeMatrix& attributes) {
  char buf[64];
  for (std::size_t r = 0; r < attributes.num_classes(); ++r) {
    out << attributes.class_ids[r];
    for (float v : attributes.row(r)) {
      // Shortest representation that round-trips exactly.
      auto res = std::to_chars(buf, buf + sizeof(buf), v);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

AttributeMatrix read_attributes(std::istream& in) {
  AttributeMatrix am;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (cells.size() < 2) throw ParseError("attributes line " + std::to_string(line_no) + ": no values");
    ClassId id = 0;
    {
      const auto& c = cells[0];
      auto res = std::from_chars(c.data(), c.data() + c.size(), id);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
        throw ParseError("attributes line " + std::to_string(line_no) + ": bad class id '" + c + "'");
      }
    }
    const std::size_t m = cells.size() - 1;
    if (first) {
      am.m = m;
      first = false;
    } else if (m != am.m) {
      throw InvariantError("attributes line " + std::to_string(line_no) + ": expected " +
                           std::to_string(am.m) + " values, got " + std::to_string(m));
    }
    am.class_ids.push_back(id);
    for (std::size_t j = 1; j < cells.size(); ++j) {
      const auto& c = cells[j];
      float v = 0.0f;
      auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size() || !std::isfinite(v)) {
        throw ParseError("attributes line " + std::to_string(line_no) + ": bad value '" + c + "'");
      }
      am.values.push_back(v);
    }
  }
  am.validate();
  return am;
}

void save_attributes(const std::filesystem::path& path, const AttributeMatrix& attributes) {
  std::ostringstream ss;
  write_attributes(ss, attributes);
  write_text(path, ss.str());
}

AttributeMatrix load_attributes(const std::filesystem::path& path) {
  std::istringstream ss(read_text(path));
  return read_attributes(ss);
}

void save_split(const std::filesystem::path& path, const Split& split) {
  json j{{"seen", split.seen}, {"unseen", split.unseen}};
  write_text(path, j.dump() + "\n");
}

Split parse_split(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("split file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("seen") || !j.contains("unseen") || !j["seen"].is_array() ||
      !j["unseen"].is_array()) {
    throw ParseError("split file must be {\"seen\": [...], \"unseen\": [...]}");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "seen" && key != "unseen") throw ParseError("split file: unknown key '" + key + "'");
  }
  Split s;
  for (const auto& v : j["seen"]) s.seen.push_back(parse_id(v, "split seen"));
  for (const auto& v : j["unseen"]) s.unseen.push_back(parse_id(v, "split unseen"));
  s.validate();
  return s;
}

Split load_split(const std::filesystem::path& path) { return parse_split(read_text(path)); }

void save_manual_groups(const std::filesystem::path& path, const ManualGroups& groups) {
  json j = json::object();
  for (const auto& [name, idx] : groups) j[name] = idx;
  write_text(path, j.dump(2) + "\n");
}

ManualGroups parse_manual_groups(const std::string& text, std::size_t m) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("manual groups: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("manual groups must be a JSON object");
  ManualGroups out;
  std::set<std::size_t> used;
  for (const auto& [name, list] : j.items()) {
    if (!list.is_array()) throw ParseError("manual group '" + name + "' must be an array");
    std::vector<std::size_t> idx;
    for (const auto& v : list) {
      if (!v.is_number_integer() || v.get<long long>() < 0 ||
          static_cast<std::size_t>(v.get<long long>()) >= m) {
        throw ParseError("manual group '" + name + "': criterion index out of range");
      }
      const auto i = static_cast<std::size_t>(v.get<long long>());
      if (!used.insert(i).second) {
        throw InvariantError("criterion " + std::to_string(i) + " appears in two manual groups");
      }
      idx.push_back(i);
    }
    out.emplace_back(name, std::move(idx));
  }
  return out;
}

ManualGroups load_manual_groups(const std::filesystem::path& path, std::size_t m) {
  return parse_manual_groups(read_text(path), m);
}

DatasetPaths DatasetPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "features.rsrf", dir / "attributes.csv", dir / "split.json", dir / "manual_groups.json"};
}

void save_dataset(const DatasetPaths& paths, const Dataset& dataset) {
  save_features(paths.features, dataset.features());
  save_attributes(paths.attributes, dataset.attributes());
  save_split(paths.split, dataset.split());
}

Dataset load_dataset(const DatasetPaths& paths) {
  Split split = load_split(paths.split);
  AttributeMatrix attributes = load_attributes(paths.attributes);
  FeatureSet features = load_features(paths.features, split);
  return Dataset::assemble(std::move(features), std::move(attributes), std::move(split));
}

}  // namespace rsr::data
