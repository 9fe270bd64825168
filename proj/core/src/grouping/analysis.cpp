// SPDX-License-Identifier: Apache-2.0
#include "rsr/grouping/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <json.hpp>

#include "rsr/data/synth.hpp"
#include "rsr/errors.hpp"

namespace rsr::grouping {

std::vector<std::size_t> top_indices(std::span<const float> values, std::size_t count) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  idx.resize(std::min(count, idx.size()));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::size_t> representative_set(std::span<const float> row, double fraction) {
  const auto want = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(row.size())));
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] > 0.0f) idx.push_back(j);
  }
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  idx.resize(std::min(want, idx.size()));
  std::sort(idx.begin(), idx.end());
  return idx;
}

double top10_shot_accuracy(const std::vector<GroupMatrix>& groups, const data::AttributeMatrix& attributes,
                           const std::vector<std::size_t>& labels, ShotMode mode) {
  if (groups.empty()) throw ContractError("top-10 shot accuracy needs at least one instance");
  if (groups.size() != labels.size()) throw DimensionError("one label per group matrix expected");
  double total = 0.0;
  for (std::size_t x = 0; x < groups.size(); ++x) {
    const auto truth = top_indices(attributes.row(labels[x]), 10);
    auto hits = [&](const std::vector<std::size_t>& rep) {
      for (std::size_t j : rep) {
        if (std::binary_search(truth.begin(), truth.end(), j)) return true;
      }
      return false;
    };
    const GroupMatrix& g = groups[x];
    if (mode == ShotMode::union_of_groups) {
      std::vector<std::size_t> all;
      for (std::size_t i = 0; i < g.k; ++i) {
        auto rep = representative_set(g.row(i));
        all.insert(all.end(), rep.begin(), rep.end());
      }
      total += hits(all) ? 1.0 : 0.0;
    } else {
      double frac = 0.0;
      for (std::size_t i = 0; i < g.k; ++i) frac += hits(representative_set(g.row(i))) ? 1.0 : 0.0;
      total += frac / static_cast<double>(g.k);
    }
  }
  return total / static_cast<double>(groups.size());
}

double sparsity_degree(std::span<const float> g) {
  float hi = 0.0f;
  float lo = std::numeric_limits<float>::infinity();
  for (float v : g) {
    if (v < 0.0f) throw ContractError("group weights must be non-negative");
    if (v > 0.0f) {
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
  }
  if (hi == 0.0f) throw DegenerateError("sparsity degree of an all-zero group matrix");
  return static_cast<double>(hi) / static_cast<double>(lo);
}

std::optional<TendencyChain> tendency_chain(const GroupMatrix& g, const data::ManualGroups& manual) {
  TendencyChain c;
  c.k = g.k;
  c.groups = manual.size();
  c.o.assign(g.k * manual.size(), 0.0);
  std::vector<int> owner(g.m, -1);
  for (std::size_t j = 0; j < manual.size(); ++j) {
    for (std::size_t crit : manual[j].second) {
      if (crit >= g.m) throw ContractError("manual group criterion out of range");
      owner[crit] = static_cast<int>(j);
    }
  }
  // o: share of each manual group among the annotated representatives.
  for (std::size_t i = 0; i < g.k; ++i) {
    std::size_t annotated = 0;
    for (std::size_t crit : representative_set(g.row(i))) {
      if (owner[crit] < 0) continue;
      ++annotated;
      c.o[i * c.groups + static_cast<std::size_t>(owner[crit])] += 1.0;
    }
    if (annotated == 0) continue;
    for (std::size_t j = 0; j < c.groups; ++j) c.o[i * c.groups + j] /= static_cast<double>(annotated);
  }
  double max_norm = 0.0;
  for (std::size_t i = 0; i < g.k; ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < c.groups; ++j) sq += c.o[i * c.groups + j] * c.o[i * c.groups + j];
    max_norm = std::max(max_norm, std::sqrt(sq));
  }
  if (max_norm == 0.0) return std::nullopt;
  c.no.resize(c.o.size());
  c.ro.resize(c.o.size());
  for (std::size_t i = 0; i < c.o.size(); ++i) c.no[i] = c.o[i] / max_norm;
  for (std::size_t i = 0; i < g.k; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < c.groups; ++j) z += std::exp(c.no[i * c.groups + j]);
    for (std::size_t j = 0; j < c.groups; ++j) c.ro[i * c.groups + j] = std::exp(c.no[i * c.groups + j]) / z;
  }
  return c;
}

SemanticTendency semantic_tendency(const std::vector<GroupMatrix>& groups, const data::ManualGroups& manual) {
  if (manual.empty()) throw ContractError("semantic tendency needs at least one manual group");
  SemanticTendency out;
  out.groups = manual.size();
  std::size_t used = 0;
  for (const auto& g : groups) {
    if (out.k == 0) {
      out.k = g.k;
      out.mean_ro.assign(g.k * manual.size(), 0.0);
    }
    auto chain = tendency_chain(g, manual);
    if (!chain) {
      ++out.skipped_instances;
      continue;
    }
    ++used;
    for (std::size_t i = 0; i < chain->ro.size(); ++i) out.mean_ro[i] += chain->ro[i];
  }
  if (used > 0) {
    for (double& v : out.mean_ro) v /= static_cast<double>(used);
  }
  return out;
}

WeightHistogram weight_histogram(std::span<const float> weights, std::size_t bucket_count) {
  if (bucket_count == 0) throw ContractError("histogram needs at least one bucket");
  std::vector<float> nz;
  for (float v : weights) {
    if (v > 0.0f) nz.push_back(v);
  }
  std::sort(nz.begin(), nz.end());
  WeightHistogram h;
  h.nonzero = nz.size();
  h.coarse = nz.size() < bucket_count;
  const std::size_t parts = std::min(bucket_count, nz.size());
  for (const auto& range : data::partition_range(nz.size(), parts)) {
    h.buckets.push_back({range.size(), nz[range.front()], nz[range.back()]});
  }
  return h;
}

GroupAnalysisReport analyze_groups(const std::vector<GroupMatrix>& groups, const data::AttributeMatrix& attributes,
                                   const std::vector<std::size_t>& labels, const data::ManualGroups& manual,
                                   ShotMode mode) {
  GroupAnalysisReport r;
  r.top10_shot_accuracy = top10_shot_accuracy(groups, attributes, labels, mode);
  std::vector<float> all;
  double sparsity = 0.0;
  std::size_t counted = 0;
  for (const auto& g : groups) {
    all.insert(all.end(), g.weights.begin(), g.weights.end());
    if (std::any_of(g.weights.begin(), g.weights.end(), [](float v) { return v > 0.0f; })) {
      sparsity += sparsity_degree(g.weights);
      ++counted;
    }
  }
  r.sparsity_degree = counted ? sparsity / static_cast<double>(counted) : 0.0;
  for (const auto& [name, _] : manual) r.manual_group_names.push_back(name);
  if (!manual.empty()) r.tendency = semantic_tendency(groups, manual);
  r.histogram = weight_histogram(all);
  return r;
}

std::string GroupAnalysisReport::to_json() const {
  nlohmann::json j;
  j["top10_shot_accuracy"] = top10_shot_accuracy;
  j["sparsity_degree"] = sparsity_degree;
  j["manual_groups"] = manual_group_names;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < tendency.k; ++i) {
    std::vector<double> row(tendency.mean_ro.begin() + static_cast<long>(i * tendency.groups),
                            tendency.mean_ro.begin() + static_cast<long>((i + 1) * tendency.groups));
    rows.push_back(row);
  }
  j["semantic_tendency"] = rows;
  j["skipped_instances"] = tendency.skipped_instances;
  nlohmann::json buckets = nlohmann::json::array();
  for (const auto& b : histogram.buckets) buckets.push_back({{"count", b.count}, {"lo", b.lo}, {"hi", b.hi}});
  j["weight_histogram"] = {{"buckets", buckets}, {"nonzero", histogram.nonzero}, {"coarse", histogram.coarse}};
  return j.dump(2);
}

}  // namespace rsr::grouping
