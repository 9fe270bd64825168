// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsr/data/dataset.hpp"

namespace rsr::grouping {

/// k x m group weights of one instance, row-major.
struct GroupMatrix {
  std::size_t k = 0;
  std::size_t m = 0;
  std::vector<float> weights;

  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(weights).subspan(i * m, m);
  }
};

/// Top ceil(fraction * m) criteria of a row by weight, restricted to non-zero
/// entries. Ties go to the lower index. Sorted by index.
std::vector<std::size_t> representative_set(std::span<const float> row, double fraction = 0.1);

/// The `count` largest entries of a vector (ties to the lower index), sorted by index.
std::vector<std::size_t> top_indices(std::span<const float> values, std::size_t count);

enum class ShotMode { union_of_groups, per_group };

/// Mean over instances of psi: whether the representative criteria of the
/// groups hit the class's 10 strongest ground-truth criteria. In per_group
/// mode psi is the fraction of groups that hit.
double top10_shot_accuracy(const std::vector<GroupMatrix>& groups, const data::AttributeMatrix& attributes,
                           const std::vector<std::size_t>& labels, ShotMode mode = ShotMode::union_of_groups);

/// max(g) / min over non-zero entries of g.
double sparsity_degree(std::span<const float> g);

/// The o / no / ro chain for one instance, each k x |manual| row-major.
struct TendencyChain {
  std::size_t k = 0;
  std::size_t groups = 0;
  std::vector<double> o;
  std::vector<double> no;
  std::vector<double> ro;
};

/// Empty optional when no group has an annotated representative criterion.
std::optional<TendencyChain> tendency_chain(const GroupMatrix& g, const data::ManualGroups& manual);

struct SemanticTendency {
  std::size_t k = 0;
  std::size_t groups = 0;
  std::vector<double> mean_ro;  // "do", k x |manual|
  std::size_t skipped_instances = 0;
};

SemanticTendency semantic_tendency(const std::vector<GroupMatrix>& groups, const data::ManualGroups& manual);

struct HistogramBucket {
  std::size_t count = 0;
  float lo = 0.0f;
  float hi = 0.0f;
};

struct WeightHistogram {
  std::vector<HistogramBucket> buckets;
  std::size_t nonzero = 0;
  bool coarse = false;  // fewer than `bucket_count` non-zero weights
};

/// Sorted non-zero weights cut into `bucket_count` near-equal-count buckets.
WeightHistogram weight_histogram(std::span<const float> weights, std::size_t bucket_count = 10);

struct GroupAnalysisReport {
  double top10_shot_accuracy = 0.0;
  double sparsity_degree = 0.0;
  std::vector<std::string> manual_group_names;
  SemanticTendency tendency;
  WeightHistogram histogram;

  std::string to_json() const;
};

GroupAnalysisReport analyze_groups(const std::vector<GroupMatrix>& groups, const data::AttributeMatrix& attributes,
                                   const std::vector<std::size_t>& labels, const data::ManualGroups& manual,
                                   ShotMode mode = ShotMode::union_of_groups);

}  // namespace rsr::grouping
