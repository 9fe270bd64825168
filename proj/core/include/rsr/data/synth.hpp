// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "rsr/data/dataset.hpp"

namespace rsr::data {

/// Planted-group synthetic benchmark.
///
/// The m criteria are split into `planted_group_count` contiguous blocks.
/// Classes come in confusable pairs: the second member copies the first
/// except for one block, which is redrawn. Features are block-structured:
/// feature segment b is a fixed random linear map of block b, plus
/// isotropic Gaussian noise. Within a pair, only the differing block's
/// segment carries any signal.
struct SynthConfig {
  std::size_t n_seen_classes = 20;
  std::size_t n_unseen_classes = 5;
  std::size_t m = 16;
  std::size_t instances_per_class = 40;
  std::size_t planted_group_count = 4;
  std::size_t feature_dim = 64;
  float noise_scale = 0.3f;
  float attribute_scale = 1.0f;  // multiplies the centered attributes
  std::uint64_t seed = 272;

  /// Throws ConfigError on a violated bound.
  void validate() const;
};

struct ConfusionPair {
  std::size_t first;  // dense class index
  std::size_t second;
  std::size_t block;  // the one block where they differ
};

struct SynthDataset {
  Dataset dataset;
  /// Criterion indices of each planted block.
  std::vector<std::vector<std::size_t>> blocks;
  /// Feature indices of each block's segment.
  std::vector<std::vector<std::size_t>> feature_segments;
  std::vector<ConfusionPair> pairs;

  /// Block that separates class c from its partner, if c is paired.
  std::optional<std::size_t> informative_block(std::size_t class_index) const;
  /// The planted blocks as named manual groups ("block0", ...).
  ManualGroups manual_groups() const;
};

/// Pure function of `config`: equal configs give bit-identical output.
SynthDataset synth_dataset(const SynthConfig& config);

/// Contiguous near-equal partition of [0, n) into `parts` ranges.
std::vector<std::vector<std::size_t>> partition_range(std::size_t n, std::size_t parts);

}  // namespace rsr::data
