// SPDX-License-Identifier: Apache-2.0
#include "rsr/data/synth.hpp"

#include <cmath>

#include "rsr/errors.hpp"
#include "rsr/nn/random.hpp"

namespace rsr::data {

void SynthConfig::validate() const {
  auto at_least_one = [](std::size_t v, const char* key) {
    if (v < 1) throw ConfigError(key, "must be >= 1");
  };
  at_least_one(n_seen_classes, "synth_n_seen_classes");
  at_least_one(n_unseen_classes, "synth_n_unseen_classes");
  at_least_one(m, "synth_m");
  at_least_one(instances_per_class, "synth_instances_per_class");
  at_least_one(planted_group_count, "synth_planted_group_count");
  if (planted_group_count > m) throw ConfigError("synth_planted_group_count", "must be <= m");
  if (feature_dim < planted_group_count) {
    throw ConfigError("synth_feature_dim", "must be >= planted_group_count");
  }
  if (!(noise_scale >= 0.0f) || !std::isfinite(noise_scale)) {
    throw ConfigError("synth_noise_scale", "must be finite and >= 0");
  }
  if (!(attribute_scale > 0.0f) || !std::isfinite(attribute_scale)) {
    throw ConfigError("synth_attribute_scale", "must be finite and > 0");
  }
}

std::vector<std::vector<std::size_t>> partition_range(std::size_t n, std::size_t parts) {
  std::vector<std::vector<std::size_t>> out(parts);
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t begin = p * n / parts;
    const std::size_t end = (p + 1) * n / parts;
    for (std::size_t i = begin; i < end; ++i) out[p].push_back(i);
  }
  return out;
}

std::optional<std::size_t> SynthDataset::informative_block(std::size_t class_index) const {
  for (const auto& p : pairs) {
    if (p.first == class_index || p.second == class_index) return p.block;
  }
  return std::nullopt;
}

ManualGroups SynthDataset::manual_groups() const {
  ManualGroups out;
  for (std::size_t b = 0; b < blocks.size(); ++b) out.emplace_back("block" + std::to_string(b), blocks[b]);
  return out;
}

SynthDataset synth_dataset(const SynthConfig& config) {
  config.validate();
  nn::Rng rng(config.seed);
  const std::size_t m = config.m;
  const std::size_t n_classes = config.n_seen_classes + config.n_unseen_classes;
  const std::size_t groups = config.planted_group_count;

  SynthDataset out;
  out.blocks = partition_range(m, groups);
  out.feature_segments = partition_range(config.feature_dim, groups);

  // Raw attributes in [0,1], pairs formed inside the seen and unseen sets.
  std::vector<float> attr(n_classes * m);
  for (float& v : attr) v = rng.uniform(0.0f, 1.0f);
  std::size_t next_block = 0;
  auto make_pairs = [&](std::size_t begin, std::size_t count) {
    for (std::size_t i = 0; i + 1 < count; i += 2) {
      const std::size_t a = begin + i, b = begin + i + 1;
      const std::size_t block = next_block++ % groups;
      for (std::size_t j = 0; j < m; ++j) attr[b * m + j] = attr[a * m + j];
      // Redraw the differing block until it is clearly distinct.
      for (int tries = 0; tries < 100; ++tries) {
        float diff = 0.0f;
        for (std::size_t j : out.blocks[block]) {
          attr[b * m + j] = rng.uniform(0.0f, 1.0f);
          diff += std::abs(attr[b * m + j] - attr[a * m + j]);
        }
        if (diff / static_cast<float>(out.blocks[block].size()) >= 0.3f) break;
      }
      out.pairs.push_back({a, b, block});
    }
  };
  make_pairs(0, config.n_seen_classes);
  make_pairs(config.n_seen_classes, config.n_unseen_classes);

  // Mean-center every criterion over classes.
  for (std::size_t j = 0; j < m; ++j) {
    double mean = 0.0;
    for (std::size_t c = 0; c < n_classes; ++c) mean += attr[c * m + j];
    mean /= static_cast<double>(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
      attr[c * m + j] = (attr[c * m + j] - static_cast<float>(mean)) * config.attribute_scale;
    }
  }

  AttributeMatrix am;
  am.m = m;
  am.values = attr;
  Split split;
  for (std::size_t c = 0; c < n_classes; ++c) {
    am.class_ids.push_back(static_cast<ClassId>(c));
    (c < config.n_seen_classes ? split.seen : split.unseen).push_back(static_cast<ClassId>(c));
  }

  // One embedding matrix per block: segment_b = E_b * phi_b.
  std::vector<std::vector<float>> embed(groups);
  for (std::size_t b = 0; b < groups; ++b) {
    const std::size_t rows = out.feature_segments[b].size();
    const std::size_t cols = out.blocks[b].size();
    const float sd = 1.0f / std::sqrt(static_cast<float>(cols));
    embed[b].resize(rows * cols);
    for (float& v : embed[b]) v = rng.normal(0.0f, sd);
  }

  FeatureSet fs;
  fs.feature_shape = {1, 1, static_cast<std::uint32_t>(config.feature_dim)};
  nn::Rng noise_rng = rng.fork();
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t i = 0; i < config.instances_per_class; ++i) {
      fs.labels.push_back(static_cast<ClassId>(c));
      std::vector<float> x(config.feature_dim, 0.0f);
      for (std::size_t b = 0; b < groups; ++b) {
        const auto& seg = out.feature_segments[b];
        const auto& blk = out.blocks[b];
        for (std::size_t r = 0; r < seg.size(); ++r) {
          float acc = 0.0f;
          for (std::size_t q = 0; q < blk.size(); ++q) acc += embed[b][r * blk.size() + q] * attr[c * m + blk[q]];
          x[seg[r]] = acc;
        }
      }
      if (config.noise_scale > 0.0f) {
        for (float& v : x) v += noise_rng.normal(0.0f, config.noise_scale);
      }
      fs.features.insert(fs.features.end(), x.begin(), x.end());
    }
  }

  out.dataset = Dataset::assemble(std::move(fs), std::move(am), std::move(split));
  return out;
}

}  // namespace rsr::data
