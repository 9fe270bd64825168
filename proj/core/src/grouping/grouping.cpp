// SPDX-License-Identifier: Apache-2.0
#include "rsr/grouping/grouping.hpp"

#include "rsr/errors.hpp"

namespace rsr::grouping {

void GroupingConfig::validate() const {
  if (embed_input == 0) throw ConfigError("feature_dim", "must be >= 1");
  if (m == 0) throw ConfigError("m", "must be >= 1");
  if (k == 0) throw ConfigError("k", "must be >= 1");
  if (embed_dim == 0) throw ConfigError("grouping_embed_dim", "must be >= 1");
  if (hidden == 0) throw ConfigError("grouping_hidden", "must be >= 1");
  if (oracle()) {
    if (oracle_masks.size() != k) throw ConfigError("k", "oracle grouping needs exactly k masks");
    for (const auto& row : oracle_masks) {
      if (row.size() != m) throw ConfigError("m", "oracle mask length must be m");
      for (float v : row) {
        if (!(v >= 0.0f)) throw ConfigError("grouping", "oracle masks must be non-negative");
      }
    }
  }
}

GroupingNet::GroupingNet(const GroupingConfig& config)
    : config_(config),
      embed_("grouping.embed", config.embed_input, config.embed_dim),
      hidden_("grouping.hidden", config.embed_dim + config.m, config.hidden),
      out_("grouping.out", config.hidden, config.k * config.m) {
  config_.validate();
  for (const auto& row : config_.oracle_masks) oracle_flat_.insert(oracle_flat_.end(), row.begin(), row.end());
}

void GroupingNet::init(nn::Rng& rng) {
  embed_.init(rng);
  hidden_.init(rng);
  out_.init(rng);
}

void GroupingNet::collect(nn::ParameterList& out) {
  embed_.collect(out);
  hidden_.collect(out);
  out_.collect(out);
}

nn::ParameterList GroupingNet::parameters() {
  nn::ParameterList out;
  collect(out);
  return out;
}

std::vector<std::vector<float>> block_masks(const std::vector<std::vector<std::size_t>>& blocks, std::size_t m) {
  std::vector<std::vector<float>> out;
  for (const auto& b : blocks) {
    std::vector<float> row(m, 0.0f);
    for (std::size_t j : b) {
      if (j >= m) throw ContractError("block criterion out of range");
      row[j] = 1.0f;
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace rsr::grouping
