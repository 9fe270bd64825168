// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "rsr/adversarial/adversarial.hpp"
#include "rsr/data/class_bank.hpp"
#include "rsr/data/synth.hpp"
#include "rsr/grouping/grouping.hpp"
#include "rsr/pipeline/config.hpp"
#include "rsr/policy/policy.hpp"
#include "rsr/preview/preview.hpp"
#include "rsr/review/review.hpp"

namespace rsr::pipeline {

/// Dataset plus the instance partition and class banks a run works with.
struct PreparedData {
  data::Dataset dataset;
  data::ManualGroups manual_groups;
  /// Present when the data was generated.
  std::optional<data::SynthDataset> synth;

  std::vector<std::size_t> train;        // seen-class training instances
  std::vector<std::size_t> seen_test;    // held-out seen-class instances
  std::vector<std::size_t> unseen_test;  // every unseen-class instance

  data::ClassBank seen_bank;
  data::ClassBank unseen_bank;
  data::ClassBank all_bank;  // seen then unseen
};

/// Loads `data_dir` or generates the synthetic set, then splits seen
/// instances per class into train / held-out with a seeded shuffle.
PreparedData prepare_data(const RunConfig& config);

/// Every module of RSR / A-RSR.
struct RsrModel {
  preview::PreviewModel preview;
  grouping::GroupingNet grouping;
  review::RevisionModule revision;
  policy::PolicyNet policy;
  adversarial::Discriminator discriminator;

  RsrModel(const RunConfig& config, const PreparedData& data);

  void init(nn::Rng& rng);
  nn::ParameterList parameters();
  nn::ParameterList review_parameters();  // f_p (unless oracle) and f_v
  review::ReviewModels review_models() const { return {&grouping, &revision}; }

  void save(const std::filesystem::path& path);
  /// Restores every parameter; a missing or mis-shaped entry is a DataError.
  void load(const std::filesystem::path& path);
};

/// A trained checkpoint with the config it was trained under and its data.
struct LoadedRun {
  RunConfig config;
  PreparedData data;
  RsrModel model;
};

/// Reads the config sidecar, rebuilds the data, and restores the weights.
LoadedRun load_run(const std::filesystem::path& checkpoint);

}  // namespace rsr::pipeline
