// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsr/grouping/analysis.hpp"
#include "rsr/pipeline/model.hpp"
#include "rsr/review/episode.hpp"

namespace rsr::pipeline {

enum class EvalMode { zsl, gzsl };

/// 2us / (u + s); 0 when both are 0.
double harmonic_mean(double u, double s);

/// Mean over classes of the within-class hit rate. Classes with no instance
/// do not appear; `skipped` lists none since only present labels are counted.
struct PerClassAccuracy {
  std::map<std::size_t, double> per_class;
  double mean = 0.0;
};
PerClassAccuracy per_class_accuracy(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& labels);

/// Calibrated stacking: argmax over the bank of a^T phi - sign * eps * [class unseen].
std::size_t predict_class(std::span<const float> a, const data::ClassBank& bank, const std::vector<bool>& unseen,
                          double epsilon, CalibrationSign sign);

struct StepMetrics {
  double t1 = 0.0;  // ZSL per-class Top-1
  double u = 0.0;
  double s = 0.0;
  double h = 0.0;
};

struct EvalReport {
  EvalMode mode = EvalMode::zsl;
  StepMetrics final;                 // from each episode's final a^t
  std::vector<StepMetrics> per_step;  // index 0 = preview
  std::size_t best_step = 0;          // argmax over steps >= 1 of the headline metric
  double best_value = 0.0;
  double mean_steps = 0.0;
  std::map<std::size_t, double> per_class;  // class id -> accuracy of the final prediction

  /// T1 in ZSL, H in GZSL.
  double headline(const StepMetrics& m) const { return mode == EvalMode::zsl ? m.t1 : m.h; }
  std::string to_json(bool include_per_step = true) const;
};

enum class EvalSelector { configured, policy, random, scripted_identity };

struct EvalOptions {
  EvalMode mode = EvalMode::zsl;
  EvalSelector selector = EvalSelector::configured;
  std::optional<bool> early_stop;  // overrides the config when set
};

/// Runs a review episode per evaluation instance against a frozen model.
/// ZSL: unseen instances over unseen classes. GZSL: unseen plus held-out
/// seen instances over all classes, with calibrated stacking.
EvalReport evaluate(const RunConfig& config, const PreparedData& data, const RsrModel& model,
                    const EvalOptions& options = {});

/// Instances and class bank an evaluation mode uses.
const std::vector<std::size_t>& eval_instances(const PreparedData& data, EvalMode mode, std::vector<std::size_t>& scratch);
const data::ClassBank& eval_bank(const PreparedData& data, EvalMode mode);

/// Inference episode for one instance under `mode`.
review::ReviewTrajectory infer(const RunConfig& config, const PreparedData& data, const RsrModel& model,
                               const preview::PreviewCache& cache, std::size_t instance, EvalMode mode,
                               review::Selector& selector, std::optional<bool> early_stop = std::nullopt);

/// Group-selection quality on the synthetic task, measured on held-out seen
/// instances against the seen bank. Frequency counts paired classes only.
struct SelectionReport {
  double informative_frequency = 0.0;  // first pick == the pair's differing block
  double policy_step1 = 0.0;           // per-class T1 after one policy-chosen revision
  double random_step1 = 0.0;           // same with a uniformly random first group
  double preview = 0.0;
  std::size_t paired_instances = 0;
};
SelectionReport selection_report(const RunConfig& config, const PreparedData& data, const RsrModel& model);

/// Group matrices of every test instance (held-out seen and unseen), scored
/// against `manual` annotations.
grouping::GroupAnalysisReport analyze(const RunConfig& config, const PreparedData& data, const RsrModel& model,
                                      const data::ManualGroups& manual,
                                      grouping::ShotMode mode = grouping::ShotMode::union_of_groups);

/// JSON-lines decision trace, one object per instance.
void export_trace(const RunConfig& config, const PreparedData& data, const RsrModel& model,
                  const std::vector<std::size_t>& instances, EvalMode mode, const std::filesystem::path& path);
std::string trace_line(const RunConfig& config, const PreparedData& data, std::size_t instance, EvalMode mode,
                       const review::ReviewTrajectory& trajectory);

}  // namespace rsr::pipeline
