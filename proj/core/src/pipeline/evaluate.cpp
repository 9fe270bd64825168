// SPDX-License-Identifier: Apache-2.0
#include "rsr/pipeline/evaluate.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "rsr/errors.hpp"
#include "rsr/grouping/analysis.hpp"
#include "rsr/nn/kernels.hpp"
#include "rsr/pipeline/log.hpp"
#include "rsr/policy/policy.hpp"

namespace rsr::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;

double harmonic_mean(double u, double s) {
  if (u + s <= 0.0) return 0.0;
  return 2.0 * u * s / (u + s);
}

PerClassAccuracy per_class_accuracy(const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& labels) {
  if (predicted.size() != labels.size()) throw DimensionError("one prediction per label expected");
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> counts;  // class -> (hits, total)
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto& c = counts[labels[i]];
    c.first += predicted[i] == labels[i];
    ++c.second;
  }
  PerClassAccuracy out;
  for (const auto& [cls, c] : counts) {
    out.per_class[cls] = static_cast<double>(c.first) / static_cast<double>(c.second);
    out.mean += out.per_class[cls];
  }
  if (!counts.empty()) out.mean /= static_cast<double>(counts.size());
  return out;
}

std::size_t predict_class(std::span<const float> a, const data::ClassBank& bank, const std::vector<bool>& unseen,
                          double epsilon, CalibrationSign sign) {
  if (unseen.size() != bank.size()) throw DimensionError("one unseen flag per class expected");
  const double s = sign == CalibrationSign::penalize_unseen ? 1.0 : -1.0;
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < bank.size(); ++c) {
    double score = nn::kernels::dot(a, bank.row(c));
    if (unseen[c]) score -= s * epsilon;
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  return bank.classes[best];
}

const std::vector<std::size_t>& eval_instances(const PreparedData& data, EvalMode mode,
                                               std::vector<std::size_t>& scratch) {
  if (mode == EvalMode::zsl) return data.unseen_test;
  scratch = data.unseen_test;
  scratch.insert(scratch.end(), data.seen_test.begin(), data.seen_test.end());
  std::sort(scratch.begin(), scratch.end());
  return scratch;
}

const data::ClassBank& eval_bank(const PreparedData& data, EvalMode mode) {
  return mode == EvalMode::zsl ? data.unseen_bank : data.all_bank;
}

review::ReviewTrajectory infer(const RunConfig& config, const PreparedData& data, const RsrModel& model,
                               const preview::PreviewCache& cache, std::size_t instance, EvalMode mode,
                               review::Selector& selector, std::optional<bool> early_stop) {
  review::EpisodeOptions o;
  o.review = config.review_config();
  o.confidence_bank = &eval_bank(data, mode);
  o.early_stop = early_stop.value_or(config.early_stop);
  return review::review_episode(cache[instance], model.review_models(), selector, o);
}

namespace {

class IdentitySelector final : public review::Selector {
 public:
  std::size_t select(const review::SelectionState& s) override { return s.step; }
};

StepMetrics metrics_for(EvalMode mode, const PreparedData& data, const std::vector<std::size_t>& instances,
                        const std::vector<std::size_t>& predicted) {
  StepMetrics m;
  std::vector<std::size_t> labels;
  for (std::size_t i : instances) labels.push_back(data.dataset.label(i));
  if (mode == EvalMode::zsl) {
    m.t1 = per_class_accuracy(predicted, labels).mean;
    return m;
  }
  std::vector<std::size_t> pu, lu, ps, ls;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (data.dataset.is_seen(labels[j])) {
      ps.push_back(predicted[j]);
      ls.push_back(labels[j]);
    } else {
      pu.push_back(predicted[j]);
      lu.push_back(labels[j]);
    }
  }
  m.u = per_class_accuracy(pu, lu).mean;
  m.s = per_class_accuracy(ps, ls).mean;
  m.h = harmonic_mean(m.u, m.s);
  return m;
}

}  // namespace

EvalReport evaluate(const RunConfig& config, const PreparedData& data, const RsrModel& model,
                    const EvalOptions& options) {
  std::vector<std::size_t> scratch;
  const auto& instances = eval_instances(data, options.mode, scratch);
  if (instances.empty()) throw InvariantError("no evaluation instances");
  const auto& bank = eval_bank(data, options.mode);
  std::vector<bool> unseen(bank.size());
  for (std::size_t c = 0; c < bank.size(); ++c) unseen[c] = !data.dataset.is_seen(bank.classes[c]);

  const preview::PreviewCache cache(model.preview, data.dataset);
  EvalSelector which = options.selector;
  if (which == EvalSelector::configured) {
    which = config.selection == Selection::reinforced ? EvalSelector::policy : EvalSelector::random;
  }
  nn::Rng rng(config.seed * 1000003ULL + 17);
  std::unique_ptr<review::Selector> selector;
  if (which == EvalSelector::policy) {
    selector = std::make_unique<policy::PolicySelector>(model.policy, nullptr, false);
  } else if (which == EvalSelector::random) {
    selector = std::make_unique<review::RandomSelector>(rng);
  } else {
    selector = std::make_unique<IdentitySelector>();
  }

  const std::size_t k = config.k;
  std::vector<std::vector<std::size_t>> per_step(k + 1);
  std::vector<std::size_t> final_pred;
  double steps = 0.0;
  for (std::size_t i : instances) {
    const auto traj = infer(config, data, model, cache, i, options.mode, *selector, options.early_stop);
    for (std::size_t s = 0; s <= k; ++s) {
      per_step[s].push_back(predict_class(traj.prediction_at(s), bank, unseen, config.calibration_epsilon,
                                          config.calibration_sign));
    }
    final_pred.push_back(predict_class(traj.final_prediction(), bank, unseen, config.calibration_epsilon,
                                       config.calibration_sign));
    steps += static_cast<double>(traj.steps.size());
  }

  EvalReport r;
  r.mode = options.mode;
  r.final = metrics_for(options.mode, data, instances, final_pred);
  for (std::size_t s = 0; s <= k; ++s) r.per_step.push_back(metrics_for(options.mode, data, instances, per_step[s]));
  r.best_step = 1;
  r.best_value = r.headline(r.per_step[1]);
  for (std::size_t s = 2; s <= k; ++s) {
    if (r.headline(r.per_step[s]) > r.best_value) {
      r.best_value = r.headline(r.per_step[s]);
      r.best_step = s;
    }
  }
  r.mean_steps = steps / static_cast<double>(instances.size());
  std::vector<std::size_t> labels;
  for (std::size_t i : instances) labels.push_back(data.dataset.label(i));
  for (const auto& [cls, acc] : per_class_accuracy(final_pred, labels).per_class) {
    r.per_class[data.dataset.attributes().class_ids[cls]] = acc;
  }
  return r;
}

SelectionReport selection_report(const RunConfig& config, const PreparedData& data, const RsrModel& model) {
  if (!data.synth) throw DataError("selection report needs the synthetic benchmark");
  const auto& instances = data.seen_test;
  if (instances.empty()) throw InvariantError("no held-out seen instances");
  const auto& bank = data.seen_bank;
  const std::vector<bool> unseen(bank.size(), false);
  const preview::PreviewCache cache(model.preview, data.dataset);
  review::EpisodeOptions o;
  o.review = config.review_config();
  o.confidence_bank = &bank;
  o.early_stop = false;

  policy::PolicySelector chosen(model.policy, nullptr, false);
  nn::Rng rng(config.seed * 1000003ULL + 19);
  review::RandomSelector random(rng);
  std::vector<std::size_t> labels, pre, by_policy, by_random;
  SelectionReport r;
  std::size_t hits = 0;
  for (std::size_t i : instances) {
    const std::size_t y = data.dataset.label(i);
    labels.push_back(y);
    const auto tp = review::review_episode(cache[i], model.review_models(), chosen, o);
    const auto tr = review::review_episode(cache[i], model.review_models(), random, o);
    pre.push_back(predict_class(tp.a0, bank, unseen, 0.0, config.calibration_sign));
    by_policy.push_back(predict_class(tp.prediction_at(1), bank, unseen, 0.0, config.calibration_sign));
    by_random.push_back(predict_class(tr.prediction_at(1), bank, unseen, 0.0, config.calibration_sign));
    if (const auto block = data.synth->informative_block(y)) {
      ++r.paired_instances;
      hits += tp.steps.front().group == *block;
    }
  }
  r.informative_frequency = r.paired_instances ? static_cast<double>(hits) / static_cast<double>(r.paired_instances) : 0.0;
  r.preview = per_class_accuracy(pre, labels).mean;
  r.policy_step1 = per_class_accuracy(by_policy, labels).mean;
  r.random_step1 = per_class_accuracy(by_random, labels).mean;
  return r;
}

grouping::GroupAnalysisReport analyze(const RunConfig& config, const PreparedData& data, const RsrModel& model,
                                      const data::ManualGroups& manual, grouping::ShotMode mode) {
  std::vector<std::size_t> scratch;
  const auto& instances = eval_instances(data, EvalMode::gzsl, scratch);
  if (instances.empty()) throw InvariantError("no test instances to analyze");
  const preview::PreviewCache cache(model.preview, data.dataset);
  IdentitySelector selector;
  std::vector<grouping::GroupMatrix> groups;
  std::vector<std::size_t> labels;
  for (std::size_t i : instances) {
    // g depends only on (h, a0), not on the selection order.
    const auto traj = infer(config, data, model, cache, i, EvalMode::gzsl, selector);
    groups.push_back({config.k, data.dataset.m(), traj.groups});
    labels.push_back(data.dataset.label(i));
  }
  return grouping::analyze_groups(groups, data.dataset.attributes(), labels, manual, mode);
}

std::string EvalReport::to_json(bool include_per_step) const {
  auto metrics = [this](const StepMetrics& m) {
    if (mode == EvalMode::zsl) return ordered_json{{"t1", m.t1}};
    return ordered_json{{"u", m.u}, {"s", m.s}, {"h", m.h}};
  };
  ordered_json j;
  j["mode"] = mode == EvalMode::zsl ? "zsl" : "gzsl";
  j["final"] = metrics(final);
  if (include_per_step) {
    ordered_json steps = ordered_json::array();
    for (const auto& m : per_step) steps.push_back(metrics(m));
    j["per_step"] = steps;
  }
  j["best_step"] = best_step;
  j["best_value"] = best_value;
  j["mean_steps"] = mean_steps;
  ordered_json pc = ordered_json::object();
  for (const auto& [id, acc] : per_class) pc[std::to_string(id)] = acc;
  j["per_class"] = pc;
  return j.dump(2);
}

namespace {

ordered_json top3(std::span<const float> a, const data::ClassBank& bank, const data::Dataset& ds) {
  std::vector<std::pair<double, std::size_t>> scored;
  for (std::size_t c = 0; c < bank.size(); ++c) scored.emplace_back(nn::kernels::dot(a, bank.row(c)), c);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  ordered_json out = ordered_json::array();
  for (std::size_t i = 0; i < std::min<std::size_t>(3, scored.size()); ++i) {
    out.push_back({{"class", ds.attributes().class_ids[bank.classes[scored[i].second]]}, {"score", scored[i].first}});
  }
  return out;
}

}  // namespace

std::string trace_line(const RunConfig& config, const PreparedData& data, std::size_t instance, EvalMode mode,
                       const review::ReviewTrajectory& trajectory) {
  (void)config;
  const auto& ds = data.dataset;
  const auto& bank = eval_bank(data, mode);
  const std::size_t m = ds.m();
  ordered_json j;
  j["instance"] = instance;
  j["label"] = ds.attributes().class_ids[ds.label(instance)];
  j["preview_top3"] = top3(trajectory.a0, bank, ds);
  ordered_json steps = ordered_json::array();
  for (const auto& s : trajectory.steps) {
    std::span<const float> row(trajectory.groups.data() + s.group * m, m);
    ordered_json criteria = ordered_json::array();
    for (std::size_t c : grouping::representative_set(row)) criteria.push_back({{"index", c}, {"weight", row[c]}});
    steps.push_back({{"group", s.group},
                     {"criteria", criteria},
                     {"top3", top3(s.revised, bank, ds)},
                     {"eta", s.eta},
                     {"halted", s.halted}});
  }
  j["steps"] = steps;
  return j.dump();
}

void export_trace(const RunConfig& config, const PreparedData& data, const RsrModel& model,
                  const std::vector<std::size_t>& instances, EvalMode mode, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write trace " + path.string());
  const preview::PreviewCache cache(model.preview, data.dataset);
  nn::Rng rng(config.seed * 1000003ULL + 17);
  std::unique_ptr<review::Selector> selector;
  if (config.selection == Selection::reinforced) {
    selector = std::make_unique<policy::PolicySelector>(model.policy, nullptr, false);
  } else {
    selector = std::make_unique<review::RandomSelector>(rng);
  }
  for (std::size_t i : instances) {
    if (i >= data.dataset.size()) throw ContractError("trace instance out of range");
    const auto traj = infer(config, data, model, cache, i, mode, *selector);
    out << trace_line(config, data, i, mode, traj) << '\n';
  }
  if (!out) throw DataError("failed writing trace " + path.string());
}

}  // namespace rsr::pipeline
