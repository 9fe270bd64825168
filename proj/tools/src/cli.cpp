// SPDX-License-Identifier: Apache-2.0
#include "rsr/cli/cli.hpp"

#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "rsr/data/io.hpp"
#include "rsr/data/synth.hpp"
#include "rsr/errors.hpp"
#include "rsr/pipeline/evaluate.hpp"
#include "rsr/pipeline/gradient_suite.hpp"
#include "rsr/pipeline/log.hpp"
#include "rsr/pipeline/train.hpp"

namespace rsr::cli {

namespace {

using pipeline::RunConfig;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string checkpoint = "model.rsrc";
  std::string stage = "all";
  std::string mode = "zsl";
  bool per_step = false;
  bool no_early_stop = false;
  std::string selector = "configured";
  std::string manual_groups;
  std::string shot_mode = "union";
  std::string out;
  std::size_t limit = 0;
  std::size_t points = 10;
};

RunConfig config_from(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : RunConfig::load(o.config);
  if (o.seed) {
    c.seed = *o.seed;
    c.synth.seed = *o.seed;
  }
  c.validate();
  return c;
}

pipeline::LoadedRun checkpoint_from(const Options& o) {
  auto run = pipeline::load_run(o.checkpoint);
  if (o.seed && *o.seed != run.config.seed) {
    throw UsageError("--seed " + std::to_string(*o.seed) + " differs from the checkpoint's seed " +
                     std::to_string(run.config.seed));
  }
  return run;
}

pipeline::EvalMode mode_from(const std::string& s) {
  return s == "gzsl" ? pipeline::EvalMode::gzsl : pipeline::EvalMode::zsl;
}

int cmd_train(const Options& o, std::ostream& out) {
  const RunConfig c = config_from(o);
  const auto stage = o.stage == "1" ? pipeline::Stage::one : o.stage == "2" ? pipeline::Stage::two : pipeline::Stage::all;
  pipeline::train_to_checkpoint(c, stage, o.checkpoint);
  out << o.checkpoint << '\n';
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto run = checkpoint_from(o);
  pipeline::EvalOptions e;
  e.mode = mode_from(o.mode);
  if (o.selector == "policy") e.selector = pipeline::EvalSelector::policy;
  if (o.selector == "random") e.selector = pipeline::EvalSelector::random;
  if (o.no_early_stop) e.early_stop = false;
  const auto report = pipeline::evaluate(run.config, run.data, run.model, e);
  out << report.to_json(o.per_step) << '\n';
  return kOk;
}

int cmd_analyze(const Options& o, std::ostream& out) {
  const auto run = checkpoint_from(o);
  const auto manual = data::load_manual_groups(o.manual_groups, run.data.dataset.m());
  const auto shot = o.shot_mode == "per-group" ? grouping::ShotMode::per_group : grouping::ShotMode::union_of_groups;
  out << pipeline::analyze(run.config, run.data, run.model, manual, shot).to_json() << '\n';
  return kOk;
}

int cmd_trace(const Options& o, std::ostream& out) {
  const auto run = checkpoint_from(o);
  const auto mode = mode_from(o.mode);
  std::vector<std::size_t> scratch;
  std::vector<std::size_t> instances = pipeline::eval_instances(run.data, mode, scratch);
  if (o.limit > 0 && instances.size() > o.limit) instances.resize(o.limit);
  pipeline::export_trace(run.config, run.data, run.model, instances, mode, o.out);
  out << o.out << '\n';
  return kOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  const RunConfig c = config_from(o);
  if (!c.data_dir.empty()) throw UsageError("synth generates data; the config must not set data_dir");
  const auto s = data::synth_dataset(c.synth);
  std::filesystem::create_directories(o.out);
  const auto paths = data::DatasetPaths::in_directory(o.out);
  data::save_dataset(paths, s.dataset);
  data::save_manual_groups(paths.manual_groups, s.manual_groups());
  out << o.out << '\n';
  return kOk;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
  const auto checks = pipeline::run_gradient_suite(o.seed.value_or(272), o.points);
  for (const auto& c : checks) {
    out << "op=" << c.op << " points=" << c.points << " max_rel_err=" << c.max_relative_error
        << (c.max_relative_error < 1e-4 ? " ok" : " FAIL") << '\n';
  }
  return pipeline::gradient_suite_passes(checks) ? kOk : kNumericError;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spiral preview-review zero-shot classifier (RSR / A-RSR)", "rsr"};
  app.require_subcommand(0, 1);
  Options o;
  app.add_option("--seed", o.seed, "Seed for every random stream (overrides the config)");

  auto* train = app.add_subcommand("train", "Train stage 1, stage 2, or both and write a checkpoint");
  train->add_option("--config", o.config, "Run config JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--stage", o.stage, "Stage to run")->check(CLI::IsMember({"1", "2", "all"}))->capture_default_str();
  train->add_option("--checkpoint", o.checkpoint, "Checkpoint path (read by stage 2, written by every stage)")
      ->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint and print an EvalReport as JSON");
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint path")->required();
  eval->add_option("--mode", o.mode, "Protocol")->check(CLI::IsMember({"zsl", "gzsl"}))->capture_default_str();
  eval->add_flag("--per-step", o.per_step, "Include the per-step accuracy curve");
  eval->add_flag("--no-early-stop", o.no_early_stop, "Review all k groups regardless of eta");
  eval->add_option("--selector", o.selector, "Group selector")
      ->check(CLI::IsMember({"configured", "policy", "random"}))
      ->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "Group analysis of a checkpoint against manual groups");
  analyze->add_option("--checkpoint", o.checkpoint, "Checkpoint path")->required();
  analyze->add_option("--manual-groups", o.manual_groups, "Manual groups JSON")->required()->check(CLI::ExistingFile);
  analyze->add_option("--shot-mode", o.shot_mode, "Top-10 shot accounting")
      ->check(CLI::IsMember({"union", "per-group"}))
      ->capture_default_str();

  auto* trace = app.add_subcommand("trace", "Write a JSON-lines decision trace for test instances");
  trace->add_option("--checkpoint", o.checkpoint, "Checkpoint path")->required();
  trace->add_option("--out", o.out, "Output JSONL path")->required();
  trace->add_option("--mode", o.mode, "Protocol")->check(CLI::IsMember({"zsl", "gzsl"}))->capture_default_str();
  trace->add_option("--limit", o.limit, "Trace at most this many instances (0 = all)")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Generate the planted-group synthetic dataset");
  synth->add_option("--config", o.config, "Run config JSON (synth_* keys)")->check(CLI::ExistingFile);
  synth->add_option("--out", o.out, "Output directory")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference checks of every differentiable op");
  gradcheck->add_option("--points", o.points, "Random points per op")->check(CLI::PositiveNumber)->capture_default_str();

  if (argc <= 1) {
    err << app.help();
    return kUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto selected = app.get_subcommands();
    out << (selected.empty() ? app.help("", CLI::AppFormatMode::All) : selected.front()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return kUsage;
  }

  try {
    if (*train) return cmd_train(o, out);
    if (*eval) return cmd_eval(o, out);
    if (*analyze) return cmd_analyze(o, out);
    if (*trace) return cmd_trace(o, out);
    if (*synth) return cmd_synth(o, out);
    if (*gradcheck) return cmd_gradcheck(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace rsr::cli
