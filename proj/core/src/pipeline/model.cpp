// SPDX-License-Identifier: Apache-2.0
#include "rsr/pipeline/model.hpp"

#include <algorithm>
#include <map>

#include "rsr/data/io.hpp"
#include "rsr/errors.hpp"
#include "rsr/nn/checkpoint.hpp"

namespace rsr::pipeline {

PreparedData prepare_data(const RunConfig& config) {
  PreparedData out;
  if (config.data_dir.empty()) {
    data::SynthConfig sc = config.synth;
    sc.seed = config.seed;
    out.synth = data::synth_dataset(sc);
    out.dataset = out.synth->dataset;
    out.manual_groups = out.synth->manual_groups();
  } else {
    const auto paths = data::DatasetPaths::in_directory(config.data_dir);
    out.dataset = data::load_dataset(paths);
    if (std::filesystem::exists(paths.manual_groups)) {
      out.manual_groups = data::load_manual_groups(paths.manual_groups, out.dataset.m());
    }
  }
  const auto& ds = out.dataset;

  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.label(i)].push_back(i);
  nn::Rng rng(config.seed);
  nn::Rng split_rng = rng.fork();
  for (std::size_t c : ds.seen_classes()) {
    auto& items = by_class[c];
    split_rng.shuffle(items);
    const auto held = static_cast<std::size_t>(config.seen_test_fraction * static_cast<float>(items.size()));
    for (std::size_t j = 0; j < items.size(); ++j) (j < held ? out.seen_test : out.train).push_back(items[j]);
  }
  for (std::size_t c : ds.unseen_classes()) {
    for (std::size_t i : by_class[c]) out.unseen_test.push_back(i);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.seen_test.begin(), out.seen_test.end());
  std::sort(out.unseen_test.begin(), out.unseen_test.end());
  if (out.train.empty()) throw InvariantError("no seen-class training instances");

  out.seen_bank = data::ClassBank::from(ds.attributes(), ds.seen_classes());
  out.unseen_bank = data::ClassBank::from(ds.attributes(), ds.unseen_classes());
  std::vector<std::size_t> all = ds.seen_classes();
  all.insert(all.end(), ds.unseen_classes().begin(), ds.unseen_classes().end());
  out.all_bank = data::ClassBank::from(ds.attributes(), all);
  return out;
}

namespace {

preview::PreviewConfig preview_config(const RunConfig& c, const PreparedData& d) {
  preview::PreviewConfig p;
  p.feature_dim = d.dataset.feature_dim();
  p.m = d.dataset.m();
  p.extractor_dim = c.extractor_dim;
  p.classifier_hidden = c.classifier_hidden;
  p.classifier_bias = c.classifier_bias;
  p.keep_rate = c.keep_rate;
  return p;
}

grouping::GroupingConfig grouping_config(const RunConfig& c, const PreparedData& d) {
  grouping::GroupingConfig g;
  g.embed_input = preview_config(c, d).embed_dim();
  g.m = d.dataset.m();
  g.k = c.k;
  g.embed_dim = c.grouping_embed_dim;
  g.hidden = c.grouping_hidden;
  if (c.grouping == GroupingMode::oracle) {
    if (d.manual_groups.size() != c.k) {
      throw ConfigError("grouping", "oracle grouping needs exactly k manual groups, found " +
                                        std::to_string(d.manual_groups.size()));
    }
    std::vector<std::vector<std::size_t>> blocks;
    for (const auto& [_, idx] : d.manual_groups) blocks.push_back(idx);
    g.oracle_masks = grouping::block_masks(blocks, g.m);
  }
  return g;
}

review::RevisionConfig revision_config(const RunConfig& c, const PreparedData& d) {
  review::RevisionConfig r;
  r.embed_input = preview_config(c, d).embed_dim();
  r.m = d.dataset.m();
  r.embed_dim = c.revision_embed_dim;
  r.bias = c.revision_bias;
  r.keep_rate = c.keep_rate;
  return r;
}

policy::PolicyConfig policy_config(const RunConfig& c, const PreparedData& d) {
  policy::PolicyConfig p;
  p.h_dim = preview_config(c, d).embed_dim();
  p.m = d.dataset.m();
  p.k = c.k;
  p.state_dim = c.policy_state_dim;
  p.pred_hidden = c.policy_pred_hidden;
  p.pred_dim = c.policy_pred_dim;
  p.head_hidden = c.policy_head_hidden;
  return p;
}

}  // namespace

RsrModel::RsrModel(const RunConfig& config, const PreparedData& data)
    : preview(preview_config(config, data)),
      grouping(grouping_config(config, data)),
      revision(revision_config(config, data)),
      policy(policy_config(config, data)),
      discriminator(data.dataset.m(), config.discriminator_hidden) {}

void RsrModel::init(nn::Rng& rng) {
  // Each module draws from its own stream so adding one leaves the others intact.
  nn::Rng r_preview = rng.fork(), r_grouping = rng.fork(), r_revision = rng.fork(), r_policy = rng.fork(),
          r_dis = rng.fork();
  preview.init(r_preview);
  grouping.init(r_grouping);
  revision.init(r_revision);
  policy.init(r_policy);
  discriminator.init(r_dis);
}

nn::ParameterList RsrModel::parameters() {
  nn::ParameterList out;
  preview.collect(out);
  grouping.collect(out);
  revision.collect(out);
  policy.collect(out);
  discriminator.collect(out);
  return out;
}

nn::ParameterList RsrModel::review_parameters() {
  nn::ParameterList out;
  if (!grouping.config().oracle()) grouping.collect(out);
  revision.collect(out);
  return out;
}

void RsrModel::save(const std::filesystem::path& path) { nn::save_checkpoint(path, parameters()); }

void RsrModel::load(const std::filesystem::path& path) {
  auto stored = nn::load_checkpoint(path);
  nn::restore(stored, parameters(), false);
}

LoadedRun load_run(const std::filesystem::path& checkpoint) {
  if (!std::filesystem::exists(checkpoint)) throw DataError("no checkpoint at " + checkpoint.string());
  RunConfig config = RunConfig::load(config_sidecar(checkpoint));
  PreparedData data = prepare_data(config);
  RsrModel model(config, data);
  model.load(checkpoint);
  return {std::move(config), std::move(data), std::move(model)};
}

}  // namespace rsr::pipeline
