// SPDX-License-Identifier: Apache-2.0
#include "rsr/preview/preview.hpp"

#include "rsr/errors.hpp"

namespace rsr::preview {

void PreviewConfig::validate() const {
  if (feature_dim == 0) throw ConfigError("feature_dim", "must be >= 1");
  if (m == 0) throw ConfigError("m", "must be >= 1");
  if (!(keep_rate > 0.0f && keep_rate <= 1.0f)) throw ConfigError("keep_rate", "must be in (0, 1]");
}

PreviewModel::PreviewModel(const PreviewConfig& config) : config_(config) {
  config_.validate();
  if (config_.extractor_dim > 0) {
    extractor_.emplace("preview.extractor", config_.feature_dim, config_.extractor_dim);
  }
  std::size_t in = config_.embed_dim();
  if (config_.classifier_hidden > 0) {
    hidden_.emplace("preview.hidden", in, config_.classifier_hidden, config_.classifier_bias);
    in = config_.classifier_hidden;
  }
  classifier_ = nn::Dense("preview.classifier", in, config_.m, config_.classifier_bias);
}

void PreviewModel::init(nn::Rng& rng) {
  if (extractor_) extractor_->init(rng);
  if (hidden_) hidden_->init(rng);
  classifier_.init(rng);
}

void PreviewModel::collect(nn::ParameterList& out) {
  if (extractor_) extractor_->collect(out);
  if (hidden_) hidden_->collect(out);
  classifier_.collect(out);
}

nn::ParameterList PreviewModel::parameters() {
  nn::ParameterList out;
  collect(out);
  return out;
}

nn::ParameterList PreviewModel::extractor_parameters() {
  nn::ParameterList out;
  if (extractor_) extractor_->collect(out);
  return out;
}

PreviewCache::PreviewCache(const PreviewModel& model, const data::Dataset& dataset) {
  entries_.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    nn::Tape tape(false);
    auto h = model.extract(tape, dataset.instance(i));
    auto a0 = model.predict(h, nullptr, false);
    entries_.push_back({h.value(), a0.value()});
  }
}

}  // namespace rsr::preview
