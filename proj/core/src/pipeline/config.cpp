// SPDX-License-Identifier: Apache-2.0
#include "rsr/pipeline/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "rsr/errors.hpp"

namespace rsr::pipeline {

using nlohmann::json;

namespace {

template <class E>
struct EnumNames {
  std::vector<std::pair<E, const char*>> names;

  const char* to_string(E v) const {
    for (const auto& [e, n] : names) {
      if (e == v) return n;
    }
    return "?";
  }
  E parse(const std::string& key, const std::string& s) const {
    for (const auto& [e, n] : names) {
      if (s == n) return e;
    }
    std::string allowed;
    for (const auto& [e, n] : names) allowed += std::string(allowed.empty() ? "" : "|") + n;
    throw ConfigError(key, "expected one of " + allowed + ", got '" + s + "'");
  }
};

const EnumNames<Mode> kMode{{{Mode::rsr, "rsr"}, {Mode::arsr, "arsr"}}};
const EnumNames<Selection> kSelection{{{Selection::reinforced, "reinforced"}, {Selection::random, "random"}}};
const EnumNames<GroupingMode> kGrouping{{{GroupingMode::learned, "learned"}, {GroupingMode::oracle, "oracle"}}};
const EnumNames<data::ProbabilityForm> kProbability{
    {{data::ProbabilityForm::cosine, "cosine"}, {data::ProbabilityForm::dot, "dot"}}};
const EnumNames<review::JntForm> kJnt{{{review::JntForm::product, "product"}, {review::JntForm::cosine, "cosine"}}};
const EnumNames<policy::RewardForm> kReward{
    {{policy::RewardForm::per_step, "per_step"}, {policy::RewardForm::episode_mean, "episode_mean"}}};
const EnumNames<RealAttribute> kReal{
    {{RealAttribute::instance, "instance"}, {RealAttribute::uniform_seen, "uniform_seen"}}};
const EnumNames<ArsrInit> kInit{{{ArsrInit::warm, "warm"}, {ArsrInit::cold, "cold"}}};
const EnumNames<CalibrationSign> kSign{
    {{CalibrationSign::penalize_unseen, "penalize_unseen"}, {CalibrationSign::favor_unseen, "favor_unseen"}}};

/// One binding between a JSON key and a config field.
struct Field {
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <class T>
T as(const std::string& key, const json& v);

template <>
bool as<bool>(const std::string& key, const json& v) {
  if (!v.is_boolean()) throw ConfigError(key, "expected a boolean");
  return v.get<bool>();
}
template <>
std::size_t as<std::size_t>(const std::string& key, const json& v) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(key, "expected a non-negative integer");
  return static_cast<std::size_t>(v.get<long long>());
}
template <>
double as<double>(const std::string& key, const json& v) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  return v.get<double>();
}
template <>
float as<float>(const std::string& key, const json& v) {
  return static_cast<float>(as<double>(key, v));
}
template <>
std::string as<std::string>(const std::string& key, const json& v) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  return v.get<std::string>();
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    auto bind = [&t](const std::string& key, auto getter, auto setter) { t[key] = Field{getter, setter}; };
#define RSR_FIELD(key, expr, type)                                                             \
  bind(                                                                                        \
      key, [](const RunConfig& c) { return json(c.expr); },                                    \
      [](RunConfig& c, const json& v) { c.expr = as<type>(key, v); })
#define RSR_ENUM(key, expr, table)                                                             \
  bind(                                                                                        \
      key, [](const RunConfig& c) { return json(table.to_string(c.expr)); },                   \
      [](RunConfig& c, const json& v) { c.expr = table.parse(key, as<std::string>(key, v)); })
    RSR_FIELD("data_dir", data_dir, std::string);
    RSR_FIELD("synth_n_seen_classes", synth.n_seen_classes, std::size_t);
    RSR_FIELD("synth_n_unseen_classes", synth.n_unseen_classes, std::size_t);
    RSR_FIELD("synth_m", synth.m, std::size_t);
    RSR_FIELD("synth_instances_per_class", synth.instances_per_class, std::size_t);
    RSR_FIELD("synth_planted_group_count", synth.planted_group_count, std::size_t);
    RSR_FIELD("synth_feature_dim", synth.feature_dim, std::size_t);
    RSR_FIELD("synth_noise_scale", synth.noise_scale, float);
    RSR_FIELD("synth_attribute_scale", synth.attribute_scale, float);
    RSR_FIELD("seed", seed, std::uint64_t);
    RSR_FIELD("seen_test_fraction", seen_test_fraction, float);
    RSR_FIELD("k", k, std::size_t);
    RSR_FIELD("eta_threshold", eta_threshold, float);
    RSR_FIELD("alpha", alpha, float);
    RSR_FIELD("gamma", gamma, float);
    RSR_FIELD("early_stop", early_stop, bool);
    RSR_ENUM("mode", mode, kMode);
    RSR_ENUM("selection", selection, kSelection);
    RSR_ENUM("grouping", grouping, kGrouping);
    RSR_ENUM("probability", probability, kProbability);
    RSR_ENUM("jnt_form", jnt_form, kJnt);
    RSR_ENUM("reward_form", reward_form, kReward);
    RSR_ENUM("real_attribute", real_attribute, kReal);
    RSR_ENUM("arsr_init", arsr_init, kInit);
    RSR_FIELD("extractor_dim", extractor_dim, std::size_t);
    RSR_FIELD("classifier_hidden", classifier_hidden, std::size_t);
    RSR_FIELD("classifier_bias", classifier_bias, bool);
    RSR_FIELD("keep_rate", keep_rate, float);
    RSR_FIELD("grouping_embed_dim", grouping_embed_dim, std::size_t);
    RSR_FIELD("grouping_hidden", grouping_hidden, std::size_t);
    RSR_FIELD("revision_embed_dim", revision_embed_dim, std::size_t);
    RSR_FIELD("revision_bias", revision_bias, bool);
    RSR_FIELD("policy_state_dim", policy_state_dim, std::size_t);
    RSR_FIELD("policy_pred_hidden", policy_pred_hidden, std::size_t);
    RSR_FIELD("policy_pred_dim", policy_pred_dim, std::size_t);
    RSR_FIELD("policy_head_hidden", policy_head_hidden, std::size_t);
    RSR_FIELD("discriminator_hidden", discriminator_hidden, std::size_t);
    RSR_FIELD("learning_rate", optimizer.learning_rate, float);
    RSR_FIELD("momentum", optimizer.momentum, float);
    RSR_FIELD("weight_decay", optimizer.weight_decay, float);
    RSR_FIELD("policy_learning_rate", policy_learning_rate, float);
    RSR_FIELD("batch_size", batch_size, std::size_t);
    RSR_FIELD("preview_epochs", preview_epochs, std::size_t);
    RSR_FIELD("review_epochs", review_epochs, std::size_t);
    RSR_FIELD("ppo_updates", ppo_updates, std::size_t);
    RSR_FIELD("ppo_epochs", ppo.epochs, std::size_t);
    RSR_FIELD("ppo_buffer_transitions", ppo.buffer_transitions, std::size_t);
    RSR_FIELD("ppo_minibatch_transitions", ppo.minibatch_transitions, std::size_t);
    RSR_FIELD("ppo_value_weight", ppo.value_weight, float);
    RSR_FIELD("ppo_entropy_weight", ppo.entropy_weight, float);
    RSR_FIELD("ppo_normalize_advantages", ppo.normalize_advantages, bool);
    RSR_FIELD("calibration_epsilon", calibration_epsilon, double);
    RSR_ENUM("calibration_sign", calibration_sign, kSign);
#undef RSR_FIELD
#undef RSR_ENUM
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::validate() const {
  if (data_dir.empty()) synth.validate();
  if (!(seen_test_fraction >= 0.0f && seen_test_fraction < 1.0f)) {
    throw ConfigError("seen_test_fraction", "must be in [0, 1)");
  }
  review_config().validate();
  if (!(gamma > 0.0f && gamma < 1.0f)) throw ConfigError("gamma", "must be in (0, 1)");
  if (!(keep_rate > 0.0f && keep_rate <= 1.0f)) throw ConfigError("keep_rate", "must be in (0, 1]");
  if (grouping_embed_dim == 0) throw ConfigError("grouping_embed_dim", "must be >= 1");
  if (grouping_hidden == 0) throw ConfigError("grouping_hidden", "must be >= 1");
  if (revision_embed_dim == 0) throw ConfigError("revision_embed_dim", "must be >= 1");
  if (policy_state_dim == 0) throw ConfigError("policy_state_dim", "must be >= 1");
  if (policy_pred_hidden == 0) throw ConfigError("policy_pred_hidden", "must be >= 1");
  if (policy_pred_dim == 0) throw ConfigError("policy_pred_dim", "must be >= 1");
  if (policy_head_hidden == 0) throw ConfigError("policy_head_hidden", "must be >= 1");
  if (discriminator_hidden == 0) throw ConfigError("discriminator_hidden", "must be >= 1");
  optimizer.validate();
  if (!(policy_learning_rate > 0.0f)) throw ConfigError("policy_learning_rate", "must be > 0");
  if (batch_size == 0) throw ConfigError("batch_size", "must be >= 1");
  auto p = ppo;
  p.gamma = gamma;
  p.validate();
  if (!std::isfinite(calibration_epsilon) || calibration_epsilon < 0.0) {
    throw ConfigError("calibration_epsilon", "must be finite and >= 0");
  }
}

review::ReviewConfig RunConfig::review_config() const {
  review::ReviewConfig r;
  r.k = k;
  r.eta_threshold = eta_threshold;
  r.alpha = alpha;
  r.early_stop = early_stop;
  r.jnt_form = jnt_form;
  r.probability = probability;
  return r;
}

nn::OptimizerConfig RunConfig::policy_optimizer() const {
  nn::OptimizerConfig o = optimizer;
  o.learning_rate = policy_learning_rate;
  return o;
}

std::string RunConfig::to_json() const {
  json j = json::object();
  for (const auto& [key, f] : fields()) j[key] = f.get(*this);
  return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  RunConfig c;
  const auto& table = fields();
  for (const auto& [key, value] : j.items()) {
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, "unknown config key");
    it->second.set(c, value);
  }
  c.ppo.gamma = c.gamma;
  c.synth.seed = c.seed;
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write config " + path.string());
  out << to_json() << "\n";
}

std::filesystem::path config_sidecar(const std::filesystem::path& checkpoint) {
  return std::filesystem::path(checkpoint.string() + ".config.json");
}

}  // namespace rsr::pipeline
