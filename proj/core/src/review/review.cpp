// SPDX-License-Identifier: Apache-2.0
#include "rsr/review/review.hpp"

#include <algorithm>
#include <cmath>

#include "rsr/errors.hpp"

namespace rsr::review {

void ReviewConfig::validate() const {
  if (k == 0) throw ConfigError("k", "must be >= 1");
  if (!(eta_threshold >= 0.0f && eta_threshold <= 1.0f)) throw ConfigError("eta_threshold", "must be in [0, 1]");
  if (!(alpha > 0.0f && alpha < 1.0f)) throw ConfigError("alpha", "must be in (0, 1)");
}

void RevisionConfig::validate() const {
  if (embed_input == 0) throw ConfigError("feature_dim", "must be >= 1");
  if (m == 0) throw ConfigError("m", "must be >= 1");
  if (embed_dim == 0) throw ConfigError("revision_embed_dim", "must be >= 1");
  if (!(keep_rate > 0.0f && keep_rate <= 1.0f)) throw ConfigError("keep_rate", "must be in (0, 1]");
}

RevisionModule::RevisionModule(const RevisionConfig& config)
    : config_(config),
      embed_("revision.embed", config.embed_input, config.embed_dim),
      out_("revision.out", config.m + config.embed_dim, config.m, config.bias) {
  config_.validate();
}

void RevisionModule::init(nn::Rng& rng) {
  embed_.init(rng);
  out_.init(rng);
}

void RevisionModule::collect(nn::ParameterList& out) {
  embed_.collect(out);
  out_.collect(out);
}

nn::ParameterList RevisionModule::parameters() {
  nn::ParameterList out;
  collect(out);
  return out;
}

namespace {

double norm_d(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double cos_d(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
  return d / (norm_d(a) * norm_d(b));
}

std::vector<double> widen(std::span<const float> v) { return {v.begin(), v.end()}; }

}  // namespace

std::vector<float> revise(std::span<const float> at, std::span<const float> ar, std::size_t t) {
  if (at.size() != ar.size()) throw DimensionError("revise: length mismatch");
  const auto a = widen(at), r = widen(ar);
  const double na = norm_d(a), nr = norm_d(r);
  if (na == 0.0 || nr == 0.0) throw DegenerateError("revise: zero-norm input");
  const double beta = 1.0 / static_cast<double>(t + 1);
  std::vector<float> out(at.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(a[i] / na + beta * r[i] / nr);
  return out;
}

double verify_revision_identity(std::span<const float> at, std::span<const float> ar, std::size_t t,
                                std::span<const float> phi_unit) {
  const auto a = widen(at), r = widen(ar), phi = widen(phi_unit);
  const double na = norm_d(a), nr = norm_d(r);
  if (na == 0.0 || nr == 0.0) throw DegenerateError("revision identity: zero-norm input");
  const double beta = 1.0 / static_cast<double>(t + 1);
  std::vector<double> next(a.size());
  for (std::size_t i = 0; i < next.size(); ++i) next[i] = a[i] / na + beta * r[i] / nr;
  const double lhs = cos_d(next, phi);
  const double rhs = (cos_d(a, phi) + beta * cos_d(r, phi)) / norm_d(next);
  return std::abs(lhs - rhs);
}

std::vector<float> union_probability(const std::vector<float>& p_a0, const std::vector<std::vector<float>>& p_revisions) {
  std::vector<float> u = p_a0;
  for (std::size_t t = 0; t < p_revisions.size(); ++t) {
    if (p_revisions[t].size() != u.size()) throw DimensionError("union probability: class count mismatch");
    const float w = 1.0f / static_cast<float>(t + 2);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += w * p_revisions[t][i];
  }
  return u;
}

float confidence(const std::vector<float>& p_a0, const std::vector<std::vector<float>>& p_revisions) {
  const auto u = union_probability(p_a0, p_revisions);
  if (u.empty()) throw DimensionError("confidence over an empty class set");
  return *std::max_element(u.begin(), u.end());
}

}  // namespace rsr::review
