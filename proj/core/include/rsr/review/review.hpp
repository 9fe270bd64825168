// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "rsr/data/class_bank.hpp"
#include "rsr/nn/layers.hpp"

namespace rsr::review {

enum class JntForm { product, cosine };

struct ReviewConfig {
  std::size_t k = 5;
  float eta_threshold = 0.4f;
  float alpha = 0.9f;
  bool early_stop = true;
  JntForm jnt_form = JntForm::product;
  data::ProbabilityForm probability = data::ProbabilityForm::cosine;

  void validate() const;
};

struct RevisionConfig {
  std::size_t embed_input = 0;
  std::size_t m = 0;
  std::size_t embed_dim = 32;
  bool bias = true;
  float keep_rate = 0.5f;

  void validate() const;
};

/// f_v: a_r = FCN(m)(g*a0 ++ embed(h_ex)) -> dropout, masked by g.
/// Parameters are named "revision.*".
class RevisionModule {
 public:
  RevisionModule() = default;
  explicit RevisionModule(const RevisionConfig& config);

  void init(nn::Rng& rng);
  const RevisionConfig& config() const noexcept { return config_; }

  template <class T>
  nn::BasicVar<T> operator()(nn::BasicVar<T> a0, nn::BasicVar<T> h, nn::BasicVar<T> g_row, nn::Rng* rng,
                             bool training) const {
    if (a0.size() != config_.m || g_row.size() != config_.m) throw DimensionError("revisit: length mismatch");
    auto e = nn::relu(embed_(h));
    auto x = out_(nn::concat(std::vector<nn::BasicVar<T>>{nn::mul(g_row, a0), e}));
    x = nn::dropout(x, config_.keep_rate, rng, training);
    return nn::mul(x, g_row);
  }

  void collect(nn::ParameterList& out);
  nn::ParameterList parameters();

 private:
  RevisionConfig config_;
  nn::Dense embed_;
  nn::Dense out_;
};

/// a^{t+1} = a^t/|a^t| + a_r/|a_r| / (t+1). A zero revision contributes nothing.
template <class T>
nn::BasicVar<T> revise(nn::BasicVar<T> at, nn::BasicVar<T> ar, std::size_t t) {
  const T beta = T(1) / static_cast<T>(t + 1);
  return nn::add(nn::normalize(at), nn::scale(nn::normalize(ar), beta));
}

/// Gradient-free revise; zero-norm input is a DegenerateError.
std::vector<float> revise(std::span<const float> at, std::span<const float> ar, std::size_t t);

/// |cos(a^{t+1}, phi) - [cos(a^t, phi) + beta cos(a_r, phi)] / |a^{t+1}||
/// evaluated in double precision.
double verify_revision_identity(std::span<const float> at, std::span<const float> ar, std::size_t t,
                                std::span<const float> phi_unit);

template <class T>
nn::BasicVar<T> loss_loc(nn::BasicVar<T> ar, std::size_t target, nn::BasicVar<T> bank_matrix) {
  return nn::cross_entropy(nn::dense(ar, bank_matrix), target);
}

template <class T>
nn::BasicVar<T> loss_oa(nn::BasicVar<T> revised, std::size_t target, nn::BasicVar<T> bank_matrix) {
  return nn::cross_entropy(nn::dense(revised, bank_matrix), target);
}

/// -log( sum_i exp(a0_i phi_i) exp(at_i phi_i) / (Z(a0) Z(at)) ), with Z the
/// partition sums over the bank. The cosine form divides each per-criterion
/// product by |a| |phi|.
template <class T>
nn::BasicVar<T> loss_jnt(nn::BasicVar<T> a0, nn::BasicVar<T> at, nn::BasicVar<T> phi_y, nn::BasicVar<T> bank_matrix,
                         JntForm form = JntForm::product) {
  auto p0 = nn::mul(a0, phi_y);
  auto pt = nn::mul(at, phi_y);
  if (form == JntForm::cosine) {
    auto nphi = nn::reciprocal(nn::norm(phi_y));
    p0 = nn::scale_by(nn::scale_by(p0, nn::reciprocal(nn::norm(a0))), nphi);
    pt = nn::scale_by(nn::scale_by(pt, nn::reciprocal(nn::norm(at))), nphi);
  }
  auto numerator = nn::logsumexp(nn::add(p0, pt));
  auto z0 = nn::logsumexp(nn::dense(a0, bank_matrix));
  auto zt = nn::logsumexp(nn::dense(at, bank_matrix));
  return nn::sub(nn::add(z0, zt), numerator);
}

template <class T>
struct StepLosses {
  nn::BasicVar<T> loc;
  nn::BasicVar<T> oa;
  nn::BasicVar<T> jnt;
};

/// sum_t alpha^{t-1} [L_LOC + L_OA + L_JNT], t from 1.
template <class T>
nn::BasicVar<T> loss_rev(const std::vector<StepLosses<T>>& steps, float alpha) {
  if (steps.empty()) throw ContractError("review loss of an empty trajectory");
  std::vector<nn::BasicVar<T>> terms;
  T w = T(1);
  for (const auto& s : steps) {
    terms.push_back(nn::scale(nn::add_n(std::vector<nn::BasicVar<T>>{s.loc, s.oa, s.jnt}), w));
    w *= static_cast<T>(alpha);
  }
  return nn::add_n(terms);
}

/// p(UNI) = p(a0) + sum_t p(a_r^t) / (1 + t), t from 1.
std::vector<float> union_probability(const std::vector<float>& p_a0, const std::vector<std::vector<float>>& p_revisions);

/// eta = max_i p(UNI)_i.
float confidence(const std::vector<float>& p_a0, const std::vector<std::vector<float>>& p_revisions);

}  // namespace rsr::review
