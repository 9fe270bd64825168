// SPDX-License-Identifier: Apache-2.0
// Brute-force reference implementations shared by the unit tests and the
// acceptance gate. Written against the definitions, not the library code.
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rsr/data/class_bank.hpp"
#include "rsr/data/dataset.hpp"
#include "rsr/grouping/analysis.hpp"

namespace rsr::oracle {

// Forward-summed discounted returns.
inline std::vector<double> discounted_returns(const std::vector<float>& r, double gamma) {
  std::vector<double> out(r.size(), 0.0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    double w = 1.0;
    for (std::size_t i = t; i < r.size(); ++i) {
      out[t] += w * r[i];
      w *= gamma;
    }
  }
  return out;
}

// o / no / ro for one group matrix. `defined` is false when every o row is zero.
struct TendencyChain {
  std::vector<double> o, no, ro;
  bool defined = false;
};

inline TendencyChain tendency_chain(const grouping::GroupMatrix& g, const data::ManualGroups& manual) {
  const std::size_t G = manual.size();
  TendencyChain c;
  c.o.assign(g.k * G, 0.0);
  const std::size_t want = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(g.m)));
  for (std::size_t i = 0; i < g.k; ++i) {
    std::vector<std::pair<float, std::size_t>> nz;
    for (std::size_t j = 0; j < g.m; ++j) {
      if (g.weights[i * g.m + j] > 0.0f) nz.emplace_back(-g.weights[i * g.m + j], j);
    }
    std::sort(nz.begin(), nz.end());
    if (nz.size() > want) nz.resize(want);
    std::size_t annotated = 0;
    for (auto [_, j] : nz) {
      for (std::size_t s = 0; s < G; ++s) {
        const auto& members = manual[s].second;
        if (std::find(members.begin(), members.end(), j) != members.end()) {
          c.o[i * G + s] += 1.0;
          ++annotated;
        }
      }
    }
    for (std::size_t s = 0; s < G && annotated > 0; ++s) c.o[i * G + s] /= static_cast<double>(annotated);
  }
  double denom = 0.0;
  for (std::size_t i = 0; i < g.k; ++i) {
    double sq = 0.0;
    for (std::size_t s = 0; s < G; ++s) sq += c.o[i * G + s] * c.o[i * G + s];
    denom = std::max(denom, std::sqrt(sq));
  }
  if (denom == 0.0) return c;
  c.defined = true;
  for (double v : c.o) c.no.push_back(v / denom);
  c.ro.resize(c.no.size());
  for (std::size_t i = 0; i < g.k; ++i) {
    double z = 0.0;
    for (std::size_t s = 0; s < G; ++s) z += std::exp(c.no[i * G + s]);
    for (std::size_t s = 0; s < G; ++s) c.ro[i * G + s] = std::exp(c.no[i * G + s]) / z;
  }
  return c;
}

// Bank row with the largest dot product, ties to the lower index.
inline std::size_t argmax_dot(std::span<const float> a, const data::ClassBank& bank) {
  std::size_t best = 0;
  double best_score = -1e300;
  for (std::size_t c = 0; c < bank.size(); ++c) {
    double s = 0.0;
    const auto row = bank.row(c);
    for (std::size_t j = 0; j < a.size(); ++j) s += static_cast<double>(a[j]) * row[j];
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return best;
}

}  // namespace rsr::oracle
