/*
 * Copyright 2026 The gamma-audit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Losses, per-group conditional losses and the loss imbalance between the
// positive classes of the two groups.

#ifndef GAMMA_AUDIT_METRICS_HPP_
#define GAMMA_AUDIT_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "gamma_audit/errors.hpp"
#include "gamma_audit/types.hpp"

namespace gamma_audit {

enum class LossKind { kSquared, kExpectedZeroOne };

inline constexpr std::string_view loss_name(LossKind k) {
  return k == LossKind::kSquared ? "squared" : "zero_one";
}

inline LossKind parse_loss(std::string_view s) {
  if (s == "squared" || s == "sq" || s == "l2") return LossKind::kSquared;
  if (s == "zero_one" || s == "0-1" || s == "01" || s == "zero-one") {
    return LossKind::kExpectedZeroOne;
  }
  throw ValidationError("unknown loss '" + std::string(s) +
                        "' (expected squared or zero_one)");
}

// Per-row loss of a randomized prediction p = Pr[yhat = 1].
inline double pointwise_loss(LossKind k, double p, int y) {
  if (k == LossKind::kSquared) {
    const double r = p - y;
    return r * r;
  }
  return y == 1 ? 1.0 - p : p;
}

// Weighted mean loss over all rows.
inline double loss(LossKind k, const PredictionVector& h,
                   const LabeledDataset& d) {
  check_binding(h, d);
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    acc += d.weight(i) * pointwise_loss(k, h[i], d.label(i));
  }
  return std::clamp(acc / d.total_weight(), 0.0, 1.0);
}

// Mean loss over the positive-label rows of group g.
inline double psi(LossKind k, const PredictionVector& h, const LabeledDataset& d,
                  Group g) {
  check_binding(h, d);
  double acc = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.group(i) != g || d.label(i) != 1) continue;
    acc += d.weight(i) * pointwise_loss(k, h[i], 1);
    mass += d.weight(i);
  }
  if (!(mass > 0.0)) {
    throw MissingPositivesError("group " + std::string(group_name(g)) +
                                " has no positive-label rows");
  }
  return acc / mass;
}

// psi(S) - psi(T) for kTtoS; the negation for kStoT.
inline double directed_loss_imbalance(LossKind k, const PredictionVector& h,
                                      const LabeledDataset& d, Direction dir) {
  const double v = psi(k, h, d, Group::kS) - psi(k, h, d, Group::kT);
  return dir == Direction::kTtoS ? v : -v;
}

// E[h | y=1, T] - E[h | y=1, S] for kTtoS.
inline double imbalance(const PredictionVector& h, const LabeledDataset& d,
                        Direction dir) {
  check_binding(h, d);
  double sum[2] = {0.0, 0.0};
  double mass[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.label(i) != 1) continue;
    const int g = d.group(i) == Group::kS ? 0 : 1;
    sum[g] += d.weight(i) * h[i];
    mass[g] += d.weight(i);
  }
  for (int g = 0; g < 2; ++g) {
    if (!(mass[g] > 0.0)) {
      throw MissingPositivesError(std::string("group ") + (g == 0 ? "S" : "T") +
                                  " has no positive-label rows");
    }
  }
  // Written as (1 - mean_S) - (1 - mean_T) so the result agrees bit-for-bit
  // with the zero-one loss form in the common case.
  const double v = (1.0 - sum[0] / mass[0]) - (1.0 - sum[1] / mass[1]);
  return dir == Direction::kTtoS ? v : -v;
}

struct GroupStats {
  double mu_s = 0.0;    // Pr[g = S]
  double mu_t = 0.0;    // Pr[g = T]
  double beta_s = 0.0;  // Pr[y = 1 | S]
  double beta_t = 0.0;  // Pr[y = 1 | T]
  double eta = 0.0;     // min_g Pr[g, y = 1]
  double mu_min = 0.0;
  double beta_min = 0.0;
};

inline GroupStats group_stats(const LabeledDataset& d) {
  double mass[2] = {0.0, 0.0};
  double pos[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < d.size(); ++i) {
    const int g = d.group(i) == Group::kS ? 0 : 1;
    mass[g] += d.weight(i);
    if (d.label(i) == 1) pos[g] += d.weight(i);
  }
  for (int g = 0; g < 2; ++g) {
    if (!(pos[g] > 0.0)) {
      throw MissingPositivesError(std::string("group ") + (g == 0 ? "S" : "T") +
                                  " has no positive-label rows");
    }
  }
  const double total = d.total_weight();
  GroupStats s;
  s.mu_s = mass[0] / total;
  s.mu_t = 1.0 - s.mu_s;
  s.beta_s = pos[0] / mass[0];
  s.beta_t = pos[1] / mass[1];
  s.eta = std::min(pos[0], pos[1]) / total;
  s.mu_min = std::min(s.mu_s, s.mu_t);
  s.beta_min = std::min(s.beta_s, s.beta_t);
  return s;
}

}  // namespace gamma_audit

#endif  // GAMMA_AUDIT_METRICS_HPP_
