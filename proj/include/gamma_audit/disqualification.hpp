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

// Exact and approximate gamma-disqualification, gamma-fairness against a
// finite set of alternatives, and the minimal-gamma auditor.

#ifndef GAMMA_AUDIT_DISQUALIFICATION_HPP_
#define GAMMA_AUDIT_DISQUALIFICATION_HPP_

#include <cmath>
#include <optional>
#include <vector>

#include "gamma_audit/errors.hpp"
#include "gamma_audit/metrics.hpp"
#include "gamma_audit/parallel.hpp"
#include "gamma_audit/scaling.hpp"
#include "gamma_audit/types.hpp"

namespace gamma_audit {

// A classifier whose T-to-S imbalance is within this distance of zero is
// treated as balanced.
inline constexpr double kBalanceTolerance = 1e-12;

// An imbalance reduction must beat the bar by more than this to count.
// Mixtures built by different routes differ by rounding noise that would
// otherwise decide verdicts at a zero bar.
inline constexpr double kDisqualifyTolerance = 1e-12;

// Tolerance for the generic boundary search.
inline constexpr double kBisectTolerance = 1e-9;

// The two numbers a disqualification test needs about one classifier.
struct ScoreCard {
  double loss_a = 0.0;          // lossA
  double imbalance_ttos = 0.0;  // directed lossB imbalance, T to S
};

inline ScoreCard score_card(const PredictionVector& h, const LabeledDataset& d,
                            LossKind loss_a, LossKind loss_b) {
  return {loss(loss_a, h, d),
          directed_loss_imbalance(loss_b, h, d, Direction::kTtoS)};
}

struct Verdict {
  bool disqualified = false;
  Direction direction_used = Direction::kTtoS;
  double delta_imbalance = 0.0;   // dLossImb(h) - dLossImb(h')
  double delta_loss = 0.0;        // lossA(h') - lossA(h)
  double scaled_threshold = 0.0;  // may be +inf
  double margin = 0.0;            // delta_imbalance - (alpha1 + threshold)
};

// The direction in which h violates balance. Balanced h reports kTtoS.
inline Direction violation_direction(const ScoreCard& h) {
  return h.imbalance_ttos < -kBalanceTolerance ? Direction::kStoT
                                               : Direction::kTtoS;
}

// Imbalance reduction achieved by h' in h's violation direction. A balanced
// h violates in both directions at once, so h' must reduce both, which it
// never can by a positive amount. A forced direction overrides all of this.
inline double imbalance_reduction(const ScoreCard& h, const ScoreCard& hp,
                                  std::optional<Direction> forced = {}) {
  const double gap = h.imbalance_ttos - hp.imbalance_ttos;
  if (forced) return *forced == Direction::kTtoS ? gap : -gap;
  if (std::abs(h.imbalance_ttos) <= kBalanceTolerance) return -std::abs(gap);
  return violation_direction(h) == Direction::kTtoS ? gap : -gap;
}

// Does h' (alpha1, alpha2, gamma)-disqualify h?
inline Verdict judge(const ScoreCard& h, const ScoreCard& hp,
                     const ScalingFunction& f, Gamma gamma, double alpha1 = 0.0,
                     double alpha2 = 0.0, std::optional<Direction> forced = {}) {
  Verdict v;
  v.direction_used = forced ? *forced : violation_direction(h);
  v.delta_imbalance = imbalance_reduction(h, hp, forced);
  v.delta_loss = hp.loss_a - h.loss_a;
  v.scaled_threshold = f(gamma, std::max(0.0, v.delta_loss + alpha2));
  const double bar = alpha1 + v.scaled_threshold;
  v.disqualified = v.delta_imbalance > bar + kDisqualifyTolerance;
  v.margin = v.delta_imbalance - bar;
  return v;
}

inline Verdict approx_disqualifies(const PredictionVector& h_prime,
                                   const PredictionVector& h,
                                   const LabeledDataset& d, LossKind loss_a,
                                   LossKind loss_b, const ScalingFunction& f,
                                   const FairnessParams& params) {
  if (!(params.alpha1 >= 0.0) || !(params.alpha2 >= 0.0)) {
    throw ValidationError("alpha1 and alpha2 must be non-negative");
  }
  d.require_positives();
  return judge(score_card(h, d, loss_a, loss_b),
               score_card(h_prime, d, loss_a, loss_b), f, params.gamma,
               params.alpha1, params.alpha2);
}

inline Verdict disqualifies(const PredictionVector& h_prime,
                            const PredictionVector& h, const LabeledDataset& d,
                            LossKind loss_a, LossKind loss_b,
                            const ScalingFunction& f, Gamma gamma) {
  FairnessParams p;
  p.gamma = gamma;
  return approx_disqualifies(h_prime, h, d, loss_a, loss_b, f, p);
}

struct FairnessCheck {
  bool fair = true;
  std::optional<std::size_t> witness;  // first disqualifying member
  std::optional<Verdict> verdict;      // its verdict
};

inline FairnessCheck is_gamma_fair_cards(const ScoreCard& h,
                                         const std::vector<ScoreCard>& family,
                                         const ScalingFunction& f,
                                         const FairnessParams& params) {
  for (std::size_t j = 0; j < family.size(); ++j) {
    Verdict v = judge(h, family[j], f, params.gamma, params.alpha1,
                      params.alpha2);
    if (v.disqualified) return {false, j, v};
  }
  return {};
}

inline FairnessCheck is_gamma_fair(const PredictionVector& h,
                                   const ClassifierFamily& family,
                                   const LabeledDataset& d, LossKind loss_a,
                                   LossKind loss_b, const ScalingFunction& f,
                                   const FairnessParams& params) {
  family.check_bound(d);
  d.require_positives();
  std::vector<ScoreCard> cards;
  cards.reserve(family.size());
  for (std::size_t j = 0; j < family.size(); ++j) {
    cards.push_back(score_card(family[j], d, loss_a, loss_b));
  }
  return is_gamma_fair_cards(score_card(h, d, loss_a, loss_b), cards, f,
                             params);
}

// Supremum of the gammas at which h' disqualifies h, found by bracketing and
// bisection. Requires f non-decreasing in gamma.
inline Gamma boundary_gamma_bisect(const ScoreCard& h, const ScoreCard& hp,
                                   const ScalingFunction& f, double alpha1 = 0.0,
                                   double alpha2 = 0.0,
                                   std::optional<Direction> forced = {}) {
  auto dq = [&](Gamma g) {
    return judge(h, hp, f, g, alpha1, alpha2, forced).disqualified;
  };
  if (!dq(0.0)) return 0.0;
  if (dq(Gamma::infinite())) return Gamma::infinite();
  double lo = 0.0;
  double hi = 1.0;
  while (dq(hi)) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return Gamma::infinite();
  }
  while (hi - lo > kBisectTolerance * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    (dq(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Supremum of the gammas at which h' disqualifies h; closed form for the
// square-root scaling.
inline Gamma boundary_gamma(const ScoreCard& h, const ScoreCard& hp,
                            const ScalingFunction& f, double alpha1 = 0.0,
                            double alpha2 = 0.0,
                            std::optional<Direction> forced = {}) {
  if (f.is_separable()) {
    return boundary_gamma_bisect(h, hp, f, alpha1, alpha2, forced);
  }
  const double gap = imbalance_reduction(h, hp, forced) - alpha1;
  if (!(gap > 0.0)) return 0.0;
  const double a = std::max(0.0, hp.loss_a - h.loss_a + alpha2);
  if (a == 0.0) return Gamma::infinite();
  if (f.is_exact()) return 0.0;
  return f.eta() * gap * gap / (2.0 * a);
}

struct AuditReport {
  ScoreCard model;
  Direction direction = Direction::kTtoS;
  std::vector<ScoreCard> alternatives;
  std::vector<Gamma> thresholds;     // per alternative
  Gamma gamma_hat = 0.0;             // max of thresholds
  std::optional<std::size_t> worst;  // argmax, absent when gamma_hat is 0
  bool never_disqualified = true;    // gamma_hat == 0
  std::optional<GroupStats> stats;
};

inline AuditReport minimal_gamma_from_cards(const ScoreCard& h,
                                            std::vector<ScoreCard> alternatives,
                                            const ScalingFunction& f,
                                            double alpha1 = 0.0,
                                            double alpha2 = 0.0,
                                            std::optional<Direction> forced = {}) {
  if (f.is_separable()) {
    const auto legal =
        validate_legal(f.separable(), default_legality_grid());
    if (!legal.legal) {
      throw ValidationError("scaling function is not legal: " + legal.violation);
    }
  }
  AuditReport r;
  r.model = h;
  r.direction = forced ? *forced : violation_direction(h);
  r.thresholds.resize(alternatives.size());
  parallel_for(alternatives.size(), [&](std::size_t j) {
    r.thresholds[j] = boundary_gamma(h, alternatives[j], f, alpha1, alpha2, forced);
  });
  for (std::size_t j = 0; j < r.thresholds.size(); ++j) {
    if (r.thresholds[j] > r.gamma_hat) {
      r.gamma_hat = r.thresholds[j];
      r.worst = j;
    }
  }
  r.never_disqualified = r.gamma_hat.value() == 0.0;
  r.alternatives = std::move(alternatives);
  return r;
}

inline AuditReport minimal_gamma(const PredictionVector& h,
                                 const ClassifierFamily& family,
                                 const LabeledDataset& d, LossKind loss_a,
                                 LossKind loss_b, const ScalingFunction& f,
                                 double alpha1 = 0.0, double alpha2 = 0.0,
                                 std::optional<Direction> forced = {}) {
  family.check_bound(d);
  d.require_positives();
  std::vector<ScoreCard> cards(family.size());
  parallel_for(family.size(), [&](std::size_t j) {
    cards[j] = score_card(family[j], d, loss_a, loss_b);
  });
  AuditReport r = minimal_gamma_from_cards(score_card(h, d, loss_a, loss_b),
                                           std::move(cards), f, alpha1, alpha2,
                                           forced);
  r.stats = group_stats(d);
  return r;
}

}  // namespace gamma_audit

#endif  // GAMMA_AUDIT_DISQUALIFICATION_HPP_
