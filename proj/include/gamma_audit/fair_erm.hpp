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

// Approximate fair empirical risk minimization over mixtures, a brute-force
// grid oracle for the same program, and the constructive existence witness.

#ifndef GAMMA_AUDIT_FAIR_ERM_HPP_
#define GAMMA_AUDIT_FAIR_ERM_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "gamma_audit/disqualification.hpp"
#include "gamma_audit/errors.hpp"
#include "gamma_audit/metrics.hpp"
#include "gamma_audit/pareto.hpp"
#include "gamma_audit/scaling.hpp"
#include "gamma_audit/types.hpp"

namespace gamma_audit {

struct FairErmResult {
  bool bottom = true;  // no candidate survived
  std::optional<Mixture> chosen;
  double chosen_loss = 0.0;
  double chosen_imbalance = 0.0;  // T-to-S
  std::optional<std::size_t> chosen_index;
  // Verdicts of every challenger against the chosen mixture at
  // (alpha1, alpha2, gamma).
  std::vector<Verdict> certificate;
  bool certified = false;
  std::size_t candidates = 0;
  std::size_t oracle_queries = 0;  // constrained minimizations
  std::size_t checks = 0;          // disqualification tests
};

namespace internal {

struct Candidate {
  Mixture mixture;
  ScoreCard card;
};

// Lowest loss, then smallest |imbalance|, then index.
inline bool better(const ScoreCard& a, std::size_t ia, const ScoreCard& b,
                   std::size_t ib) {
  return std::make_tuple(a.loss_a, std::abs(a.imbalance_ttos), ia) <
         std::make_tuple(b.loss_a, std::abs(b.imbalance_ttos), ib);
}

inline std::vector<Verdict> certify(const ScoreCard& chosen,
                                    const std::vector<ScoreCard>& challengers,
                                    const ScalingFunction& f,
                                    const FairnessParams& params, bool* fair) {
  std::vector<Verdict> out;
  out.reserve(challengers.size());
  *fair = true;
  for (const ScoreCard& c : challengers) {
    out.push_back(judge(chosen, c, f, params.gamma, params.alpha1, params.alpha2));
    if (out.back().disqualified) *fair = false;
  }
  return out;
}

inline void require_zero_one_loss_b(LossKind loss_b) {
  if (loss_b != LossKind::kExpectedZeroOne) {
    throw ValidationError(
        "fair ERM requires loss-b = zero_one (imbalance must be linear in the "
        "mixture weights)");
  }
}

}  // namespace internal

// The most accurate entry of the pooled T-to-S and S-to-T frontiers that no
// pooled entry (alpha1 - epsilon, alpha2, gamma)-disqualifies.
inline FairErmResult approx_fair_erm(const FamilyPtr& family,
                                     const LabeledDataset& d, LossKind loss_a,
                                     LossKind loss_b, const ScalingFunction& f,
                                     const FairnessParams& params) {
  params.validate_for_fair_erm();
  internal::require_zero_one_loss_b(loss_b);
  family->check_bound(d);
  d.require_positives();

  FairErmResult res;
  std::vector<internal::Candidate> pool;
  for (Direction dir : {Direction::kTtoS, Direction::kStoT}) {
    ParetoFrontier pf = approx_pareto_frontier(family, params.epsilon, d, loss_a, dir);
    res.oracle_queries += pf.solves;
    for (auto& e : pf.entries) {
      if (!e.feasible) continue;
      const PredictionVector pred = mixture_predictions(*e.mixture, d);
      pool.push_back({std::move(*e.mixture), score_card(pred, d, loss_a, loss_b)});
    }
  }
  // Anchors: per direction, the best mixture at imbalance 0 or, when the
  // family cannot reach 0, at its least attainable imbalance. One of them is
  // always fair, so the grid missing the balanced point never yields bottom.
  for (Direction dir : {Direction::kTtoS, Direction::kStoT}) {
    const double floor = member_imbalances(*family, d, dir).minCoeff();
    auto m = loss_at_imbalance(family, std::max(0.0, floor), d, loss_a, dir);
    ++res.oracle_queries;
    const PredictionVector pred = mixture_predictions(*m, d);
    pool.push_back({std::move(*m), score_card(pred, d, loss_a, loss_b)});
  }
  if (pool.empty()) throw ValidationError("empty frontier");
  res.candidates = pool.size();

  std::vector<ScoreCard> cards;
  cards.reserve(pool.size());
  for (const auto& c : pool) cards.push_back(c.card);

  const double inner_alpha1 = params.alpha1 - params.epsilon;
  std::vector<char> fair(pool.size(), 0);
  parallel_for(pool.size(), [&](std::size_t i) {
    for (const ScoreCard& ch : cards) {
      if (judge(cards[i], ch, f, params.gamma, inner_alpha1, params.alpha2)
              .disqualified) {
        return;
      }
    }
    fair[i] = 1;
  });
  res.checks = pool.size() * pool.size();

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (fair[i] && (!best || internal::better(cards[i], i, cards[*best], *best))) {
      best = i;
    }
  }
  if (!best) return res;
  res.bottom = false;
  res.chosen_index = best;
  res.chosen = pool[*best].mixture;
  res.chosen_loss = cards[*best].loss_a;
  res.chosen_imbalance = cards[*best].imbalance_ttos;
  res.certificate =
      internal::certify(cards[*best], cards, f, params, &res.certified);
  return res;
}

// Exact mean-loss and T-to-S imbalance of a mixture from precomputed forms.
class CardModel {
 public:
  CardModel(const ClassifierFamily& family, const LabeledDataset& d,
            LossKind loss_a, LossKind loss_b)
      : loss_(mixture_objective(family, d, loss_a)),
        psi_s_(subset_objective(family, d, loss_b,
                                [&](std::size_t i) {
                                  return d.group(i) == Group::kS && d.label(i) == 1;
                                })),
        psi_t_(subset_objective(family, d, loss_b, [&](std::size_t i) {
          return d.group(i) == Group::kT && d.label(i) == 1;
        })) {}

  ScoreCard operator()(const Eigen::VectorXd& w) const {
    return {std::clamp(evaluate(loss_, w), 0.0, 1.0),
            evaluate(psi_s_, w) - evaluate(psi_t_, w)};
  }

 private:
  MixtureObjective loss_;
  MixtureObjective psi_s_;
  MixtureObjective psi_t_;
};

// All weight vectors on the simplex grid with the given step.
inline std::vector<Eigen::VectorXd> simplex_grid(std::size_t k, double step) {
  const auto m = static_cast<int>(std::llround(1.0 / step));
  if (m < 1 || std::abs(m * step - 1.0) > 1e-9) {
    throw ValidationError("grid step must divide 1");
  }
  std::vector<Eigen::VectorXd> out;
  std::vector<int> c(k, 0);
  // Enumerate compositions of m into k parts.
  std::function<void(std::size_t, int)> rec = [&](std::size_t j, int left) {
    if (j + 1 == k) {
      c[j] = left;
      Eigen::VectorXd w(static_cast<Eigen::Index>(k));
      for (std::size_t t = 0; t < k; ++t) {
        w[static_cast<Eigen::Index>(t)] = static_cast<double>(c[t]) / m;
      }
      out.push_back(std::move(w));
      return;
    }
    for (int v = 0; v <= left; ++v) {
      c[j] = v;
      rec(j + 1, left - v);
    }
  };
  rec(0, m);
  return out;
}

namespace internal {

// Indices of the points not weakly dominated in (loss, sign * imbalance).
// When the scaling is non-decreasing, a dominated challenger can only
// disqualify a classifier that the dominating one also disqualifies.
inline std::vector<std::size_t> staircase(const std::vector<ScoreCard>& cards,
                                          double sign) {
  std::vector<std::size_t> idx(cards.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::make_pair(cards[a].loss_a, sign * cards[a].imbalance_ttos) <
           std::make_pair(cards[b].loss_a, sign * cards[b].imbalance_ttos);
  });
  std::vector<std::size_t> out;
  double best = kInf;
  for (std::size_t i : idx) {
    const double v = sign * cards[i].imbalance_ttos;
    if (v < best) {
      best = v;
      out.push_back(i);
    }
  }
  return out;
}

// Balanced mixtures rarely sit on the grid, and at gamma = 0 they are often
// the only fair ones. For each grid point with positive imbalance and each
// member with negative imbalance, add the zero crossing of their segment.
// These cover the balanced slice about as finely as the grid covers the
// simplex.
inline void add_balanced_points(const ClassifierFamily& family,
                                const LabeledDataset& d,
                                std::vector<Eigen::VectorXd>* grid) {
  const Eigen::VectorXd a = member_imbalances(family, d, Direction::kTtoS);
  const std::size_t base = grid->size();
  for (std::size_t i = 0; i < base; ++i) {
    const Eigen::VectorXd w = (*grid)[i];
    const double aw = a.dot(w);
    if (aw <= 0.0) continue;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
      if (a[j] >= 0.0) continue;
      const double t = -a[j] / (aw - a[j]);
      Eigen::VectorXd m = t * w;
      m[j] += 1.0 - t;
      grid->push_back(std::move(m));
    }
  }
}

}  // namespace internal

// Exhaustive oracle: the minimum-loss grid mixture that no grid mixture
// (alpha1, alpha2, gamma)-disqualifies. Limited to families of at most 4.
inline FairErmResult brute_force_fair_erm(const FamilyPtr& family,
                                          const LabeledDataset& d,
                                          LossKind loss_a, LossKind loss_b,
                                          const ScalingFunction& f,
                                          const FairnessParams& params,
                                          double grid_step) {
  if (family->size() > 4) {
    throw ValidationError("brute-force search supports at most 4 members");
  }
  family->check_bound(d);
  d.require_positives();
  std::vector<Eigen::VectorXd> grid = simplex_grid(family->size(), grid_step);
  internal::add_balanced_points(*family, d, &grid);
  const CardModel model(*family, d, loss_a, loss_b);
  std::vector<ScoreCard> cards(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { cards[i] = model(grid[i]); });

  const auto up = internal::staircase(cards, 1.0);     // lowest T-to-S
  const auto down = internal::staircase(cards, -1.0);  // lowest S-to-T

  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return internal::better(cards[a], a, cards[b], b);
  });

  FairErmResult res;
  res.candidates = grid.size();
  for (std::size_t i : order) {
    const auto& challengers =
        violation_direction(cards[i]) == Direction::kTtoS ? up : down;
    bool ok = true;
    for (std::size_t j : challengers) {
      ++res.checks;
      if (judge(cards[i], cards[j], f, params.gamma, params.alpha1, params.alpha2)
              .disqualified) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    res.bottom = false;
    res.chosen_index = i;
    std::vector<double> w(grid[i].data(), grid[i].data() + grid[i].size());
    res.chosen = Mixture(family, std::move(w));
    res.chosen_loss = cards[i].loss_a;
    res.chosen_imbalance = cards[i].imbalance_ttos;
    res.certified = true;
    break;
  }
  return res;
}

// A mixture that is fair at every gamma: a vertex with the smallest
// violation, or a balanced combination of two members with opposite signs.
inline Mixture existence_witness(const FamilyPtr& family, const LabeledDataset& d,
                                 LossKind loss_b, Direction dir) {
  family->check_bound(d);
  const std::size_t k = family->size();
  std::vector<double> a(k);
  for (std::size_t j = 0; j < k; ++j) {
    a[j] = directed_loss_imbalance(loss_b, (*family)[j], d, dir);
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (std::abs(a[j]) <= kBalanceTolerance) return Mixture::vertex(family, j);
  }
  const auto lo = static_cast<std::size_t>(std::min_element(a.begin(), a.end()) - a.begin());
  const auto hi = static_cast<std::size_t>(std::max_element(a.begin(), a.end()) - a.begin());
  if (a[lo] > 0.0) return Mixture::vertex(family, lo);
  if (a[hi] < 0.0) return Mixture::vertex(family, hi);

  auto mix = [&](double t) {
    std::vector<double> w(k, 0.0);
    w[hi] = t;
    w[lo] += 1.0 - t;
    return Mixture(family, std::move(w));
  };
  if (loss_b == LossKind::kExpectedZeroOne) {
    return mix(-a[lo] / (a[hi] - a[lo]));
  }
  // Imbalance is continuous in t with opposite signs at the ends.
  double t0 = 0.0, t1 = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (t0 + t1);
    const double v = directed_loss_imbalance(
        loss_b, mixture_predictions(mix(mid), d), d, dir);
    (v < 0.0 ? t0 : t1) = mid;
  }
  return mix(0.5 * (t0 + t1));
}

}  // namespace gamma_audit

#endif  // GAMMA_AUDIT_FAIR_ERM_HPP_
