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

// Executable checks of the anchoring results: the squared-loss Bayes optimal
// predictor is 1-fair, interpolations toward the optimal balanced predictor
// are fair at the interpolation level (and the balanced endpoint matters),
// and no bounded legal scaling makes the 0/1 Bayes classifier 1-fair.
//
// Everything here evaluates exactly on finite distributions.

#ifndef GAMMA_AUDIT_THEOREMS_HPP_
#define GAMMA_AUDIT_THEOREMS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gamma_audit/disqualification.hpp"
#include "gamma_audit/errors.hpp"
#include "gamma_audit/fair_erm.hpp"
#include "gamma_audit/metrics.hpp"
#include "gamma_audit/parallel.hpp"
#include "gamma_audit/scaling.hpp"
#include "gamma_audit/types.hpp"

namespace gamma_audit {

struct TheoremCheckResult {
  std::string theorem;
  bool passed = false;
  double worst_margin = 0.0;
  std::string challenger;  // description of the worst challenger
  std::size_t trials = 0;
  std::vector<std::pair<std::string, double>> details;
};

// Per-support-point scores of the Bayes optimal predictor for the target
// loss. The 0/1 version predicts 1 when E[y | x, g] >= 1/2.
inline std::vector<double> bayes_optimal(const FiniteDistribution& p,
                                         LossKind target) {
  std::vector<double> s;
  s.reserve(p.size());
  for (const auto& pt : p.support()) {
    s.push_back(target == LossKind::kSquared
                    ? pt.positive_rate
                    : (pt.positive_rate >= 0.5 ? 1.0 : 0.0));
  }
  return s;
}

// Random distribution with one feature (the point index), both groups
// present and both positive classes non-empty.
inline FiniteDistribution random_finite_distribution(std::size_t support,
                                                     std::uint64_t seed) {
  if (support < 2) throw ValidationError("support size must be at least 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::vector<FiniteDistribution::Point> pts(support);
  double total = 0.0;
  for (std::size_t i = 0; i < support; ++i) {
    pts[i].features = {static_cast<double>(i)};
    pts[i].group = i == 0 ? Group::kS
                   : i == 1 ? Group::kT
                            : (unit(rng) < 0.5 ? Group::kS : Group::kT);
    pts[i].mass = 0.01 + expo(rng);
    pts[i].positive_rate = 0.02 + 0.96 * unit(rng);
    total += pts[i].mass;
  }
  for (auto& pt : pts) pt.mass /= total;
  return FiniteDistribution(std::move(pts));
}

// Falsification harness: random challengers against the squared-loss Bayes
// optimal predictor at gamma = 1 with the square-root scaling.
inline TheoremCheckResult check_theorem1(const FiniteDistribution& p,
                                         std::size_t trials,
                                         std::uint64_t seed) {
  const LabeledDataset& d = p.exact_dataset();
  d.require_positives();
  const ScalingFunction f = ScalingFunction::sqrt_form(group_stats(d).eta);
  const std::vector<double> star = bayes_optimal(p, LossKind::kSquared);
  const ScoreCard h = score_card(p.expand(star), d, LossKind::kSquared,
                                 LossKind::kExpectedZeroOne);
  const double star_imbalance = imbalance(p.expand(star), d, Direction::kTtoS);

  TheoremCheckResult r;
  r.theorem = "1";
  r.trials = trials;
  r.worst_margin = -kInf;
  static constexpr const char* kKinds[] = {"random", "single-point",
                                           "s-shift", "t-decrease"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, p.size() - 1);
  std::vector<double> s(p.size());
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t kind = t % 4;
    s = star;
    switch (kind) {
      case 0:
        for (double& v : s) v = unit(rng);
        break;
      case 1:
        s[pick(rng)] = unit(rng);
        break;
      case 2: {
        // The first shift closes the imbalance exactly; later ones are random.
        const double eps = t < 4 ? star_imbalance : 2.0 * unit(rng) - 1.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
          if (p.point(i).group == Group::kS) s[i] = std::clamp(s[i] + eps, 0.0, 1.0);
        }
        break;
      }
      default: {
        const double eps = unit(rng);
        for (std::size_t i = 0; i < s.size(); ++i) {
          if (p.point(i).group == Group::kT) s[i] = std::clamp(s[i] - eps, 0.0, 1.0);
        }
        break;
      }
    }
    const ScoreCard hp = score_card(p.expand(s), d, LossKind::kSquared,
                                    LossKind::kExpectedZeroOne);
    const Verdict v = judge(h, hp, f, 1.0);
    if (v.margin > r.worst_margin) {
      r.worst_margin = v.margin;
      r.challenger = std::string(kKinds[kind]) + " #" + std::to_string(t);
    }
  }
  r.passed = r.worst_margin <= 0.0;
  r.details = {{"eta", f.eta()}, {"bayes_imbalance", star_imbalance}};
  return r;
}

// Runs check_theorem1 on `distributions` random distributions with support
// sizes in [2, max_support].
inline TheoremCheckResult check_theorem1_random(std::size_t distributions,
                                                std::size_t max_support,
                                                std::size_t trials,
                                                std::uint64_t seed) {
  std::vector<TheoremCheckResult> parts(distributions);
  parallel_for(distributions, [&](std::size_t i) {
    std::mt19937_64 rng(seed + 7919 * i);
    const std::size_t k =
        std::uniform_int_distribution<std::size_t>(2, max_support)(rng);
    parts[i] = check_theorem1(random_finite_distribution(k, rng()), trials, rng());
  });
  TheoremCheckResult r;
  r.theorem = "1";
  r.passed = true;
  r.worst_margin = -kInf;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    r.trials += parts[i].trials;
    r.passed = r.passed && parts[i].passed;
    if (parts[i].worst_margin > r.worst_margin) {
      r.worst_margin = parts[i].worst_margin;
      r.challenger = "distribution " + std::to_string(i) + ": " + parts[i].challenger;
    }
  }
  r.details = {{"distributions", static_cast<double>(distributions)}};
  return r;
}

// Support points: T+, half of T-, other half of T-, S1 (all of S+ and half
// of S-), other half of S-. Groups have equal mass and base rate 1/2.
struct Theorem2Fixture {
  FiniteDistribution distribution;
  std::vector<double> h1;        // Bayes optimal
  std::vector<double> h0;        // most accurate balanced predictor
  std::vector<double> g0;        // balanced, 2/3 on T1 and S1
  std::vector<double> g0_prime;  // balanced constant 1/2
};

inline Theorem2Fixture theorem2_fixture() {
  using P = FiniteDistribution::Point;
  std::vector<P> pts = {
      {{0.0}, Group::kT, 0.25, 1.0},
      {{1.0}, Group::kT, 0.125, 0.0},
      {{2.0}, Group::kT, 0.125, 0.0},
      {{3.0}, Group::kS, 0.375, 2.0 / 3.0},
      {{4.0}, Group::kS, 0.125, 0.0},
  };
  FiniteDistribution dist(std::move(pts));
  // With h(T+) = h(S1) = x forced by balance, the loss is minimized at 0.8.
  return {std::move(dist),
          {1.0, 0.0, 0.0, 2.0 / 3.0, 0.0},
          {0.8, 0.0, 0.0, 0.8, 0.0},
          {2.0 / 3.0, 2.0 / 3.0, 0.0, 2.0 / 3.0, 0.0},
          {0.5, 0.5, 0.5, 0.5, 0.5}};
}

inline std::vector<double> blend(double a, const std::vector<double>& x,
                                 const std::vector<double>& y) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + (1.0 - a) * y[i];
  return out;
}

// Part (i): gamma*h1 + (1-gamma)*h0 survives every mixture of {h1, h0, g0,
// g0'} on a weight grid. Part (ii): for each eps, the g0-based blend at
// gamma - eps disqualifies the g0'-based blend at gamma.
inline TheoremCheckResult check_theorem2(double gamma,
                                         const std::vector<double>& eps_list,
                                         double grid_step = 0.01) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ValidationError("gamma must lie in (0, 1)");
  }
  const Theorem2Fixture fx = theorem2_fixture();
  const auto& p = fx.distribution;
  const LabeledDataset& d = p.exact_dataset();
  const ScalingFunction f = ScalingFunction::sqrt_form(group_stats(d).eta);
  auto card = [&](const std::vector<double>& s) {
    return score_card(p.expand(s), d, LossKind::kSquared,
                      LossKind::kExpectedZeroOne);
  };

  TheoremCheckResult r;
  r.theorem = "2";
  const ScoreCard h = card(blend(gamma, fx.h1, fx.h0));
  const FamilyPtr family = make_family(
      {p.expand(fx.h1), p.expand(fx.h0), p.expand(fx.g0), p.expand(fx.g0_prime)});
  const CardModel model(*family, d, LossKind::kSquared, LossKind::kExpectedZeroOne);
  const auto grid = simplex_grid(family->size(), grid_step);
  std::vector<double> margins(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    margins[i] = judge(h, model(grid[i]), f, gamma).margin;
  });
  const auto worst = static_cast<std::size_t>(
      std::max_element(margins.begin(), margins.end()) - margins.begin());
  r.worst_margin = margins[worst];
  r.trials = grid.size();
  const Eigen::VectorXd& w = grid[worst];
  r.challenger = "weights (h1, h0, g0, g0') = (" + std::to_string(w[0]) + ", " +
                 std::to_string(w[1]) + ", " + std::to_string(w[2]) + ", " +
                 std::to_string(w[3]) + ")";
  bool ok = r.worst_margin <= 0.0;

  const ScoreCard hp = card(blend(gamma, fx.h1, fx.g0_prime));
  double min_part2 = kInf;
  for (double eps : eps_list) {
    const ScoreCard ch = card(blend(gamma - eps, fx.h1, fx.g0));
    const Verdict v = judge(hp, ch, f, gamma);
    r.details.emplace_back("part2_margin_eps_" + std::to_string(eps), v.margin);
    min_part2 = std::min(min_part2, v.margin);
    ok = ok && v.disqualified;
  }
  r.details.emplace_back("part1_worst_margin", r.worst_margin);
  if (!eps_list.empty()) r.details.emplace_back("part2_min_margin", min_part2);
  r.details.emplace_back("imbalance_h_gamma", h.imbalance_ttos);
  r.passed = ok;
  return r;
}

// Two support points without features: S with base rate 1/2 - tau and T
// with base rate 1/2 + tau.
inline FiniteDistribution theorem3_distribution(double tau, double mu_s) {
  if (!(tau > 0.0 && tau < 0.5)) throw ValidationError("tau must lie in (0, 1/2)");
  if (!(mu_s > 0.0 && mu_s < 1.0)) throw ValidationError("mu_S must lie in (0, 1)");
  return FiniteDistribution({{{}, Group::kS, mu_s, 0.5 - tau},
                             {{}, Group::kT, 1.0 - mu_s, 0.5 + tau}});
}

enum class Theorem3Alternative {
  kConstantHalf,  // h' = 1/2 everywhere
  kSquaredBayes,  // h' = E[y | g]
};

// Verdict of the alternative against the 0/1 Bayes classifier with both
// losses the expected 0/1 loss.
inline Verdict theorem3_counterexample(
    double tau, double mu_s, Gamma gamma, const ScalingFunction& f,
    Theorem3Alternative alt = Theorem3Alternative::kConstantHalf) {
  if (f.is_separable()) {
    const auto legal = validate_legal(f.separable(), default_legality_grid());
    if (!legal.legal) {
      throw ValidationError("scaling function is not legal: " + legal.violation);
    }
  }
  const FiniteDistribution p = theorem3_distribution(tau, mu_s);
  const LabeledDataset& d = p.exact_dataset();
  const std::vector<double> h = bayes_optimal(p, LossKind::kExpectedZeroOne);
  const std::vector<double> hp = alt == Theorem3Alternative::kConstantHalf
                                     ? std::vector<double>{0.5, 0.5}
                                     : bayes_optimal(p, LossKind::kSquared);
  return disqualifies(p.expand(hp), p.expand(h), d, LossKind::kExpectedZeroOne,
                      LossKind::kExpectedZeroOne, f, gamma);
}

}  // namespace gamma_audit

#endif  // GAMMA_AUDIT_THEOREMS_HPP_
