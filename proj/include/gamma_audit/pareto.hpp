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

// The epsilon-grid approximate Pareto frontier between lossA and the directed
// imbalance, over mixtures of a finite family.

#ifndef GAMMA_AUDIT_PARETO_HPP_
#define GAMMA_AUDIT_PARETO_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gamma_audit/errors.hpp"
#include "gamma_audit/metrics.hpp"
#include "gamma_audit/simplex_qp.hpp"
#include "gamma_audit/types.hpp"

namespace gamma_audit {

// Caps -1, -1+eps, ..., 1. The last step is shortened to land on 1.
inline std::vector<double> tau_grid(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw ValidationError("epsilon must lie in (0, 1]");
  }
  const auto steps = static_cast<std::size_t>(std::ceil(2.0 / epsilon - 1e-9));
  std::vector<double> taus;
  taus.reserve(steps + 1);
  for (std::size_t i = 0; i < steps; ++i) {
    taus.push_back(-1.0 + static_cast<double>(i) * epsilon);
  }
  taus.push_back(1.0);
  return taus;
}

// lossA of a mixture as 0.5 w'Qw + c'w + constant.
struct MixtureObjective {
  Eigen::MatrixXd q;
  Eigen::VectorXd c;
  double constant = 0.0;
};

// Mean lossA over the rows selected by keep, as a function of the mixture
// weights. Row weights are normalized over the selection.
template <typename Keep>
MixtureObjective subset_objective(const ClassifierFamily& family,
                                  const LabeledDataset& d, LossKind kind,
                                  Keep keep) {
  family.check_bound(d);
  std::vector<std::size_t> rows;
  double mass = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (keep(i)) {
      rows.push_back(i);
      mass += d.weight(i);
    }
  }
  if (!(mass > 0.0)) throw ValidationError("loss over an empty row set");
  const auto k = static_cast<Eigen::Index>(family.size());
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd p(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    auto s = family[static_cast<std::size_t>(j)].scores();
    for (Eigen::Index r = 0; r < n; ++r) p(r, j) = s[rows[static_cast<std::size_t>(r)]];
  }
  Eigen::VectorXd omega(n), y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    omega[r] = d.weight(rows[static_cast<std::size_t>(r)]) / mass;
    y[r] = d.label(rows[static_cast<std::size_t>(r)]);
  }
  MixtureObjective m;
  if (kind == LossKind::kSquared) {
    const Eigen::MatrixXd wp = omega.asDiagonal() * p;
    m.q = 2.0 * p.transpose() * wp;
    m.q = 0.5 * (m.q + m.q.transpose());
    m.c = -2.0 * wp.transpose() * y;
  } else {
    m.q = Eigen::MatrixXd::Zero(k, k);
    m.c = p.transpose() * (omega.array() * (1.0 - 2.0 * y.array())).matrix();
  }
  m.constant = omega.dot(y);
  return m;
}

inline MixtureObjective mixture_objective(const ClassifierFamily& family,
                                          const LabeledDataset& d,
                                          LossKind loss_a) {
  return subset_objective(family, d, loss_a, [](std::size_t) { return true; });
}

inline double evaluate(const MixtureObjective& m, const Eigen::VectorXd& w) {
  return 0.5 * w.dot(m.q * w) + m.c.dot(w) + m.constant;
}

// Directed imbalance of each member; the imbalance of a mixture is a'w.
inline Eigen::VectorXd member_imbalances(const ClassifierFamily& family,
                                         const LabeledDataset& d, Direction dir) {
  Eigen::VectorXd a(static_cast<Eigen::Index>(family.size()));
  for (std::size_t j = 0; j < family.size(); ++j) {
    a[static_cast<Eigen::Index>(j)] = imbalance(family[j], d, dir);
  }
  return a;
}

namespace internal {

inline std::vector<double> to_simplex_weights(const Eigen::VectorXd& w) {
  std::vector<double> out(static_cast<std::size_t>(w.size()));
  double sum = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    out[static_cast<std::size_t>(j)] = std::max(0.0, w[j]);
    sum += out[static_cast<std::size_t>(j)];
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace internal

struct FrontierEntry {
  double tau = 0.0;
  bool feasible = false;
  std::optional<Mixture> mixture;
  double achieved_loss = 0.0;
  double achieved_imbalance = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
};

struct ParetoFrontier {
  std::vector<FrontierEntry> entries;  // one per grid cap, sorted by tau
  double epsilon = 0.0;
  Direction direction = Direction::kTtoS;
  LossKind loss_a = LossKind::kSquared;
  std::size_t solves = 0;  // number of constrained minimizations performed

  std::size_t feasible_count() const {
    return static_cast<std::size_t>(std::count_if(
        entries.begin(), entries.end(),
        [](const FrontierEntry& e) { return e.feasible; }));
  }
};

// The minimum-lossA mixture whose directed imbalance is at most tau, or
// nullopt when no mixture meets the cap.
inline std::optional<Mixture> loss_at_imbalance(const FamilyPtr& family,
                                                double tau,
                                                const LabeledDataset& d,
                                                LossKind loss_a,
                                                Direction dir) {
  d.require_positives();
  const Eigen::VectorXd a = member_imbalances(*family, d, dir);
  if (a.minCoeff() > tau) return std::nullopt;
  const MixtureObjective obj = mixture_objective(*family, d, loss_a);
  QpResult r = solve_simplex_halfspace_qp(obj.q, obj.c, a, tau);
  return Mixture(family, internal::to_simplex_weights(r.weights));
}

// Caps are solved in increasing tau, each warm-started from the previous
// solution. An entry never reports a higher loss than a smaller cap did,
// since the smaller cap's solution is feasible for the larger one.
inline ParetoFrontier approx_pareto_frontier(const FamilyPtr& family,
                                             double epsilon,
                                             const LabeledDataset& d,
                                             LossKind loss_a, Direction dir,
                                             const QpOptions& options = {}) {
  d.require_positives();
  ParetoFrontier pf;
  pf.epsilon = epsilon;
  pf.direction = dir;
  pf.loss_a = loss_a;
  const std::vector<double> taus = tau_grid(epsilon);
  const Eigen::VectorXd a = member_imbalances(*family, d, dir);
  const MixtureObjective obj = mixture_objective(*family, d, loss_a);
  const double amin = a.minCoeff();

  std::optional<Eigen::VectorXd> warm;
  const FrontierEntry* prev = nullptr;
  pf.entries.reserve(taus.size());
  for (double tau : taus) {
    FrontierEntry e;
    e.tau = tau;
    if (amin > tau) {
      pf.entries.push_back(std::move(e));
      continue;
    }
    QpResult r = solve_simplex_halfspace_qp(obj.q, obj.c, a, tau, options, warm);
    ++pf.solves;
    e.feasible = true;
    e.iterations = r.iterations;
    e.kkt_residual = r.kkt_residual;
    Mixture m(family, internal::to_simplex_weights(r.weights));
    const PredictionVector pred = mixture_predictions(m, d);
    e.achieved_loss = loss(loss_a, pred, d);
    e.achieved_imbalance = imbalance(pred, d, dir);
    e.mixture = std::move(m);
    if (prev != nullptr && prev->achieved_loss < e.achieved_loss) {
      e.mixture = prev->mixture;
      e.achieved_loss = prev->achieved_loss;
      e.achieved_imbalance = prev->achieved_imbalance;
    } else {
      warm = r.weights;
    }
    pf.entries.push_back(std::move(e));
    prev = &pf.entries.back();
  }
  return pf;
}

}  // namespace gamma_audit

#endif  // GAMMA_AUDIT_PARETO_HPP_
