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

// Convex QP over the probability simplex intersected with one halfspace:
//   minimize 0.5 w'Qw + c'w  subject to  w >= 0, sum(w) = 1, a'w <= b.
// Projected gradient with an exact projection, followed by an active-set
// polish.

#ifndef GAMMA_AUDIT_SIMPLEX_QP_HPP_
#define GAMMA_AUDIT_SIMPLEX_QP_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gamma_audit/errors.hpp"

namespace gamma_audit {

struct QpOptions {
  int max_iterations = 50000;
  double objective_tolerance = 1e-10;
  int stall_iterations = 100;
  bool polish = true;
};

struct QpResult {
  Eigen::VectorXd weights;
  double objective = 0.0;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool converged = false;
};

// Euclidean projection onto the probability simplex.
inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumsum += u[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

// Euclidean projection onto {w in simplex : a'w <= b}. Throws InfeasibleError
// when the set is empty.
inline Eigen::VectorXd project_simplex_halfspace(const Eigen::VectorXd& v,
                                                 const Eigen::VectorXd& a,
                                                 double b) {
  const double amin = a.minCoeff();
  if (amin > b) throw InfeasibleError("constraint set is empty");
  Eigen::VectorXd w = project_simplex(v);
  if (a.dot(w) <= b) return w;

  if (amin == b) {
    // Only the face where a is minimal remains.
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    std::vector<Eigen::Index> face;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a[i] == amin) face.push_back(i);
    }
    Eigen::VectorXd sub(static_cast<Eigen::Index>(face.size()));
    for (std::size_t k = 0; k < face.size(); ++k) sub[k] = v[face[k]];
    sub = project_simplex(sub);
    for (std::size_t k = 0; k < face.size(); ++k) out[face[k]] = sub[k];
    return out;
  }

  // Active halfspace: w(l) = P(v - l a) for the multiplier l > 0 solving
  // a'w(l) = b. Centering a leaves P unchanged and keeps v - l a well scaled.
  const Eigen::VectorXd ac = a.array() - a.mean();
  auto at = [&](double l) { return project_simplex(v - l * ac); };
  double lo = 0.0;
  double hi = 1.0;
  while (a.dot(at(hi)) > b) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) break;
  }
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (a.dot(at(mid)) > b ? lo : hi) = mid;
  }
  Eigen::VectorXd best = at(hi);

  // On the final piece w is affine in l; solve a'w(l) = b exactly there.
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < best.size(); ++i) {
    if (best[i] > 0.0) s.push_back(i);
  }
  if (!s.empty()) {
    const double m = static_cast<double>(s.size());
    double sv = 0.0, sa = 0.0;
    for (auto i : s) {
      sv += v[i];
      sa += ac[i];
    }
    // w_i = v_i - l ac_i - (sv - l sa - 1) / m on the support.
    double c0 = 0.0, c1 = 0.0;
    for (auto i : s) {
      c0 += a[i] * (v[i] - (sv - 1.0) / m);
      c1 += a[i] * (-ac[i] + sa / m);
    }
    if (c1 != 0.0) {
      const double l = (b - c0) / c1;
      Eigen::VectorXd cand = Eigen::VectorXd::Zero(v.size());
      const double theta = (sv - l * sa - 1.0) / m;
      bool ok = std::isfinite(l);
      for (auto i : s) {
        cand[i] = v[i] - l * ac[i] - theta;
        if (cand[i] < 0.0) ok = false;
      }
      // Off-support coordinates must stay clipped at this multiplier.
      for (Eigen::Index i = 0; ok && i < v.size(); ++i) {
        if (best[i] == 0.0 && v[i] - l * ac[i] - theta > 1e-12) ok = false;
      }
      if (ok && a.dot(cand) <= b + 1e-15 &&
          (cand - v).squaredNorm() <= (best - v).squaredNorm() + 1e-14) {
        best = cand;
      }
    }
  }
  return best;
}

inline double qp_objective(const Eigen::MatrixXd& q, const Eigen::VectorXd& c,
                           const Eigen::VectorXd& w) {
  return 0.5 * w.dot(q * w) + c.dot(w);
}

inline double qp_kkt_residual(const Eigen::MatrixXd& q, const Eigen::VectorXd& c,
                              const Eigen::VectorXd& a, double b,
                              const Eigen::VectorXd& w) {
  const Eigen::VectorXd grad = q * w + c;
  return (w - project_simplex_halfspace(w - grad, a, b)).lpNorm<Eigen::Infinity>();
}

namespace internal {

// Solves the equality-constrained problem on the support of w with the
// halfspace treated as an equality when active.
inline std::optional<Eigen::VectorXd> polish_active_set(
    const Eigen::MatrixXd& q, const Eigen::VectorXd& c, const Eigen::VectorXd& a,
    double b, const Eigen::VectorXd& w) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > 1e-9) s.push_back(i);
  }
  if (s.empty()) return std::nullopt;
  const bool active = a.dot(w) >= b - 1e-9;
  const Eigen::Index m = static_cast<Eigen::Index>(s.size());
  const Eigen::Index dim = m + 1 + (active ? 1 : 0);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index col = 0; col < m; ++col) k(r, col) = q(s[r], s[col]);
    k(r, m) = 1.0;
    k(m, r) = 1.0;
    if (active) {
      k(r, m + 1) = a[s[r]];
      k(m + 1, r) = a[s[r]];
    }
    rhs[r] = -c[s[r]];
  }
  rhs[m] = 1.0;
  if (active) rhs[m + 1] = b;
  const Eigen::VectorXd sol = k.completeOrthogonalDecomposition().solve(rhs);
  if (!sol.allFinite()) return std::nullopt;
  if ((k * sol - rhs).lpNorm<Eigen::Infinity>() > 1e-9) return std::nullopt;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(w.size());
  for (Eigen::Index r = 0; r < m; ++r) {
    if (sol[r] < -1e-12) return std::nullopt;
    out[s[r]] = std::max(0.0, sol[r]);
  }
  out /= out.sum();
  if (a.dot(out) > b + 1e-12) return std::nullopt;
  return out;
}

}  // namespace internal

// Throws InfeasibleError when min(a) > b and std::invalid_argument when Q is
// not symmetric positive semidefinite.
inline QpResult solve_simplex_halfspace_qp(
    const Eigen::MatrixXd& q, const Eigen::VectorXd& c, const Eigen::VectorXd& a,
    double b, const QpOptions& options = {},
    const std::optional<Eigen::VectorXd>& warm_start = std::nullopt) {
  const Eigen::Index n = c.size();
  if (n == 0 || q.rows() != n || q.cols() != n || a.size() != n) {
    throw std::invalid_argument("QP dimensions do not agree");
  }
  if (a.minCoeff() > b) throw InfeasibleError("constraint set is empty");
  const double qscale = std::max(1.0, q.lpNorm<Eigen::Infinity>());
  if ((q - q.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * qscale) {
    throw std::invalid_argument("Q must be symmetric");
  }
  if (!q.isZero(0.0)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9 * qscale) {
      throw std::invalid_argument("Q must be positive semidefinite");
    }
  }

  double lip = q.cwiseAbs().rowwise().sum().maxCoeff();
  lip = std::max({lip, 1e-3 * c.lpNorm<Eigen::Infinity>(), 1e-12});
  const double step = 1.0 / lip;

  Eigen::VectorXd w = warm_start && warm_start->size() == n
                          ? *warm_start
                          : Eigen::VectorXd::Constant(n, 1.0 / n);
  w = project_simplex_halfspace(w, a, b);
  double obj = qp_objective(q, c, w);

  QpResult r;
  int stall = 0;
  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    Eigen::VectorXd next = project_simplex_halfspace(w - step * (q * w + c), a, b);
    const double next_obj = qp_objective(q, c, next);
    const bool fixed = next == w;
    stall = std::abs(next_obj - obj) < options.objective_tolerance ? stall + 1 : 0;
    w = std::move(next);
    obj = next_obj;
    if (fixed || stall >= options.stall_iterations) {
      ++r.iterations;
      break;
    }
  }

  double kkt = qp_kkt_residual(q, c, a, b, w);
  if (options.polish) {
    if (auto p = internal::polish_active_set(q, c, a, b, w)) {
      const double p_obj = qp_objective(q, c, *p);
      const double p_kkt = qp_kkt_residual(q, c, a, b, *p);
      if (p_obj <= obj + 1e-14 && p_kkt <= std::max(kkt, 1e-12)) {
        w = *p;
        obj = p_obj;
        kkt = p_kkt;
      }
    }
  }
  r.weights = std::move(w);
  r.objective = obj;
  r.kkt_residual = kkt;
  r.converged = kkt <= 1e-8;
  return r;
}

}  // namespace gamma_audit

#endif  // GAMMA_AUDIT_SIMPLEX_QP_HPP_
