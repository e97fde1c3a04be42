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

// Scaling functions translating a loss increase into the amount of imbalance
// reduction it must buy.

#ifndef GAMMA_AUDIT_SCALING_HPP_
#define GAMMA_AUDIT_SCALING_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gamma_audit/errors.hpp"
#include "gamma_audit/types.hpp"

namespace gamma_audit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Piecewise-linear function given by breakpoints with strictly increasing x.
// Outside the table the first or last segment is extended.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> xs, std::vector<double> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size() || xs_.size() < 2) {
      throw ValidationError("piecewise-linear table needs at least 2 points");
    }
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i])) {
        throw ValidationError("piecewise-linear table must be finite");
      }
      if (i > 0 && !(xs_[i] > xs_[i - 1])) {
        throw ValidationError("piecewise-linear breakpoints must increase");
      }
    }
  }

  static PiecewiseLinear identity() { return {{0.0, 1.0}, {0.0, 1.0}}; }

  double operator()(double x) const {
    if (std::isinf(x) && x > 0) {
      const double slope = last_slope();
      if (slope > 0) return kInf;
      if (slope < 0) return -kInf;
      return ys_.back();
    }
    std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
    hi = std::clamp<std::size_t>(hi, 1, xs_.size() - 1);
    const std::size_t lo = hi - 1;
    const double t = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
    return ys_[lo] + t * (ys_[hi] - ys_[lo]);
  }

  double last_slope() const {
    const std::size_t n = xs_.size();
    return (ys_[n - 1] - ys_[n - 2]) / (xs_[n - 1] - xs_[n - 2]);
  }

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

// f_gamma(a) = sqrt(2 gamma a / eta).
struct SqrtForm {
  double eta = 0.5;
};

// f_gamma(a) = t1(gamma) * t2(a).
struct Separable {
  PiecewiseLinear t1;
  PiecewiseLinear t2;
};

// 0 at a = 0 and +inf for a > 0, whatever gamma is.
struct ExactForm {};

class ScalingFunction {
 public:
  using Variant = std::variant<SqrtForm, Separable, ExactForm>;

  ScalingFunction() : ScalingFunction(SqrtForm{}) {}
  ScalingFunction(SqrtForm f) : impl_(f) {  // NOLINT
    if (!(f.eta > 0.0 && f.eta <= 0.5)) {
      throw ValidationError("eta must lie in (0, 1/2]");
    }
  }
  ScalingFunction(Separable f) : impl_(std::move(f)) {}  // NOLINT
  ScalingFunction(ExactForm f) : impl_(f) {}             // NOLINT

  static ScalingFunction sqrt_form(double eta) { return SqrtForm{eta}; }
  static ScalingFunction exact() { return ExactForm{}; }
  static ScalingFunction linear() {
    return Separable{PiecewiseLinear::identity(), PiecewiseLinear::identity()};
  }

  const Variant& variant() const { return impl_; }
  bool is_sqrt() const { return std::holds_alternative<SqrtForm>(impl_); }
  bool is_separable() const { return std::holds_alternative<Separable>(impl_); }
  bool is_exact() const { return std::holds_alternative<ExactForm>(impl_); }
  double eta() const { return std::get<SqrtForm>(impl_).eta; }
  const Separable& separable() const { return std::get<Separable>(impl_); }

  std::string name() const {
    if (is_sqrt()) return "sqrt";
    if (is_separable()) return "separable";
    return "exact";
  }

  // Returns +inf where the threshold is unbounded.
  double operator()(Gamma gamma, double a) const {
    if (!(a >= 0.0)) throw ValidationError("loss difference must be >= 0");
    if (a == 0.0) return 0.0;
    if (const auto* s = std::get_if<SqrtForm>(&impl_)) {
      if (gamma.is_infinite()) return kInf;
      return std::sqrt(2.0 * gamma.value() * a / s->eta);
    }
    if (const auto* s = std::get_if<Separable>(&impl_)) {
      const double t2 = s->t2(a);
      if (t2 == 0.0) return 0.0;
      return s->t1(gamma.value()) * t2;
    }
    return kInf;
  }

 private:
  Variant impl_;
};

struct LegalityGrid {
  std::vector<double> gammas;
  std::vector<double> as;
};

// t1 counts as diverging if it reaches min_value by the probe point.
struct DivergenceProbe {
  double gamma = 1e6;
  double min_value = 1e3;
};

struct LegalityReport {
  bool legal = true;
  std::string violation;  // empty when legal
};

// Grid-based legality check. Divergence of t1 is a single-probe heuristic.
inline LegalityReport validate_legal(const Separable& f, const LegalityGrid& grid,
                                     DivergenceProbe probe = {}) {
  if (grid.gammas.empty() || grid.as.empty()) {
    throw ValidationError("legality grid must be non-empty");
  }
  if (f.t2(0.0) != 0.0) return {false, "t2(0)=0"};
  if (f.t1(0.0) != 0.0) return {false, "t1(0)=0"};
  auto monotone = [](const PiecewiseLinear& t, std::vector<double> pts) {
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (t(pts[i]) < t(pts[i - 1])) return false;
    }
    // Breakpoints between grid samples matter too.
    for (std::size_t i = 1; i < t.ys().size(); ++i) {
      if (t.ys()[i] < t.ys()[i - 1]) return false;
    }
    return true;
  };
  if (!monotone(f.t1, grid.gammas)) return {false, "t1 non-decreasing"};
  if (!monotone(f.t2, grid.as)) return {false, "t2 non-decreasing"};
  if (f.t1.last_slope() < 0.0) return {false, "t1 non-decreasing"};
  if (f.t2.last_slope() < 0.0) return {false, "t2 non-decreasing"};
  if (f.t1(probe.gamma) < probe.min_value) return {false, "t1 divergence"};
  return {};
}

// Default grid: 0 plus log-spaced points.
inline LegalityGrid default_legality_grid() {
  LegalityGrid g;
  g.gammas.push_back(0.0);
  for (double x = 1e-6; x <= 1e6; x *= 10.0) g.gammas.push_back(x);
  for (int i = 0; i <= 100; ++i) g.as.push_back(i / 100.0);
  return g;
}

}  // namespace gamma_audit

#endif  // GAMMA_AUDIT_SCALING_HPP_
