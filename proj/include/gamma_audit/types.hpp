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

// Core data model: datasets, randomized classifiers evaluated on a dataset,
// mixtures over a finite base family, and finite distributions used for
// exact (sampling-free) evaluation.

#ifndef GAMMA_AUDIT_TYPES_HPP_
#define GAMMA_AUDIT_TYPES_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gamma_audit/errors.hpp"

namespace gamma_audit {

// Simplex-sum and mass-sum invariants.
inline constexpr double kSumTolerance = 1e-12;

enum class Group : std::uint8_t { kS, kT };

inline constexpr std::string_view group_name(Group g) {
  return g == Group::kS ? "S" : "T";
}

inline constexpr Group other(Group g) {
  return g == Group::kS ? Group::kT : Group::kS;
}

// Direction of a loss imbalance. kTtoS measures how much worse off the
// positives of S are relative to the positives of T.
enum class Direction : std::uint8_t { kTtoS, kStoT };

inline constexpr Direction reverse(Direction d) {
  return d == Direction::kTtoS ? Direction::kStoT : Direction::kTtoS;
}

inline constexpr std::string_view direction_name(Direction d) {
  return d == Direction::kTtoS ? "TtoS" : "StoT";
}

// Trade-off parameter. Infinity is a first-class value meaning exact
// disqualification; it is never represented by a large finite number.
class Gamma {
 public:
  constexpr Gamma() = default;

  // Accepts +inf as the infinite sentinel.
  Gamma(double value) : value_(value) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(value) || value < 0.0) {
      throw ValidationError("gamma must be a non-negative number or inf");
    }
  }

  static Gamma infinite() {
    return Gamma(std::numeric_limits<double>::infinity());
  }

  bool is_infinite() const { return std::isinf(value_); }
  // +inf for the infinite sentinel.
  double value() const { return value_; }

  friend bool operator==(const Gamma&, const Gamma&) = default;
  friend auto operator<=>(const Gamma& a, const Gamma& b) {
    return a.value_ <=> b.value_;
  }

 private:
  double value_ = 0.0;
};

namespace internal {
inline std::uint64_t next_dataset_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}
}  // namespace internal

struct Row {
  std::vector<double> features;
  Group group = Group::kS;
  int label = 0;
};

// The empirical sample. Rows carry an optional non-negative weight (uniform
// by default); weighted rows let a finite distribution be evaluated exactly
// through the same code path as an empirical sample.
//
// Construction checks labels, dimensionality and weights. Whether both groups
// have positives is checked by the operations that need it (and by the CSV
// loader), since sampled or split data may legitimately lack them.
class LabeledDataset {
 public:
  explicit LabeledDataset(std::vector<Row> rows,
                          std::vector<double> weights = {})
      : id_(internal::next_dataset_id()) {
    if (rows.empty()) throw ValidationError("dataset must have at least one row");
    if (!weights.empty() && weights.size() != rows.size()) {
      throw ValidationError("row weights must match the row count");
    }
    dim_ = rows.front().features.size();
    groups_.reserve(rows.size());
    labels_.reserve(rows.size());
    features_.reserve(rows.size() * dim_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      if (r.label != 0 && r.label != 1) {
        throw ValidationError("row " + std::to_string(i) +
                              ": label must be 0 or 1");
      }
      if (r.features.size() != dim_) {
        throw ValidationError("row " + std::to_string(i) +
                              ": inconsistent feature dimensionality");
      }
      groups_.push_back(r.group);
      labels_.push_back(static_cast<std::uint8_t>(r.label));
      features_.insert(features_.end(), r.features.begin(), r.features.end());
    }
    if (weights.empty()) {
      weights_.assign(rows.size(), 1.0);
      uniform_ = true;
    } else {
      for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
          throw ValidationError("row weights must be finite and non-negative");
        }
      }
      weights_ = std::move(weights);
      uniform_ = false;
    }
    total_weight_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (!(total_weight_ > 0.0)) {
      throw ValidationError("row weights must have positive total");
    }
  }

  std::uint64_t id() const { return id_; }
  std::size_t size() const { return groups_.size(); }
  std::size_t dim() const { return dim_; }
  bool uniform_weights() const { return uniform_; }

  Group group(std::size_t i) const { return groups_[i]; }
  int label(std::size_t i) const { return labels_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  double total_weight() const { return total_weight_; }
  std::span<const double> features(std::size_t i) const {
    return {features_.data() + i * dim_, dim_};
  }

  Row row(std::size_t i) const {
    auto f = features(i);
    return Row{{f.begin(), f.end()}, groups_[i], labels_[i]};
  }

  std::size_t count(Group g) const {
    return static_cast<std::size_t>(std::count(groups_.begin(), groups_.end(), g));
  }

  std::size_t count(Group g, int label) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      if (groups_[i] == g && labels_[i] == label) ++c;
    }
    return c;
  }

  // Positive total weight on (group g, label 1).
  bool has_positives(Group g) const {
    for (std::size_t i = 0; i < size(); ++i) {
      if (groups_[i] == g && labels_[i] == 1 && weights_[i] > 0.0) return true;
    }
    return false;
  }

  // Throws MissingPositivesError unless both groups have positive rows.
  void require_positives() const {
    for (Group g : {Group::kS, Group::kT}) {
      if (count(g) == 0) {
        throw MissingPositivesError("group " + std::string(group_name(g)) +
                                    " absent");
      }
      if (!has_positives(g)) {
        throw MissingPositivesError("group " + std::string(group_name(g)) +
                                    " has no positive-label rows");
      }
    }
  }

 private:
  std::uint64_t id_;
  std::size_t dim_ = 0;
  std::vector<Group> groups_;
  std::vector<std::uint8_t> labels_;
  std::vector<double> features_;
  std::vector<double> weights_;
  double total_weight_ = 0.0;
  bool uniform_ = true;
};

// A randomized classifier evaluated on one dataset: the probability of a
// positive prediction for each row.
class PredictionVector {
 public:
  PredictionVector(const LabeledDataset& data, std::vector<double> scores)
      : dataset_id_(data.id()), scores_(std::move(scores)) {
    if (scores_.size() != data.size()) {
      throw BindingError("prediction length " + std::to_string(scores_.size()) +
                         " does not match dataset size " +
                         std::to_string(data.size()));
    }
    for (std::size_t i = 0; i < scores_.size(); ++i) {
      const double s = scores_[i];
      if (!(s >= 0.0 && s <= 1.0)) {
        throw ValidationError("score at row " + std::to_string(i) +
                              " is outside [0,1]");
      }
    }
  }

  std::uint64_t dataset_id() const { return dataset_id_; }
  std::size_t size() const { return scores_.size(); }
  double operator[](std::size_t i) const { return scores_[i]; }
  std::span<const double> scores() const { return scores_; }

  bool bound_to(const LabeledDataset& data) const {
    return dataset_id_ == data.id() && scores_.size() == data.size();
  }

 private:
  std::uint64_t dataset_id_;
  std::vector<double> scores_;
};

inline void check_binding(const PredictionVector& h, const LabeledDataset& d) {
  if (!h.bound_to(d)) {
    throw BindingError("prediction vector is not bound to this dataset");
  }
}

// Affine score w.x + b mapped into [0,1] by clipping.
struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  double score(std::span<const double> x) const {
    double s = bias;
    for (std::size_t j = 0; j < weights.size() && j < x.size(); ++j) {
      s += weights[j] * x[j];
    }
    return std::clamp(s, 0.0, 1.0);
  }

  PredictionVector predict(const LabeledDataset& d) const {
    if (weights.size() != d.dim()) {
      throw ValidationError("linear model dimensionality does not match data");
    }
    std::vector<double> s(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) s[i] = score(d.features(i));
    return PredictionVector(d, std::move(s));
  }
};

// The finite benchmark class H, extensionally.
class ClassifierFamily {
 public:
  struct Member {
    PredictionVector predictions;
    std::string label;
    std::optional<LinearModel> model;
  };

  explicit ClassifierFamily(std::vector<Member> members)
      : members_(std::move(members)) {
    if (members_.empty()) {
      throw ValidationError("classifier family must be non-empty");
    }
    const auto id = members_.front().predictions.dataset_id();
    const auto n = members_.front().predictions.size();
    for (const auto& m : members_) {
      if (m.predictions.dataset_id() != id || m.predictions.size() != n) {
        throw BindingError("family members are bound to different datasets");
      }
    }
  }

  static ClassifierFamily from_predictions(std::vector<PredictionVector> preds) {
    std::vector<Member> members;
    members.reserve(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      members.push_back({std::move(preds[i]), "h" + std::to_string(i), {}});
    }
    return ClassifierFamily(std::move(members));
  }

  std::size_t size() const { return members_.size(); }
  const Member& member(std::size_t j) const { return members_[j]; }
  const PredictionVector& operator[](std::size_t j) const {
    return members_[j].predictions;
  }
  std::uint64_t dataset_id() const {
    return members_.front().predictions.dataset_id();
  }
  std::size_t rows() const { return members_.front().predictions.size(); }

  void check_bound(const LabeledDataset& d) const {
    if (dataset_id() != d.id() || rows() != d.size()) {
      throw BindingError("classifier family is not bound to this dataset");
    }
  }

 private:
  std::vector<Member> members_;
};

using FamilyPtr = std::shared_ptr<const ClassifierFamily>;

inline FamilyPtr make_family(std::vector<PredictionVector> preds) {
  return std::make_shared<const ClassifierFamily>(
      ClassifierFamily::from_predictions(std::move(preds)));
}

// An element of the convex hull of a family.
class Mixture {
 public:
  Mixture(FamilyPtr family, std::vector<double> weights)
      : family_(std::move(family)), weights_(std::move(weights)) {
    if (!family_) throw ValidationError("mixture requires a family");
    if (weights_.size() != family_->size()) {
      throw ValidationError("mixture has " + std::to_string(weights_.size()) +
                            " weights for a family of " +
                            std::to_string(family_->size()));
    }
    double sum = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw ValidationError("mixture weights must be >= 0");
      sum += w;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw ValidationError("mixture weights must sum to 1");
    }
  }

  static Mixture vertex(FamilyPtr family, std::size_t j) {
    std::vector<double> w(family->size(), 0.0);
    w.at(j) = 1.0;
    return Mixture(std::move(family), std::move(w));
  }

  const ClassifierFamily& family() const { return *family_; }
  const FamilyPtr& family_ptr() const { return family_; }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t j) const { return weights_[j]; }

 private:
  FamilyPtr family_;
  std::vector<double> weights_;
};

// Entrywise convex combination of the base predictions. Results are clamped
// to [0,1] to absorb rounding in weights that sum to 1 within tolerance.
inline PredictionVector mixture_predictions(const Mixture& m,
                                            const LabeledDataset& d) {
  const ClassifierFamily& fam = m.family();
  fam.check_bound(d);
  std::vector<double> out(d.size(), 0.0);
  for (std::size_t j = 0; j < fam.size(); ++j) {
    const double w = m.weight(j);
    if (w == 0.0) continue;
    auto s = fam[j].scores();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * s[i];
  }
  for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  return PredictionVector(d, std::move(out));
}

// Slack and grid parameters for approximate disqualification and fair ERM.
struct FairnessParams {
  Gamma gamma{1.0};
  double alpha1 = 0.0;  // imbalance slack
  double alpha2 = 0.0;  // loss slack
  double epsilon = 0.05;  // frontier grid resolution

  void validate() const {
    if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0)) {
      throw ValidationError("alpha1 and alpha2 must be non-negative");
    }
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
      throw ValidationError("epsilon must lie in (0, 1]");
    }
  }

  void validate_for_fair_erm() const {
    validate();
    if (epsilon > alpha1) {
      throw ValidationError("epsilon must not exceed alpha1");
    }
  }
};

// A finite-support distribution over (features, group, label). Each support
// point carries its probability mass and its positive rate E[y | x, g].
class FiniteDistribution {
 public:
  struct Point {
    std::vector<double> features;
    Group group = Group::kS;
    double mass = 0.0;
    double positive_rate = 0.0;
  };

  explicit FiniteDistribution(std::vector<Point> support)
      : support_(std::move(support)) {
    if (support_.empty()) {
      throw ValidationError("distribution support must be non-empty");
    }
    const std::size_t dim = support_.front().features.size();
    double total = 0.0;
    for (const Point& p : support_) {
      if (!(p.mass >= 0.0)) throw ValidationError("masses must be >= 0");
      if (!(p.positive_rate >= 0.0 && p.positive_rate <= 1.0)) {
        throw ValidationError("positive rates must lie in [0,1]");
      }
      if (p.features.size() != dim) {
        throw ValidationError("support features must share dimensionality");
      }
      total += p.mass;
    }
    if (std::abs(total - 1.0) > kSumTolerance) {
      throw ValidationError("distribution masses must sum to 1");
    }
    // Row 2i is the positive half of support point i, row 2i+1 the negative.
    std::vector<Row> rows;
    std::vector<double> weights;
    rows.reserve(2 * support_.size());
    weights.reserve(2 * support_.size());
    for (const Point& p : support_) {
      rows.push_back({p.features, p.group, 1});
      weights.push_back(p.mass * p.positive_rate);
      rows.push_back({p.features, p.group, 0});
      weights.push_back(p.mass * (1.0 - p.positive_rate));
    }
    exact_ = std::make_shared<const LabeledDataset>(std::move(rows),
                                                    std::move(weights));
  }

  std::size_t size() const { return support_.size(); }
  const Point& point(std::size_t i) const { return support_[i]; }
  std::span<const Point> support() const { return support_; }

  // Weighted two-rows-per-point dataset whose weighted expectations are the
  // exact population expectations.
  const LabeledDataset& exact_dataset() const { return *exact_; }

  // Lifts per-support-point scores onto the exact dataset.
  PredictionVector expand(std::span<const double> support_scores) const {
    if (support_scores.size() != support_.size()) {
      throw BindingError("support score length does not match support size");
    }
    std::vector<double> s;
    s.reserve(2 * support_scores.size());
    for (double v : support_scores) {
      s.push_back(v);
      s.push_back(v);
    }
    return PredictionVector(*exact_, std::move(s));
  }

  // Both groups need positive mass with positive expected label.
  void require_positives() const { exact_->require_positives(); }

 private:
  std::vector<Point> support_;
  std::shared_ptr<const LabeledDataset> exact_;
};

// Draws n i.i.d. rows. Deterministic for a fixed seed.
inline LabeledDataset dataset_from_distribution(const FiniteDistribution& p,
                                                std::size_t n,
                                                std::uint64_t seed) {
  if (n == 0) throw ValidationError("sample size must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<double> masses;
  masses.reserve(p.size());
  for (const auto& pt : p.support()) masses.push_back(pt.mass);
  std::discrete_distribution<std::size_t> pick(masses.begin(), masses.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Row> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pt = p.point(pick(rng));
    const int y = unit(rng) < pt.positive_rate ? 1 : 0;
    rows.push_back({pt.features, pt.group, y});
  }
  return LabeledDataset(std::move(rows));
}

}  // namespace gamma_audit

#endif  // GAMMA_AUDIT_TYPES_HPP_
