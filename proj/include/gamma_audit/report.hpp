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

// JSON encodings of results. Unbounded values are written as the strings
// "inf" and "-inf".

#ifndef GAMMA_AUDIT_REPORT_HPP_
#define GAMMA_AUDIT_REPORT_HPP_

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gamma_audit/disqualification.hpp"
#include "gamma_audit/fair_erm.hpp"
#include "gamma_audit/pareto.hpp"
#include "gamma_audit/theorems.hpp"
#include "gamma_audit/types.hpp"

namespace gamma_audit {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaId = "gamma-audit/1";
inline constexpr const char* kToolVersion = "0.1.0";

inline Json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline Json to_json(Gamma g) { return number(g.value()); }

inline Json to_json(const ScoreCard& c) {
  return {{"loss", c.loss_a}, {"imbalance", c.imbalance_ttos}};
}

inline Json to_json(const Verdict& v) {
  return {{"disqualified", v.disqualified},
          {"direction_used", std::string(direction_name(v.direction_used))},
          {"delta_imbalance", number(v.delta_imbalance)},
          {"delta_loss", number(v.delta_loss)},
          {"scaled_threshold", number(v.scaled_threshold)},
          {"margin", number(v.margin)}};
}

inline Json to_json(const GroupStats& s) {
  return {{"mu_s", s.mu_s},     {"mu_t", s.mu_t},         {"beta_s", s.beta_s},
          {"beta_t", s.beta_t}, {"eta", s.eta},           {"mu_min", s.mu_min},
          {"beta_min", s.beta_min}};
}

inline Json to_json(const ScalingFunction& f) {
  Json j = {{"kind", f.name()}};
  if (f.is_sqrt()) j["eta"] = f.eta();
  if (f.is_separable()) {
    auto table = [](const PiecewiseLinear& t) {
      Json rows = Json::array();
      for (std::size_t i = 0; i < t.xs().size(); ++i) rows.push_back({t.xs()[i], t.ys()[i]});
      return rows;
    };
    j["t1"] = table(f.separable().t1);
    j["t2"] = table(f.separable().t2);
  }
  return j;
}

inline Json weights_json(const Mixture& m) {
  Json w = Json::array();
  for (double v : m.weights()) w.push_back(v);
  return w;
}

inline Json to_json(const FrontierEntry& e) {
  Json j = {{"tau", e.tau}, {"feasible", e.feasible}};
  if (e.feasible) {
    j["loss"] = e.achieved_loss;
    j["imbalance"] = e.achieved_imbalance;
    j["weights"] = weights_json(*e.mixture);
    j["iterations"] = e.iterations;
    j["kkt_residual"] = e.kkt_residual;
  }
  return j;
}

inline Json to_json(const ParetoFrontier& pf) {
  Json entries = Json::array();
  for (const auto& e : pf.entries) entries.push_back(to_json(e));
  return {{"epsilon", pf.epsilon},
          {"direction", std::string(direction_name(pf.direction))},
          {"loss_a", std::string(loss_name(pf.loss_a))},
          {"grid_size", pf.entries.size()},
          {"feasible", pf.feasible_count()},
          {"entries", std::move(entries)}};
}

inline Json to_json(const FairErmResult& r) {
  Json j = {{"bottom", r.bottom}};
  if (!r.bottom) {
    j["chosen"] = {{"weights", weights_json(*r.chosen)},
                   {"loss", r.chosen_loss},
                   {"imbalance", r.chosen_imbalance},
                   {"index", *r.chosen_index}};
  } else {
    j["chosen"] = nullptr;
  }
  j["certified"] = r.certified;
  j["candidates"] = r.candidates;
  j["oracle_queries"] = r.oracle_queries;
  j["checks"] = r.checks;
  Json cert = Json::array();
  for (const auto& v : r.certificate) cert.push_back(to_json(v));
  j["certificate"] = std::move(cert);
  return j;
}

inline Json to_json(const TheoremCheckResult& r) {
  Json details = Json::object();
  for (const auto& [k, v] : r.details) details[k] = number(v);
  return {{"theorem", r.theorem},
          {"passed", r.passed},
          {"worst_margin", number(r.worst_margin)},
          {"challenger", r.challenger},
          {"trials", r.trials},
          {"details", std::move(details)}};
}

// Wraps a payload with the schema id, command name and tool metadata. The
// payload carries no timestamps, so identical inputs give identical bytes.
inline Json envelope(const std::string& command, Json config, Json result) {
  return {{"schema", kSchemaId},
          {"command", command},
          {"meta", {{"tool", "gamma-audit"}, {"version", kToolVersion}}},
          {"config", std::move(config)},
          {"result", std::move(result)}};
}

}  // namespace gamma_audit

#endif  // GAMMA_AUDIT_REPORT_HPP_
