/*
 * Copyright 2026 The rdtarget Authors.
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

#include "policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "common/error.hpp"
#include "common/text.hpp"

namespace rdtarget {
namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
}

void check_value(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw invalid_argument(std::string(name) + " must be finite and >= 0");
  }
}

void check_propensity(double e) {
  if (!(e > 0.0 && e < 1.0)) {
    throw invalid_argument("assignment propensity must lie in (0, 1)");
  }
}

}  // namespace

std::string to_string(ResponseCost kind) {
  switch (kind) {
    case ResponseCost::kNone:
      return "none";
    case ResponseCost::kFixed:
      return "fixed";
    case ResponseCost::kPercentage:
      return "percentage";
  }
  return "unknown";
}

ResponseCost parse_response_cost(const std::string& name) {
  if (name == "none") return ResponseCost::kNone;
  if (name == "fixed") return ResponseCost::kFixed;
  if (name == "percentage") return ResponseCost::kPercentage;
  throw config_error("unknown response cost kind '" + name + "'");
}

void CostSpec::validate() const {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw config_error("kappa must be finite and >= 0");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw config_error("delta must be finite and >= 0");
  }
  if (!(eta >= 0.0 && eta < 1.0)) throw config_error("eta must lie in [0, 1)");
}

std::string CostSpec::describe() const {
  std::string out = "kappa=" + format_fixed6(kappa) + " kind=" + to_string(kind);
  if (kind == ResponseCost::kFixed) out += " delta=" + format_fixed6(delta);
  if (kind == ResponseCost::kPercentage) out += " eta=" + format_fixed6(eta);
  return out;
}

double delta_eff(const CostSpec& cost, double v1) {
  switch (cost.kind) {
    case ResponseCost::kNone:
      return 0.0;
    case ResponseCost::kFixed:
      return cost.delta;
    case ResponseCost::kPercentage:
      return cost.eta * v1;
  }
  return 0.0;
}

PolicyDecision decide_from_effect(double tau, double p1, double v1,
                                  const CostSpec& cost) {
  cost.validate();
  PolicyDecision d;
  d.expected_lhs = tau;
  d.expected_cost = p1 * delta_eff(cost, v1) + cost.kappa;
  d.target = d.expected_lhs > d.expected_cost;
  return d;
}

PolicyDecision decide(double p1, double v1, double p0, double v0,
                      const CostSpec& cost) {
  check_probability(p1, "p1");
  check_probability(p0, "p0");
  check_value(v1, "v1");
  check_value(v0, "v0");
  return decide_from_effect(p1 * v1 - p0 * v0, p1, v1, cost);
}

PolicyDecision decide_roas(double p1, double v1, double p0, double v0,
                           const CostSpec& cost, double target_roas) {
  if (!(target_roas >= 0.0)) throw invalid_argument("target ROAS must be >= 0");
  auto d = decide(p1, v1, p0, v0, cost);
  if (d.expected_cost == 0.0) {
    d.target = d.expected_lhs > 0.0;
  } else {
    d.target = d.expected_lhs / d.expected_cost >= target_roas;
  }
  return d;
}

std::vector<PolicyDecision> analytical_policy(std::span<const std::int64_t> ids,
                                              const Scores& scores,
                                              const CostSpec& cost) {
  cost.validate();
  const std::size_t n = scores.tau.size();
  if (ids.size() != n || scores.p1.size() != n ||
      (scores.v1 && scores.v1->size() != n)) {
    throw invalid_argument("analytical policy: score vectors must align");
  }
  if (cost.kind == ResponseCost::kPercentage && !scores.v1) {
    throw incompatible(
        "percentage response cost needs a value scorer; this architecture "
        "has none");
  }
  std::vector<PolicyDecision> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v1 = scores.v1 ? (*scores.v1)[i] : 0.0;
    out[i] = decide_from_effect(scores.tau[i], scores.p1[i], v1, cost);
    out[i].id = ids[i];
  }
  return out;
}

std::vector<PolicyDecision> analytical_policy(const TargetingModel& model,
                                              const Dataset& data,
                                              const CostSpec& cost) {
  if (cost.kind == ResponseCost::kPercentage && !model.has_value_scorer()) {
    throw incompatible("architecture " + to_string(model.architecture()) +
                       " has no value scorer; percentage response cost is "
                       "not supported");
  }
  const auto ids = data.ids();
  return analytical_policy(ids, model.score(ids, data.covariates()), cost);
}

namespace {

// Per-row contributions when the row is targeted (a) and when it is not (b).
void ipw_contributions(const Dataset& train, const CostSpec& cost, double e,
                       std::vector<double>& a, std::vector<double>& b) {
  a.assign(train.size(), 0.0);
  b.assign(train.size(), 0.0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& r = train[i];
    if (r.t == 1) {
      const double response_cost = r.c == 1 ? delta_eff(cost, r.v) : 0.0;
      a[i] = (r.y() - response_cost - cost.kappa) / e;
    } else {
      b[i] = r.y() / (1.0 - e);
    }
  }
}

}  // namespace

double ipw_policy_profit(std::span<const double> scores, double theta,
                         const Dataset& train, const CostSpec& cost, double e) {
  cost.validate();
  check_propensity(e);
  if (scores.size() != train.size()) {
    throw invalid_argument("empirical policy: scores must align with rows");
  }
  std::vector<double> a, b;
  ipw_contributions(train, cost, e, a, b);
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    total += scores[i] > theta ? a[i] : b[i];
  }
  return total;
}

EmpiricalThreshold empirical_policy_threshold(std::span<const double> scores,
                                              const Dataset& train,
                                              const CostSpec& cost, double e) {
  cost.validate();
  check_propensity(e);
  if (train.empty()) throw invalid_argument("empirical policy: empty training set");
  if (scores.size() != train.size()) {
    throw invalid_argument("empirical policy: scores must align with rows");
  }
  for (const double s : scores) {
    if (std::isnan(s)) throw invalid_argument("empirical policy: NaN score");
  }
  std::vector<double> a, b;
  ipw_contributions(train, cost, e, a, b);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return scores[i] < scores[j];
  });

  // Start from "target everyone" and untarget one block of tied scores at a
  // time, in ascending score order.
  double profit = 0.0;
  for (const double v : a) profit += v;
  EmpiricalThreshold best;
  best.threshold = -std::numeric_limits<double>::infinity();
  best.estimated_profit = profit;
  best.policies_evaluated = 1;
  std::size_t k = 0;
  while (k < order.size()) {
    const double level = scores[order[k]];
    while (k < order.size() && scores[order[k]] == level) {
      profit += b[order[k]] - a[order[k]];
      ++k;
    }
    ++best.policies_evaluated;
    if (profit >= best.estimated_profit) {
      best.estimated_profit = profit;
      best.threshold = level;
    }
  }
  return best;
}

void ChurnParams::validate() const {
  for (const double p : {beta, gamma, lambda}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw invalid_argument("churn probabilities must lie in [0, 1]");
    }
  }
  if (gamma + lambda > 1.0) {
    throw invalid_argument("churn parameters need gamma + lambda <= 1");
  }
  for (const double v : {value, delta, kappa, n, alpha, fixed_cost}) {
    if (!std::isfinite(v)) throw invalid_argument("churn parameters must be finite");
  }
  if (value < 0.0 || delta < 0.0 || kappa < 0.0) {
    throw invalid_argument("churn value and costs must be >= 0");
  }
}

namespace {

double churn_margin(const ChurnParams& q) {
  const double b = q.beta, g = q.gamma, l = q.lambda;
  return b * g * (q.value - q.delta - q.kappa) +
         (1.0 - b) * l * (-q.value - q.kappa) + b * (1.0 - g - l) * (-q.kappa) +
         (1.0 - b) * (-q.delta - q.kappa);
}

}  // namespace

double churn_profit(const ChurnParams& params) {
  params.validate();
  return params.n * params.alpha * churn_margin(params) - params.fixed_cost;
}

double churn_profit_original(const ChurnParams& params) {
  params.validate();
  const double b = params.beta, g = params.gamma;
  return params.n * params.alpha *
             (b * g * (params.value - params.delta - params.kappa) +
              b * (1.0 - g) * (-params.kappa) +
              (1.0 - b) * (-params.delta - params.kappa)) -
         params.fixed_cost;
}

ChurnRuleCheck churn_rule_equivalence_check(const ChurnParams& params) {
  params.validate();
  ChurnRuleCheck out;
  const double b = params.beta, g = params.gamma, l = params.lambda;
  out.churn_margin = churn_margin(params);
  out.effect = (b * g - (1.0 - b) * l) * params.value;
  out.p1 = 1.0 - b * (1.0 - g);
  CostSpec cost;
  cost.kind = ResponseCost::kFixed;
  cost.delta = params.delta;
  cost.kappa = params.kappa;
  out.churn_target = out.churn_margin > 0.0;
  out.rule_target =
      decide_from_effect(out.effect, out.p1, params.value, cost).target;
  out.agree = out.churn_target == out.rule_target;
  return out;
}

}  // namespace rdtarget
