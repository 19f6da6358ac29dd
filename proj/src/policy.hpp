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

// Targeting rules under targeting- and response-dependent costs, the
// analytical and empirical-threshold policies, and churn campaign profit.

#ifndef RDTARGET_POLICY_HPP_
#define RDTARGET_POLICY_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "causal.hpp"
#include "data_model.hpp"

namespace rdtarget {

enum class ResponseCost { kNone, kFixed, kPercentage };

std::string to_string(ResponseCost kind);
ResponseCost parse_response_cost(const std::string& name);

struct CostSpec {
  double kappa = 0.0;
  ResponseCost kind = ResponseCost::kFixed;
  double delta = 10.0;
  double eta = 0.0;

  // kappa >= 0, delta >= 0, eta in [0, 1).
  void validate() const;
  std::string describe() const;
};

// Response cost per converter: 0, delta, or eta * v1.
double delta_eff(const CostSpec& cost, double v1);

struct PolicyDecision {
  std::int64_t id = 0;
  bool target = false;
  double expected_lhs = 0.0;   // expected incremental profit before costs
  double expected_cost = 0.0;  // p1 * delta_eff + kappa
};

// Target iff p1 v1 - p0 v0 > p1 delta_eff + kappa. Ties are not targeted.
PolicyDecision decide(double p1, double v1, double p0, double v0,
                      const CostSpec& cost);
// Same rule from an effect estimate; `v1` only matters for percentage cost.
PolicyDecision decide_from_effect(double tau, double p1, double v1,
                                  const CostSpec& cost);
// Target iff lhs / cost >= target_roas. Zero cost targets iff lhs > 0.
PolicyDecision decide_roas(double p1, double v1, double p0, double v0,
                           const CostSpec& cost, double target_roas);

// Per-row decisions from model scores. Percentage cost needs `scores.v1`.
std::vector<PolicyDecision> analytical_policy(std::span<const std::int64_t> ids,
                                              const Scores& scores,
                                              const CostSpec& cost);
std::vector<PolicyDecision> analytical_policy(const TargetingModel& model,
                                              const Dataset& data,
                                              const CostSpec& cost);

struct EmpiricalThreshold {
  // Target iff score > threshold; -infinity targets everyone.
  double threshold = 0.0;
  double estimated_profit = 0.0;
  std::size_t policies_evaluated = 0;
};

// IPW estimate of campaign profit on the training rows for the policy
// "target iff score > theta":
//   sum_i 1[pi(x_i) = t_i] (Y_i - t_i (C_i delta_eff_i + kappa)) / P(t_i).
double ipw_policy_profit(std::span<const double> scores, double theta,
                         const Dataset& train, const CostSpec& cost, double e);

// Sweeps -infinity and every unique score; ties go to the higher threshold.
EmpiricalThreshold empirical_policy_threshold(std::span<const double> scores,
                                              const Dataset& train,
                                              const CostSpec& cost, double e);

struct ChurnParams {
  double beta = 0.0;    // churn intent
  double gamma = 0.0;   // offer acceptance
  double lambda = 0.0;  // adverse reaction
  double value = 0.0;   // customer value V
  double delta = 0.0;
  double kappa = 0.0;
  double n = 1.0;      // customer base N
  double alpha = 1.0;  // contacted share
  double fixed_cost = 0.0;  // A

  void validate() const;
};

// N alpha [bg(V-d-k) + (1-b)l(-V-k) + b(1-g-l)(-k) + (1-b)(-d-k)] - A.
double churn_profit(const ChurnParams& params);
// The same campaign without adverse reactions, in its original form:
// N alpha [bg(V-d-k) + b(1-g)(-k) + (1-b)(-d-k)] - A. Ignores lambda.
double churn_profit_original(const ChurnParams& params);

struct ChurnRuleCheck {
  double churn_margin = 0.0;  // per-customer bracket of churn_profit
  double effect = 0.0;        // (bg - (1-b)l) V
  double p1 = 0.0;            // 1 - b(1-g)
  bool churn_target = false;  // churn_margin > 0
  bool rule_target = false;   // decide_from_effect with fixed delta, kappa
  bool agree = false;
};

// Compares the sign of the per-customer churn margin with the targeting rule
// under p1 = 1 - b(1-g), tau = (bg - (1-b)l) V and v1 = V.
ChurnRuleCheck churn_rule_equivalence_check(const ChurnParams& params);

}  // namespace rdtarget

#endif  // RDTARGET_POLICY_HPP_
