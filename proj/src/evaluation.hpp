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

// Campaign profit against simulated ground truth and report tables.

#ifndef RDTARGET_EVALUATION_HPP_
#define RDTARGET_EVALUATION_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "policy.hpp"
#include "simulation.hpp"

namespace rdtarget {

enum class ProfitMode { kExpected, kRealized };

struct ProfitResult {
  double profit = 0.0;
  double fraction_targeted = 0.0;
};

// Expected mode: targeted rows earn p1 (v1 - delta_eff(v1)) - kappa, the rest
// p0 v0. Realized mode draws each conversion from the truth probabilities.
ProfitResult true_profit(std::span<const PolicyDecision> decisions,
                         const GroundTruth& truth, const CostSpec& cost,
                         ProfitMode mode = ProfitMode::kExpected,
                         std::uint64_t seed = 0);
// Same, with targeting flags aligned to the truth rows.
ProfitResult true_profit_rows(std::span<const char> target,
                              const GroundTruth& truth, const CostSpec& cost,
                              ProfitMode mode = ProfitMode::kExpected,
                              std::uint64_t seed = 0);

// sqrt(mean((tau_hat - tau)^2)) with tau looked up by id.
double rmse_vs_oracle(std::span<const double> tau_hat,
                      std::span<const std::int64_t> ids, const GroundTruth& truth);

struct ReportRow {
  std::string policy;
  std::string architecture;
  double profit = 0.0;
  double ft = 0.0;
  double rmse = 0.0;
  double tol = 0.0;
  double brier = 0.0;
  double auc = 0.0;
};

using CampaignReport = std::vector<ReportRow>;

// Sorts by (policy, architecture); duplicate keys are an error.
CampaignReport assemble_report(std::vector<ReportRow> rows);

// Header policy,architecture,profit,ft,rmse,tol,brier,auc; NaN prints as NA.
std::string report_to_csv(const CampaignReport& report);
std::string report_to_text(const CampaignReport& report);
CampaignReport parse_report_csv(std::string_view text, const std::string& source);

}  // namespace rdtarget

#endif  // RDTARGET_EVALUATION_HPP_
