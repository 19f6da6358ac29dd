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

#include "evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "common/error.hpp"
#include "common/random.hpp"
#include "common/text.hpp"

namespace rdtarget {

ProfitResult true_profit_rows(std::span<const char> target,
                              const GroundTruth& truth, const CostSpec& cost,
                              ProfitMode mode, std::uint64_t seed) {
  cost.validate();
  if (target.size() != truth.size()) {
    throw invalid_argument("true profit: one flag per truth row required");
  }
  Rng rng(derive_seed(seed, "realized_profit"));
  double profit = 0.0;
  std::size_t targeted = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = target[i] != 0;
    targeted += t ? 1 : 0;
    const double p = t ? truth.p1[i] : truth.p0[i];
    const double v = t ? truth.v1[i] - delta_eff(cost, truth.v1[i]) : truth.v0[i];
    if (mode == ProfitMode::kExpected) {
      profit += p * v;
    } else if (rng.bernoulli(p)) {
      profit += v;
    }
    if (t) profit -= cost.kappa;
  }
  ProfitResult out;
  out.profit = profit;
  out.fraction_targeted =
      truth.size() == 0 ? 0.0
                        : static_cast<double>(targeted) /
                              static_cast<double>(truth.size());
  return out;
}

ProfitResult true_profit(std::span<const PolicyDecision> decisions,
                         const GroundTruth& truth, const CostSpec& cost,
                         ProfitMode mode, std::uint64_t seed) {
  std::unordered_map<std::int64_t, bool> by_id;
  by_id.reserve(decisions.size());
  for (const auto& d : decisions) {
    if (!by_id.emplace(d.id, d.target).second) {
      throw invalid_argument("true profit: duplicate decision for id " +
                             std::to_string(d.id));
    }
  }
  std::vector<char> target(truth.size(), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto it = by_id.find(truth.ids[i]);
    if (it == by_id.end()) {
      throw data_error("true profit: no decision for id " +
                       std::to_string(truth.ids[i]));
    }
    target[i] = it->second ? 1 : 0;
  }
  return true_profit_rows(target, truth, cost, mode, seed);
}

double rmse_vs_oracle(std::span<const double> tau_hat,
                      std::span<const std::int64_t> ids,
                      const GroundTruth& truth) {
  if (tau_hat.size() != ids.size()) {
    throw invalid_argument("rmse: one estimate per id required");
  }
  if (ids.empty()) throw invalid_argument("rmse: no rows");
  double total = 0.0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double d = tau_hat[i] - truth.tau[truth.row_of(ids[i])];
    total += d * d;
  }
  return std::sqrt(total / static_cast<double>(ids.size()));
}

CampaignReport assemble_report(std::vector<ReportRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ReportRow& a, const ReportRow& b) {
                     return std::tie(a.policy, a.architecture) <
                            std::tie(b.policy, b.architecture);
                   });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].policy == rows[i - 1].policy &&
        rows[i].architecture == rows[i - 1].architecture) {
      throw invalid_argument("report: duplicate row (" + rows[i].policy + ", " +
                             rows[i].architecture + ")");
    }
  }
  return rows;
}

std::string report_to_csv(const CampaignReport& report) {
  std::string out = "policy,architecture,profit,ft,rmse,tol,brier,auc\n";
  for (const auto& r : report) {
    out += r.policy + ',' + r.architecture + ',' + format_fixed6(r.profit) +
           ',' + format_fixed6(r.ft) + ',' + format_fixed6(r.rmse) + ',' +
           format_fixed6(r.tol) + ',' + format_fixed6(r.brier) + ',' +
           format_fixed6(r.auc) + '\n';
  }
  return out;
}

std::string report_to_text(const CampaignReport& report) {
  const std::vector<std::string> header = {"policy", "architecture", "profit",
                                           "ft",     "rmse",         "tol",
                                           "brier",  "auc"};
  std::vector<std::vector<std::string>> cells;
  cells.push_back(header);
  auto fmt = [](double v, int digits) {
    if (std::isnan(v)) return std::string("NA");
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
  };
  for (const auto& r : report) {
    cells.push_back({r.policy, r.architecture, fmt(r.profit, 2), fmt(r.ft, 3),
                     fmt(r.rmse, 3), fmt(r.tol, 1), fmt(r.brier, 4),
                     fmt(r.auc, 4)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      width[j] = std::max(width[j], row[j].size());
    }
  }
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      const auto pad = std::string(width[j] - row[j].size(), ' ');
      // Text columns align left, numbers right.
      out += j < 2 ? row[j] + pad : pad + row[j];
      out += j + 1 < row.size() ? "  " : "\n";
    }
  }
  return out;
}

CampaignReport parse_report_csv(std::string_view text, const std::string& source) {
  CampaignReport out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line_no == 1) {
      if (line != "policy,architecture,profit,ft,rmse,tol,brier,auc") {
        throw data_error(source + ":1: unexpected report header");
      }
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 8) {
      throw data_error(source + ":" + std::to_string(line_no) +
                       ": expected 8 fields");
    }
    ReportRow r;
    r.policy = std::string(fields[0]);
    r.architecture = std::string(fields[1]);
    double* targets[] = {&r.profit, &r.ft, &r.rmse, &r.tol, &r.brier, &r.auc};
    for (std::size_t j = 0; j < 6; ++j) {
      if (fields[j + 2] == "NA") {
        *targets[j] = std::nan("");
        continue;
      }
      const auto v = parse_double(fields[j + 2]);
      if (!v) {
        throw data_error(source + ":" + std::to_string(line_no) +
                         ": bad number '" + std::string(fields[j + 2]) + "'");
      }
      *targets[j] = *v;
    }
    out.push_back(std::move(r));
  }
  if (line_no == 0) throw data_error(source + ": empty report");
  return out;
}

}  // namespace rdtarget
