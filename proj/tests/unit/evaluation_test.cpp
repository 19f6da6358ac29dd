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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "common/error.hpp"
#include "common/random.hpp"
#include "evaluation.hpp"

namespace rdtarget {
namespace {

GroundTruth make_truth(std::vector<std::int64_t> ids, std::vector<double> p0,
                       std::vector<double> p1, std::vector<double> v0,
                       std::vector<double> v1) {
  GroundTruth t;
  t.ids = std::move(ids);
  t.p0 = std::move(p0);
  t.p1 = std::move(p1);
  t.v0 = std::move(v0);
  t.v1 = std::move(v1);
  for (std::size_t i = 0; i < t.ids.size(); ++i) {
    t.tau_c.push_back(t.p1[i] - t.p0[i]);
    t.tau_v.push_back(t.v1[i] - t.v0[i]);
    t.tau.push_back(t.p1[i] * t.v1[i] - t.p0[i] * t.v0[i]);
  }
  t.rebuild_index();
  return t;
}

GroundTruth random_truth(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::int64_t> ids;
  std::vector<double> p0, p1, v0, v1;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back(static_cast<std::int64_t>(i + 1));
    p0.push_back(rng.uniform() * 0.3);
    p1.push_back(std::min(1.0, p0.back() + rng.uniform() * 0.1));
    v0.push_back(10.0 + rng.uniform() * 90.0);
    v1.push_back(v0.back() + rng.normal());
  }
  return make_truth(ids, p0, p1, v0, v1);
}

CostSpec fixed(double delta, double kappa = 0.0) {
  CostSpec c;
  c.delta = delta;
  c.kappa = kappa;
  return c;
}

std::vector<PolicyDecision> decisions(const GroundTruth& t, bool target) {
  std::vector<PolicyDecision> out;
  for (const auto id : t.ids) {
    PolicyDecision d;
    d.id = id;
    d.target = target;
    out.push_back(d);
  }
  return out;
}

TEST(TrueProfitTest, TwoCustomerHandCase) {
  const auto truth = make_truth({1, 2}, {0.05, 0.2}, {0.1, 0.3}, {100.0, 50.0},
                                {100.0, 50.0});
  std::vector<PolicyDecision> d(2);
  d[0].id = 1;
  d[0].target = true;
  d[1].id = 2;
  const auto r = true_profit(d, truth, fixed(10.0));
  EXPECT_NEAR(r.profit, 19.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.fraction_targeted, 0.5);
}

TEST(TrueProfitTest, NobodyAndEveryone) {
  const auto truth = random_truth(300, 2);
  double base = 0.0, all = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    base += truth.p0[i] * truth.v0[i];
    all += truth.p1[i] * truth.v1[i];
  }
  EXPECT_NEAR(true_profit(decisions(truth, false), truth, fixed(10.0, 1.0)).profit, base, 1e-9);
  const auto r = true_profit(decisions(truth, true), truth, fixed(0.0));
  EXPECT_NEAR(r.profit, all, 1e-9);
  EXPECT_DOUBLE_EQ(r.fraction_targeted, 1.0);
  EXPECT_NEAR(true_profit(decisions(truth, true), truth, fixed(0.0, 2.0)).profit,
              all - 600.0, 1e-9);
}

TEST(TrueProfitTest, PercentageCostScalesTheValue) {
  const auto truth = make_truth({1}, {0.1}, {0.5}, {40.0}, {40.0});
  CostSpec cost;
  cost.kind = ResponseCost::kPercentage;
  cost.eta = 0.25;
  EXPECT_NEAR(true_profit(decisions(truth, true), truth, cost).profit, 0.5 * 30.0, 1e-12);
}

TEST(TrueProfitTest, MissingAndDuplicateIds) {
  const auto truth = make_truth({1, 2}, {0.1, 0.1}, {0.2, 0.2}, {1, 1}, {1, 1});
  auto d = decisions(truth, true);
  d.pop_back();
  try {
    true_profit(d, truth, fixed(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
  d = decisions(truth, true);
  d.push_back(d.front());
  EXPECT_THROW(true_profit(d, truth, fixed(1.0)), Error);
}

TEST(TrueProfitTest, RealizedMeanMatchesExpected) {
  const auto truth = random_truth(10000, 5);
  std::vector<char> target(truth.size());
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = i % 3 == 0;
  const auto cost = fixed(10.0, 0.5);
  const double expected = true_profit_rows(target, truth, cost).profit;
  std::vector<double> draws;
  for (std::uint64_t s = 0; s < 200; ++s) {
    draws.push_back(true_profit_rows(target, truth, cost, ProfitMode::kRealized, s).profit);
  }
  double m = 0.0;
  for (const double v : draws) m += v;
  m /= 200.0;
  double var = 0.0;
  for (const double v : draws) var += (v - m) * (v - m);
  const double se = std::sqrt(var / 199.0 / 200.0);
  EXPECT_NEAR(m, expected, 3.0 * se);
  EXPECT_EQ(true_profit_rows(target, truth, cost, ProfitMode::kRealized, 7).profit,
            true_profit_rows(target, truth, cost, ProfitMode::kRealized, 7).profit);
}

TEST(RmseOracleTest, ShiftByIdLookup) {
  const auto truth = random_truth(50, 3);
  std::vector<std::int64_t> ids(truth.ids.rbegin(), truth.ids.rend());
  std::vector<double> tau;
  for (const auto id : ids) tau.push_back(truth.tau[truth.row_of(id)] + 1.0);
  EXPECT_NEAR(rmse_vs_oracle(tau, ids, truth), 1.0, 1e-12);
  const std::vector<std::int64_t> bad = {999};
  const std::vector<double> one = {0.0};
  EXPECT_THROW(rmse_vs_oracle(one, bad, truth), Error);
}

ReportRow row(std::string policy, std::string arch, double profit) {
  ReportRow r;
  r.policy = std::move(policy);
  r.architecture = std::move(arch);
  r.profit = profit;
  r.ft = 0.5;
  r.rmse = 1.25;
  r.tol = 100.0;
  r.brier = std::numeric_limits<double>::quiet_NaN();
  r.auc = 0.75;
  return r;
}

TEST(ReportTest, OneRowVerbatimAndSortedOutput) {
  const auto one = assemble_report({row("analytical", "ate", 12.5)});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].architecture, "ate");
  EXPECT_EQ(report_to_csv(one),
            "policy,architecture,profit,ft,rmse,tol,brier,auc\n"
            "analytical,ate,12.500000,0.500000,1.250000,100.000000,NA,0.750000\n");

  const auto a = assemble_report({row("empirical", "b", 1), row("analytical", "z", 2),
                                  row("analytical", "a", 3), row("baseline", "-", 4)});
  const auto b = assemble_report({row("baseline", "-", 4), row("analytical", "a", 3),
                                  row("empirical", "b", 1), row("analytical", "z", 2)});
  EXPECT_EQ(report_to_csv(a), report_to_csv(b));
  EXPECT_EQ(a[0].architecture, "a");
  EXPECT_EQ(a[3].policy, "empirical");
  EXPECT_THROW(assemble_report({row("x", "y", 1), row("x", "y", 2)}), Error);
}

TEST(ReportTest, CsvRoundTripAndText) {
  const auto report = assemble_report({row("analytical", "hurdle-two", 1234.5678),
                                       row("baseline", "-", -3.0)});
  const auto csv = report_to_csv(report);
  const auto parsed = parse_report_csv(csv, "mem");
  EXPECT_EQ(report_to_csv(parsed), csv);
  EXPECT_TRUE(std::isnan(parsed[0].brier));
  const auto text = report_to_text(report);
  EXPECT_NE(text.find("hurdle-two"), std::string::npos);
  EXPECT_NE(text.find("NA"), std::string::npos);
  EXPECT_THROW(parse_report_csv("policy,architecture\nx,y\n", "bad"), Error);
}

}  // namespace
}  // namespace rdtarget
