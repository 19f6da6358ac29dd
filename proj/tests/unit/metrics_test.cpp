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

#include "common/error.hpp"
#include "common/random.hpp"
#include "metrics.hpp"

namespace rdtarget {
namespace {

TEST(TransformedOutcomeTest, HandValues) {
  EXPECT_DOUBLE_EQ(transformed_outcome(10.0, 1.0, 0.5), 20.0);
  EXPECT_DOUBLE_EQ(transformed_outcome(0.0, 0.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(transformed_outcome(10.0, 0.0, 0.5), -20.0);
  EXPECT_DOUBLE_EQ(transformed_outcome(6.0, 1.0, 0.25), 24.0);
  EXPECT_THROW(transformed_outcome(1.0, 1.0, 1.0), Error);
}

TEST(TolTest, HandValuesAndPerfectFit) {
  const std::vector<double> tau = {5.0};
  const std::vector<double> y = {10.0};
  const std::vector<double> t = {1.0};
  EXPECT_DOUBLE_EQ(tol(tau, y, t, 0.5), 225.0);

  const std::vector<double> ys = {3.0, 0.0, 7.0, 1.0};
  const std::vector<double> ts = {1.0, 0.0, 0.0, 1.0};
  std::vector<double> star;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    star.push_back(transformed_outcome(ys[i], ts[i], 0.4));
  }
  EXPECT_DOUBLE_EQ(tol(star, ys, ts, 0.4), 0.0);
  EXPECT_THROW(tol(tau, ys, ts, 0.5), Error);
}

TEST(TolTest, ConstantShiftIdentity) {
  Rng rng(77);
  std::vector<double> tau(300), y(300), t(300), resid(300);
  for (std::size_t i = 0; i < 300; ++i) {
    tau[i] = rng.normal();
    t[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    y[i] = rng.bernoulli(0.2) ? 50.0 * rng.uniform() : 0.0;
    resid[i] = transformed_outcome(y[i], t[i], 0.5) - tau[i];
  }
  const double base = tol(tau, y, t, 0.5);
  for (const double c : {-3.0, 0.25, 11.0}) {
    std::vector<double> shifted(tau);
    for (auto& v : shifted) v += c;
    EXPECT_NEAR(tol(shifted, y, t, 0.5) - base, c * c - 2.0 * c * mean(resid), 1e-9);
  }
}

TEST(RmseTest, ShiftAndStandardDeviation) {
  const std::vector<double> tau = {1.0, 4.0, -2.0, 9.0};
  EXPECT_DOUBLE_EQ(rmse(tau, tau), 0.0);
  std::vector<double> plus(tau);
  for (auto& v : plus) v += 1.0;
  EXPECT_DOUBLE_EQ(rmse(plus, tau), 1.0);
  const double m = mean(tau);
  double var = 0.0;
  for (const double v : tau) var += (v - m) * (v - m);
  const std::vector<double> flat(4, m);
  EXPECT_NEAR(rmse(flat, tau), std::sqrt(var / 4.0), 1e-12);
}

TEST(BrierAucTest, PerfectConstantAndReversed) {
  const std::vector<double> c = {0, 1, 1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(brier(c, c), 0.0);
  EXPECT_DOUBLE_EQ(roc_auc(c, c), 1.0);
  const std::vector<double> half(6, 0.5);
  EXPECT_DOUBLE_EQ(brier(half, c), 0.25);
  EXPECT_DOUBLE_EQ(roc_auc(half, c), 0.5);
  std::vector<double> reversed;
  for (const double v : c) reversed.push_back(1.0 - v);
  EXPECT_DOUBLE_EQ(roc_auc(reversed, c), 0.0);
}

TEST(BrierAucTest, SingleClassAucIsNaN) {
  const std::vector<double> c = {1, 1, 1};
  const std::vector<double> p = {0.2, 0.5, 0.9};
  EXPECT_TRUE(std::isnan(roc_auc(p, c)));
}

TEST(BrierAucTest, BaseRateBrierIsBernoulliVariance) {
  std::vector<double> c(200, 0.0);
  for (std::size_t i = 0; i < 30; ++i) c[i * 6] = 1.0;
  const double r = 30.0 / 200.0;
  const std::vector<double> p(200, r);
  EXPECT_NEAR(brier(p, c), r * (1.0 - r), 1e-12);
}

TEST(BrierAucTest, AucInvariantUnderMonotoneTransform) {
  Rng rng(4);
  std::vector<double> p(500), c(500), q(500);
  for (std::size_t i = 0; i < 500; ++i) {
    p[i] = std::round(rng.uniform() * 20.0) / 20.0;  // forces ties
    c[i] = rng.bernoulli(p[i]) ? 1.0 : 0.0;
    q[i] = std::exp(3.0 * p[i]) - 7.0;
  }
  EXPECT_DOUBLE_EQ(roc_auc(p, c), roc_auc(q, c));
}

TEST(BrierAucTest, AucMatchesPairCountOracle) {
  Rng rng(9);
  std::vector<double> p(80), c(80);
  for (std::size_t i = 0; i < 80; ++i) {
    p[i] = std::round(rng.uniform() * 8.0);
    c[i] = rng.bernoulli(0.4) ? 1.0 : 0.0;
  }
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < 80; ++i) {
    for (std::size_t j = 0; j < 80; ++j) {
      if (c[i] != 1.0 || c[j] != 0.0) continue;
      pairs += 1.0;
      wins += p[i] > p[j] ? 1.0 : (p[i] == p[j] ? 0.5 : 0.0);
    }
  }
  EXPECT_NEAR(roc_auc(p, c), wins / pairs, 1e-12);
}

TEST(SpearmanTest, KnownValues) {
  const std::vector<double> a = {1, 2, 3};
  const std::vector<double> b = {1, 3, 2};
  EXPECT_NEAR(spearman(a, a), 1.0, 1e-12);
  const std::vector<double> neg = {-1, -2, -3};
  EXPECT_NEAR(spearman(a, neg), -1.0, 1e-12);
  EXPECT_NEAR(spearman(a, b), 0.5, 1e-12);
  const std::vector<double> flat = {2, 2, 2};
  EXPECT_TRUE(std::isnan(spearman(a, flat)));
}

TEST(SpearmanTest, TiesShareTheirMeanRank) {
  const std::vector<double> v = {10, 20, 20, 5};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{2.0, 3.5, 3.5, 1.0}));
}

TEST(LossTest, WeightedMseAndLogLoss) {
  const std::vector<double> pred = {1.0, 2.0};
  const std::vector<double> y = {0.0, 0.0};
  const std::vector<double> w = {3.0, 1.0};
  EXPECT_DOUBLE_EQ(mse(pred, y), 2.5);
  EXPECT_DOUBLE_EQ(mse(pred, y, std::span<const double>(w)), 7.0 / 4.0);
  const std::vector<double> prob = {0.5, 0.5};
  const std::vector<double> c = {1.0, 0.0};
  EXPECT_NEAR(log_loss(prob, c), std::log(2.0), 1e-15);
  const std::vector<double> certain = {1.0};
  const std::vector<double> wrong = {0.0};
  EXPECT_TRUE(std::isfinite(log_loss(certain, wrong)));
}

}  // namespace
}  // namespace rdtarget
