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
#include <numeric>
#include <sstream>

#include "common/error.hpp"
#include "common/random.hpp"
#include "learners/gbt.hpp"
#include "learners/grid_search.hpp"
#include "learners/linear.hpp"
#include "metrics.hpp"

namespace rdtarget {
namespace {

Matrix random_matrix(std::size_t n, std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) x(i, j) = rng.normal();
  }
  return x;
}

FoldPlan round_robin(std::size_t n, int k) {
  FoldPlan plan;
  plan.k = k;
  for (std::size_t i = 0; i < n; ++i) {
    plan.ids.push_back(static_cast<std::int64_t>(i + 1));
    plan.fold.push_back(static_cast<int>(i % static_cast<std::size_t>(k)));
  }
  return plan;
}

TEST(GbtTest, ZeroTreesIsWeightedMean) {
  Matrix x(4, 1);
  const std::vector<double> y = {1.0, 2.0, 3.0, 10.0};
  const std::vector<double> w = {1.0, 1.0, 1.0, 3.0};
  GbtParams params;
  params.n_trees = 0;
  const auto model = fit_gbt(x, y, std::span<const double>(w), GbtTask::kRegression,
                             params);
  EXPECT_TRUE(model.trees().empty());
  // (1 + 2 + 3 + 30) / 6
  for (const double v : model.predict(x)) EXPECT_DOUBLE_EQ(v, 6.0);
}

TEST(GbtTest, BalancedConstantClassifierPredictsOneHalf) {
  Matrix x(6, 2);
  const std::vector<double> y = {0, 1, 0, 1, 0, 1};
  GbtParams params;
  params.n_trees = 0;
  const auto model = fit_gbt(x, y, {}, GbtTask::kClassification, params);
  for (const double v : model.predict(x)) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(GbtTest, HandTracedStump) {
  // base = mean(y) = 1, residuals (-1,-1,1,1); one stump with learning rate 1
  // splits between 0 and 1 and lands exactly on y.
  Matrix x(4, 1);
  x(2, 0) = 1.0;
  x(3, 0) = 1.0;
  const std::vector<double> y = {0.0, 0.0, 2.0, 2.0};
  const GbtParams params{1, 1, 1.0, 1.0, 0.0};
  const auto model = fit_gbt(x, y, {}, GbtTask::kRegression, params);
  ASSERT_EQ(model.trees().size(), 1u);
  const auto& nodes = model.trees()[0].nodes;
  ASSERT_EQ(nodes.size(), 3u);
  EXPECT_EQ(nodes[0].feature, 0);
  EXPECT_GT(nodes[0].threshold, 0.0);
  EXPECT_LE(nodes[0].threshold, 1.0);
  EXPECT_DOUBLE_EQ(nodes[nodes[0].left].value, -1.0);
  EXPECT_DOUBLE_EQ(nodes[nodes[0].right].value, 1.0);
  EXPECT_EQ(model.predict(x), y);
}

TEST(GbtTest, PredictFollowsAHandBuiltTree) {
  Tree tree;
  tree.nodes = {TreeNode{1, 2.0, 1, 2, 0.0}, TreeNode{-1, 0.0, -1, -1, -4.0},
                TreeNode{-1, 0.0, -1, -1, 6.0}};
  const auto model = GbtModel::from_parts(GbtTask::kRegression,
                                          GbtParams{1, 1, 0.5, 1.0, 0.0}, 10.0, 2,
                                          {tree});
  Matrix x(3, 2);
  x(0, 1) = 1.0;   // left: 10 + 0.5 * -4
  x(1, 1) = 2.0;   // right: ties go right
  x(2, 1) = 7.0;
  const auto pred = model.predict(x);
  EXPECT_DOUBLE_EQ(pred[0], 8.0);
  EXPECT_DOUBLE_EQ(pred[1], 13.0);
  EXPECT_DOUBLE_EQ(pred[2], 13.0);
  EXPECT_DOUBLE_EQ(model.predict(x, 0)[2], 10.0);
}

TEST(GbtTest, SeparableToyIsFitExactly) {
  Matrix x(40, 2);
  std::vector<double> y(40);
  Rng rng(3);
  for (std::size_t i = 0; i < 40; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = rng.normal();
    y[i] = i >= 17 ? 1.0 : 0.0;
  }
  const GbtParams params{30, 1, 0.3, 1.0, 0.0};
  const auto model = fit_gbt(x, y, {}, GbtTask::kClassification, params);
  const auto prob = model.predict(x);
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(prob[i] > 0.5 ? 1.0 : 0.0, y[i]) << "row " << i;
  }
}

TEST(GbtTest, TrainingLossIsNonIncreasing) {
  const auto x = random_matrix(600, 4, 17);
  std::vector<double> yr(600), yc(600), w(600);
  Rng rng(5);
  for (std::size_t i = 0; i < 600; ++i) {
    yr[i] = std::sin(x(i, 0)) + x(i, 1) * x(i, 2) + 0.3 * rng.normal();
    yc[i] = rng.bernoulli(sigmoid(x(i, 0) - x(i, 3))) ? 1.0 : 0.0;
    w[i] = 0.2 + rng.uniform() * 3.0;
  }
  const GbtParams params{60, 3, 0.2, 5.0, 0.0};
  for (const auto task : {GbtTask::kRegression, GbtTask::kClassification}) {
    const auto& y = task == GbtTask::kRegression ? yr : yc;
    for (const bool weighted : {false, true}) {
      const auto model =
          weighted ? fit_gbt(x, y, std::span<const double>(w), task, params)
                   : fit_gbt(x, y, {}, task, params);
      const auto& loss = model.train_loss();
      ASSERT_EQ(loss.size(), 61u);
      for (std::size_t r = 1; r < loss.size(); ++r) {
        EXPECT_LE(loss[r], loss[r - 1]) << to_string(task) << " round " << r;
      }
    }
  }
}

TEST(GbtTest, ClassifierOutputsStayInsideTheOpenInterval) {
  Matrix x(50, 1);
  std::vector<double> y(50, 1.0);
  for (std::size_t i = 0; i < 50; ++i) x(i, 0) = static_cast<double>(i);
  const auto model = fit_gbt(x, y, {}, GbtTask::kClassification,
                             GbtParams{200, 2, 1.0, 1.0, 0.0});
  for (const double p : model.predict(x)) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
    EXPECT_GT(p, 0.99);
  }
}

TEST(GbtTest, WeightScaleInvariance) {
  const auto x = random_matrix(400, 3, 9);
  std::vector<double> yr(400), yc(400), w(400);
  Rng rng(21);
  for (std::size_t i = 0; i < 400; ++i) {
    yr[i] = x(i, 0) * 2.0 + rng.normal();
    yc[i] = rng.bernoulli(0.3) ? 1.0 : 0.0;
    w[i] = 0.5 + rng.uniform();
  }
  const GbtParams params{40, 3, 0.1, 4.0, 0.0};
  for (const double scale : {2.0, 0.125, 37.5}) {
    std::vector<double> ws(w);
    for (auto& v : ws) v *= scale;
    for (const auto task : {GbtTask::kRegression, GbtTask::kClassification}) {
      const auto& y = task == GbtTask::kRegression ? yr : yc;
      const auto a = fit_gbt(x, y, std::span<const double>(w), task, params).predict(x);
      const auto b = fit_gbt(x, y, std::span<const double>(ws), task, params).predict(x);
      for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
    }
  }
}

TEST(GbtTest, TextRoundTripPreservesPredictions) {
  const auto x = random_matrix(200, 3, 4);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) y[i] = x(i, 0) > 0 ? 1.0 : 0.0;
  const auto model = fit_gbt(x, y, {}, GbtTask::kClassification,
                             GbtParams{20, 2, 0.1, 2.0, 0.0});
  std::stringstream buf;
  model.write(buf);
  const auto again = GbtModel::read(buf);
  EXPECT_EQ(model.predict(x), again.predict(x));
}

TEST(GbtTest, RejectsBadInput) {
  Matrix x(3, 1);
  const std::vector<double> y = {0, 1, 2};
  EXPECT_THROW(fit_gbt(Matrix(0, 1), {}, {}, GbtTask::kRegression, {}), Error);
  EXPECT_THROW(fit_gbt(x, y, {}, GbtTask::kClassification, {}), Error);
  const auto model = fit_gbt(x, y, {}, GbtTask::kRegression, GbtParams{1, 1, 0.1, 1.0, 0.0});
  EXPECT_THROW(model.predict(Matrix(2, 2)), Error);
}

TEST(LinearTest, RecoversExactLine) {
  Matrix x(25, 1);
  std::vector<double> y(25);
  for (std::size_t i = 0; i < 25; ++i) {
    x(i, 0) = static_cast<double>(i) * 0.37 - 3.0;
    y[i] = 2.0 * x(i, 0) + 1.0;
  }
  const auto model = fit_linear(x, y, LinkFunction::kIdentity);
  ASSERT_EQ(model.weights.size(), 1u);
  EXPECT_NEAR(model.weights[0], 2.0, 1e-6);
  EXPECT_NEAR(model.intercept, 1.0, 1e-6);
}

TEST(LinearTest, OrthogonalFeaturesMatchUnivariateFits) {
  // Centered +-1 design with orthogonal columns: each least-squares slope is
  // sum(x_j y) / sum(x_j^2).
  const double a[8] = {1, 1, 1, 1, -1, -1, -1, -1};
  const double b[8] = {1, 1, -1, -1, 1, 1, -1, -1};
  Matrix x(8, 2);
  std::vector<double> y(8);
  Rng rng(8);
  for (std::size_t i = 0; i < 8; ++i) {
    x(i, 0) = a[i];
    x(i, 1) = b[i];
    y[i] = 3.0 * a[i] - 0.5 * b[i] + 4.0 + rng.normal();
  }
  double sa = 0, sb = 0, sy = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    sa += a[i] * y[i];
    sb += b[i] * y[i];
    sy += y[i];
  }
  const auto model = fit_linear(x, y, LinkFunction::kIdentity);
  EXPECT_NEAR(model.weights[0], sa / 8.0, 1e-6);
  EXPECT_NEAR(model.weights[1], sb / 8.0, 1e-6);
  EXPECT_NEAR(model.intercept, sy / 8.0, 1e-6);
}

TEST(LinearTest, LogisticOnAllZeroLabelsIsNearZeroButPositive) {
  const auto x = random_matrix(100, 2, 1);
  const std::vector<double> y(100, 0.0);
  const auto model = fit_linear(x, y, LinkFunction::kLogistic);
  for (const double p : model.predict(x)) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 0.01);
  }
}

TEST(LinearTest, SingularDesignIsSolvable) {
  Matrix x(10, 2);
  std::vector<double> y(10);
  for (std::size_t i = 0; i < 10; ++i) {
    x(i, 0) = static_cast<double>(i);
    x(i, 1) = 2.0 * static_cast<double>(i);
    y[i] = static_cast<double>(i);
  }
  const auto model = fit_linear(x, y, LinkFunction::kIdentity);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_NEAR(model.predict_one(x.row(i)), y[i], 1e-4);
  }
}

TEST(LinearTest, LogisticRecoversKnownCoefficientsAtLargeN) {
  const auto x = random_matrix(20000, 2, 33);
  std::vector<double> y(20000);
  Rng rng(34);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = rng.bernoulli(sigmoid(0.5 + 1.0 * x(i, 0) - 2.0 * x(i, 1))) ? 1.0 : 0.0;
  }
  const auto model = fit_linear(x, y, LinkFunction::kLogistic);
  EXPECT_NEAR(model.intercept, 0.5, 0.08);
  EXPECT_NEAR(model.weights[0], 1.0, 0.08);
  EXPECT_NEAR(model.weights[1], -2.0, 0.1);
}

TEST(GridSearchTest, SinglePointIsReturned) {
  const auto x = random_matrix(60, 2, 2);
  std::vector<double> y(60);
  for (std::size_t i = 0; i < 60; ++i) y[i] = x(i, 0);
  HyperGrid grid;
  grid.n_trees = {7};
  grid.max_depth = {2};
  grid.learning_rate = {0.3};
  grid.min_leaf_weight = {3.0};
  const auto result = grid_search(x, y, {}, grid, round_robin(60, 3), Objective::kMse);
  EXPECT_EQ(result.best, (GbtParams{7, 2, 0.3, 3.0, 0.0}));
  EXPECT_EQ(result.scores.size(), 1u);
}

TEST(GridSearchTest, DominantPointWinsAndTiesGoFirst) {
  const auto plan = round_robin(30, 3);
  HyperGrid grid;
  grid.n_trees = {10, 20};
  grid.max_depth = {1};
  grid.learning_rate = {0.1};
  grid.min_leaf_weight = {1.0};
  const auto dominant = grid_search_staged(
      grid, plan,
      [](const GbtParams&, std::span<const int> counts,
         const std::vector<std::size_t>&, const std::vector<std::size_t>&) {
        std::vector<double> out;
        for (const int c : counts) out.push_back(c == 20 ? 1.0 : 2.0);
        return out;
      });
  EXPECT_EQ(dominant.best.n_trees, 20);
  const auto tied = grid_search_staged(
      grid, plan,
      [](const GbtParams&, std::span<const int> counts,
         const std::vector<std::size_t>&, const std::vector<std::size_t>&) {
        return std::vector<double>(counts.size(), 1.0);
      });
  EXPECT_EQ(tied.best.n_trees, 10);
}

TEST(GridSearchTest, NoiseLabelsSelectTheShallowModel) {
  // Labels independent of x: deeper trees only fit noise, so the held-out
  // loss prefers depth 1.
  const auto x = random_matrix(600, 5, 12);
  std::vector<double> y(600);
  Rng rng(13);
  for (auto& v : y) v = rng.normal();
  HyperGrid grid;
  grid.n_trees = {100};
  grid.max_depth = {1, 6};
  grid.learning_rate = {0.3};
  grid.min_leaf_weight = {1.0};
  const auto result = grid_search(x, y, {}, grid, round_robin(600, 4), Objective::kMse);
  EXPECT_EQ(result.best.max_depth, 1);
  EXPECT_LT(result.scores[0].mean, result.scores[1].mean);
}

TEST(GridSearchTest, DeterministicAndTolNeedsTreatment) {
  const auto x = random_matrix(200, 3, 40);
  std::vector<double> y(200), t(200);
  Rng rng(41);
  for (std::size_t i = 0; i < 200; ++i) {
    t[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    y[i] = x(i, 0) + t[i] * (1.0 + x(i, 1)) + rng.normal();
  }
  HyperGrid grid;
  grid.n_trees = {10, 30};
  grid.max_depth = {1, 2};
  grid.learning_rate = {0.1};
  const auto plan = round_robin(200, 4);
  const auto a = grid_search(x, y, std::span<const double>(t), grid, plan, Objective::kTol);
  const auto b = grid_search(x, y, std::span<const double>(t), grid, plan, Objective::kTol);
  ASSERT_EQ(a.scores.size(), b.scores.size());
  for (std::size_t i = 0; i < a.scores.size(); ++i) {
    EXPECT_EQ(a.scores[i].per_fold, b.scores[i].per_fold);
  }
  EXPECT_EQ(a.best, b.best);
  EXPECT_THROW(grid_search(x, y, {}, grid, plan, Objective::kTol), Error);
}

TEST(GridSearchTest, StagedScoresMatchIndependentFits) {
  // The prefix evaluation of one large ensemble equals fitting each tree
  // count separately.
  const auto x = random_matrix(150, 2, 50);
  std::vector<double> y(150);
  for (std::size_t i = 0; i < 150; ++i) y[i] = x(i, 0) * x(i, 1);
  const auto plan = round_robin(150, 3);
  HyperGrid grid;
  grid.n_trees = {5, 15};
  grid.max_depth = {2};
  grid.learning_rate = {0.2};
  grid.min_leaf_weight = {2.0};
  const auto result = grid_search(x, y, {}, grid, plan, Objective::kMse);
  for (std::size_t g = 0; g < 2; ++g) {
    const auto params = result.scores[g].params;
    for (int f = 0; f < 3; ++f) {
      const auto tr = plan.rows_not_in(f);
      const auto te = plan.rows_in(f);
      std::vector<double> ytr, yte;
      for (const auto r : tr) ytr.push_back(y[r]);
      for (const auto r : te) yte.push_back(y[r]);
      const auto model = fit_gbt(x.select_rows(tr), ytr, {}, GbtTask::kRegression, params);
      const double expected = mse(model.predict(x.select_rows(te)), yte);
      EXPECT_NEAR(result.scores[g].per_fold[f], expected, 1e-12);
    }
  }
}

}  // namespace
}  // namespace rdtarget
