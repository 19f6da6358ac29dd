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

#include "learners/grid_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"
#include "metrics.hpp"

namespace rdtarget {
namespace {

template <typename T>
std::vector<T> sorted_unique(std::vector<T> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

std::vector<double> gather(std::span<const double> values,
                           const std::vector<std::size_t>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto r : rows) out.push_back(values[r]);
  return out;
}

}  // namespace

std::size_t HyperGrid::size() const {
  return n_trees.size() * max_depth.size() * learning_rate.size() *
         min_leaf_weight.size();
}

void HyperGrid::validate() const {
  if (size() == 0) throw config_error("hyperparameter grid is empty");
  for (const int v : n_trees) {
    if (v < 0) throw config_error("grid n_trees must be >= 0");
  }
  for (const int v : max_depth) {
    if (v < 1) throw config_error("grid max_depth must be >= 1");
  }
  for (const double v : learning_rate) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw config_error("grid learning_rate must lie in (0, 1]");
    }
  }
  for (const double v : min_leaf_weight) {
    if (!(v >= 0.0)) throw config_error("grid min_leaf_weight must be >= 0");
  }
}

std::vector<GbtParams> HyperGrid::points() const {
  std::vector<GbtParams> out;
  for (const int trees : sorted_unique(n_trees)) {
    for (const int depth : sorted_unique(max_depth)) {
      for (const double lr : sorted_unique(learning_rate)) {
        for (const double leaf : sorted_unique(min_leaf_weight)) {
          GbtParams p;
          p.n_trees = trees;
          p.max_depth = depth;
          p.learning_rate = lr;
          p.min_leaf_weight = leaf;
          out.push_back(p);
        }
      }
    }
  }
  return out;
}

std::string to_string(Objective objective) {
  switch (objective) {
    case Objective::kTol:
      return "tol";
    case Objective::kLogLoss:
      return "logloss";
    case Objective::kMse:
      return "mse";
  }
  return "unknown";
}

GridSearchResult grid_search_staged(const HyperGrid& grid,
                                    const FoldPlan& folds,
                                    const StagedEvaluator& evaluate) {
  grid.validate();
  if (folds.k < 2) throw invalid_argument("grid search needs >= 2 folds");
  const auto points = grid.points();
  const auto tree_counts = sorted_unique(grid.n_trees);
  const int max_trees = tree_counts.back();

  GridSearchResult result;
  result.scores.reserve(points.size());
  for (const auto& p : points) {
    result.scores.push_back({p, std::vector<double>(folds.k, 0.0), 0.0});
  }
  auto index_of = [&](const GbtParams& p) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i] == p) return i;
    }
    throw invalid_argument("grid point not found");
  };

  for (int f = 0; f < folds.k; ++f) {
    const auto train = folds.rows_not_in(f);
    const auto test = folds.rows_in(f);
    if (train.empty() || test.empty()) {
      throw invalid_argument("grid search: fold " + std::to_string(f) +
                             " leaves an empty split");
    }
    for (const int depth : sorted_unique(grid.max_depth)) {
      for (const double lr : sorted_unique(grid.learning_rate)) {
        for (const double leaf : sorted_unique(grid.min_leaf_weight)) {
          GbtParams p;
          p.n_trees = max_trees;
          p.max_depth = depth;
          p.learning_rate = lr;
          p.min_leaf_weight = leaf;
          const auto values = evaluate(p, tree_counts, train, test);
          if (values.size() != tree_counts.size()) {
            throw invalid_argument("grid search: evaluator returned " +
                                   std::to_string(values.size()) +
                                   " objectives");
          }
          for (std::size_t k = 0; k < tree_counts.size(); ++k) {
            GbtParams point = p;
            point.n_trees = tree_counts[k];
            result.scores[index_of(point)].per_fold[f] = values[k];
          }
        }
      }
    }
  }

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < result.scores.size(); ++i) {
    auto& score = result.scores[i];
    double total = 0.0;
    for (const double v : score.per_fold) total += v;
    score.mean = total / static_cast<double>(folds.k);
    if (std::isnan(score.mean)) continue;
    if (score.mean < best) {
      best = score.mean;
      best_index = i;
    }
  }
  result.best = result.scores[best_index].params;
  return result;
}

GridSearchResult grid_search(const Matrix& x, std::span<const double> y,
                             std::optional<std::span<const double>> t,
                             const HyperGrid& grid, const FoldPlan& folds,
                             Objective objective,
                             const GridSearchOptions& options) {
  if (y.size() != x.rows() || folds.fold.size() != x.rows()) {
    throw invalid_argument("grid search: folds, x and y must be row-aligned");
  }
  if (objective == Objective::kTol) {
    if (!t) throw invalid_argument("grid search: objective tol requires t");
    if (t->size() != x.rows()) {
      throw invalid_argument("grid search: t length mismatch");
    }
  }
  const auto task = objective == Objective::kLogLoss ? GbtTask::kClassification
                                                     : GbtTask::kRegression;
  const auto tol_outcome = options.tol_outcome.value_or(y);

  auto evaluate = [&](const GbtParams& params, std::span<const int> counts,
                      const std::vector<std::size_t>& train,
                      const std::vector<std::size_t>& test) {
    const Matrix x_train = x.select_rows(train);
    const Matrix x_test = x.select_rows(test);
    const auto y_train = gather(y, train);
    const auto y_test = gather(y, test);
    std::optional<std::vector<double>> w_train;
    std::optional<std::vector<double>> w_test;
    if (options.weights) {
      w_train = gather(*options.weights, train);
      w_test = gather(*options.weights, test);
    }
    const auto model = fit_gbt(
        x_train, y_train,
        w_train ? std::optional<std::span<const double>>(*w_train) : std::nullopt,
        task, params);
    std::vector<double> out;
    for (const int count : counts) {
      const auto pred = model.predict(x_test, count);
      switch (objective) {
        case Objective::kLogLoss:
          out.push_back(log_loss(pred, y_test));
          break;
        case Objective::kMse:
          out.push_back(mse(pred, y_test,
                            w_test ? std::optional<std::span<const double>>(*w_test)
                                   : std::nullopt));
          break;
        case Objective::kTol:
          out.push_back(tol(pred, gather(tol_outcome, test), gather(*t, test),
                            options.propensity));
          break;
      }
    }
    return out;
  };
  return grid_search_staged(grid, folds, evaluate);
}

}  // namespace rdtarget
