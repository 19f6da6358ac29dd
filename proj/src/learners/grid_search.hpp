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

#ifndef RDTARGET_LEARNERS_GRID_SEARCH_HPP_
#define RDTARGET_LEARNERS_GRID_SEARCH_HPP_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common/matrix.hpp"
#include "data_model.hpp"
#include "learners/gbt.hpp"

namespace rdtarget {

struct HyperGrid {
  std::vector<int> n_trees = {50, 100, 200};
  std::vector<int> max_depth = {2, 3, 4};
  std::vector<double> learning_rate = {0.05, 0.1};
  std::vector<double> min_leaf_weight = {10.0};

  std::size_t size() const;
  void validate() const;
  // All points ordered by (n_trees, max_depth, learning_rate,
  // min_leaf_weight), each ascending.
  std::vector<GbtParams> points() const;
};

enum class Objective { kTol, kLogLoss, kMse };

std::string to_string(Objective objective);

struct GridPointScore {
  GbtParams params;
  std::vector<double> per_fold;
  double mean = 0.0;
};

struct GridSearchResult {
  GbtParams best;
  std::vector<GridPointScore> scores;  // in HyperGrid::points() order
};

// Fits one model per (fold, depth, learning rate, leaf weight) with the
// largest tree count in `params.n_trees` and returns the held-out objective
// for every requested tree-count prefix, in the order of `tree_counts`.
using StagedEvaluator = std::function<std::vector<double>(
    const GbtParams& params, std::span<const int> tree_counts,
    const std::vector<std::size_t>& train_rows,
    const std::vector<std::size_t>& test_rows)>;

// Returns the argmin of the fold-mean objective. Ties go to the point that
// comes first in HyperGrid::points(). NaN objectives never win.
GridSearchResult grid_search_staged(const HyperGrid& grid,
                                    const FoldPlan& folds,
                                    const StagedEvaluator& evaluate);

struct GridSearchOptions {
  std::optional<std::span<const double>> weights;
  // Outcome used to build the transformed outcome for kTol. Defaults to y.
  std::optional<std::span<const double>> tol_outcome;
  double propensity = 0.5;
};

// Tunes a single GBT on (x, y). kLogLoss fits classifiers, kMse and kTol fit
// regressors; kTol scores predictions against the transformed outcome and
// requires the treatment column t. Weights enter both fit and kMse scoring.
GridSearchResult grid_search(const Matrix& x, std::span<const double> y,
                             std::optional<std::span<const double>> t,
                             const HyperGrid& grid, const FoldPlan& folds,
                             Objective objective,
                             const GridSearchOptions& options = {});

}  // namespace rdtarget

#endif  // RDTARGET_LEARNERS_GRID_SEARCH_HPP_
