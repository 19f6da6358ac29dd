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

// Gradient-boosted regression trees with second-order leaf values and exact
// split search over presorted feature columns.

#ifndef RDTARGET_LEARNERS_GBT_HPP_
#define RDTARGET_LEARNERS_GBT_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common/matrix.hpp"

namespace rdtarget {

enum class GbtTask { kRegression, kClassification };

std::string to_string(GbtTask task);

struct GbtParams {
  int n_trees = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  // Minimum hessian sum per child. Equals a row count for unit-weight
  // regression; instance weights are rescaled to mean one before fitting.
  double min_leaf_weight = 10.0;
  double l2 = 0.0;

  bool operator==(const GbtParams&) const = default;
};

std::string describe(const GbtParams& params);

// Flat node: feature < 0 marks a leaf. Rows with x[feature] < threshold go
// left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double eval(std::span<const double> x) const;
  int depth() const;
};

class GbtModel {
 public:
  GbtModel() = default;

  GbtTask task() const { return task_; }
  const GbtParams& params() const { return params_; }
  double base_score() const { return base_score_; }
  std::size_t n_features() const { return n_features_; }
  const std::vector<Tree>& trees() const { return trees_; }
  // Weighted mean training loss after each round; entry 0 is the base score.
  const std::vector<double>& train_loss() const { return train_loss_; }

  // Raw additive score using at most `max_trees` trees (all when negative).
  double margin(std::span<const double> x, int max_trees = -1) const;
  std::vector<double> predict_margin(const Matrix& x, int max_trees = -1) const;
  // Regression values or class-1 probabilities in (0, 1).
  std::vector<double> predict(const Matrix& x, int max_trees = -1) const;
  double predict_one(std::span<const double> x, int max_trees = -1) const;

  // Line-oriented text; see gbt.cpp for the layout.
  void write(std::ostream& out) const;
  static GbtModel read(std::istream& in);

  // Builds a model directly; used by tests that trace trees by hand.
  static GbtModel from_parts(GbtTask task, GbtParams params, double base_score,
                             std::size_t n_features, std::vector<Tree> trees);

 private:
  friend GbtModel fit_gbt(const Matrix&, std::span<const double>,
                          std::optional<std::span<const double>>, GbtTask,
                          const GbtParams&);

  GbtTask task_ = GbtTask::kRegression;
  GbtParams params_;
  double base_score_ = 0.0;
  std::size_t n_features_ = 0;
  std::vector<Tree> trees_;
  std::vector<double> train_loss_;
};

// Stagewise fit of weighted squared loss (regression) or weighted log loss
// (classification, y in {0,1}). Zero weights drop rows from the fit.
GbtModel fit_gbt(const Matrix& x, std::span<const double> y,
                 std::optional<std::span<const double>> weights, GbtTask task,
                 const GbtParams& params);

double sigmoid(double margin);

}  // namespace rdtarget

#endif  // RDTARGET_LEARNERS_GBT_HPP_
