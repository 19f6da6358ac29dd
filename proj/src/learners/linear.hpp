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

#ifndef RDTARGET_LEARNERS_LINEAR_HPP_
#define RDTARGET_LEARNERS_LINEAR_HPP_

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "common/matrix.hpp"

namespace rdtarget {

enum class LinkFunction { kIdentity, kLogistic };

// Ridge added to the normal equations so every design is solvable.
inline constexpr double kLinearRidge = 1e-6;

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;
  LinkFunction link = LinkFunction::kIdentity;

  double predict_one(std::span<const double> x) const;
  std::vector<double> predict(const Matrix& x) const;

  void write(std::ostream& out) const;
  static LinearModel read(std::istream& in);
};

// Least squares (identity link) or ridge-penalized maximum likelihood by
// iteratively reweighted least squares (logistic link). Features are
// standardized internally; coefficients are reported on the original scale.
LinearModel fit_linear(const Matrix& x, std::span<const double> y,
                       LinkFunction link,
                       std::optional<std::span<const double>> weights = {});

}  // namespace rdtarget

#endif  // RDTARGET_LEARNERS_LINEAR_HPP_
