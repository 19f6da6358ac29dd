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

// Scalar losses and scores shared by tuning and reporting. Undefined values
// are returned as quiet NaN.

#ifndef RDTARGET_METRICS_HPP_
#define RDTARGET_METRICS_HPP_

#include <optional>
#include <span>
#include <vector>

namespace rdtarget {

// Weighted mean squared error; unweighted when `weights` is empty.
double mse(std::span<const double> pred, std::span<const double> y,
           std::optional<std::span<const double>> weights = {});

// Mean binary cross-entropy with probabilities clipped to [1e-15, 1 - 1e-15].
double log_loss(std::span<const double> prob, std::span<const double> y,
                std::optional<std::span<const double>> weights = {});

// Y* = t*y/e - (1-t)*y/(1-e); its conditional mean is the CATE under
// randomization with assignment probability e.
double transformed_outcome(double y, double t, double e);

// Mean squared difference between Y* and tau_hat.
double tol(std::span<const double> tau_hat, std::span<const double> y,
           std::span<const double> t, double e);

double rmse(std::span<const double> a, std::span<const double> b);

double brier(std::span<const double> prob, std::span<const double> c);

// Mann-Whitney form; ties count one half. NaN when c has a single class.
double roc_auc(std::span<const double> score, std::span<const double> c);

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks. NaN when either input is constant.
double spearman(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> values);

}  // namespace rdtarget

#endif  // RDTARGET_METRICS_HPP_
