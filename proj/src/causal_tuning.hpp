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

// Inner cross-validated grid search for every component model of the
// estimator roster.
//
//   classifiers          log loss
//   value models         IPW-weighted squared error on converters
//   outcome models       transformed outcome loss of the differenced effect
//   DR effect model      transformed outcome loss against the profit outcome

#ifndef RDTARGET_CAUSAL_TUNING_HPP_
#define RDTARGET_CAUSAL_TUNING_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "causal.hpp"
#include "learners/grid_search.hpp"

namespace rdtarget {

// Components used by the given architectures, in tuning order. The shared
// separate conversion model of the one-stage learners is conversion_t1.
std::vector<std::string> components_for(std::span<const Architecture> roster);

// Restricts a fold plan to a subset of its rows, keeping fold labels.
FoldPlan restrict_folds(const FoldPlan& plan, std::span<const std::size_t> rows);

struct TuningResult {
  ComponentParams params;
  // Grid-search detail per tuned component, in tuning order.
  std::vector<std::pair<std::string, GridSearchResult>> detail;
};

// Tunes each named component on `train` with a stratified inner fold plan
// drawn from `seed`. Components not named keep `fallback`.
TuningResult tune_components(const Dataset& train,
                             std::span<const std::string> components,
                             const HyperGrid& grid, int inner_folds,
                             std::uint64_t seed, const CausalOptions& options,
                             const GbtParams& fallback);

}  // namespace rdtarget

#endif  // RDTARGET_CAUSAL_TUNING_HPP_
