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

#include "causal_tuning.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "common/random.hpp"
#include "metrics.hpp"

namespace rdtarget {
namespace {

const std::vector<std::string>& tuning_order() {
  static const std::vector<std::string> kOrder = {
      component::kConversionXt, component::kConversionT0,
      component::kConversionT1, component::kValueXt,
      component::kValueT0,      component::kValueT1,
      component::kOutcomeXt,    component::kOutcomeArms,
      component::kDrEffect};
  return kOrder;
}

std::vector<std::string> needs(Architecture arch) {
  switch (arch) {
    case Architecture::kHurdleSingle:
      return {component::kConversionXt, component::kValueXt};
    case Architecture::kHurdleTwo:
      return {component::kConversionT0, component::kConversionT1,
              component::kValueT0, component::kValueT1};
    case Architecture::kOnestageSingle:
      return {component::kOutcomeXt, component::kConversionT1};
    case Architecture::kOnestageTwo:
      return {component::kOutcomeArms, component::kConversionT1};
    case Architecture::kOnestageDr:
      return {component::kDrEffect, component::kConversionT1};
    case Architecture::kAte:
    case Architecture::kOracle:
      return {};
  }
  return {};
}

std::vector<double> gather(std::span<const double> values,
                           std::span<const std::size_t> rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto r : rows) out.push_back(values[r]);
  return out;
}

std::vector<std::size_t> rows_where(const Dataset& data, int t, bool converters) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if ((t < 0 || data[i].t == t) && (!converters || data[i].c == 1)) {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> components_for(std::span<const Architecture> roster) {
  std::vector<std::string> wanted;
  for (const auto arch : roster) {
    for (auto& name : needs(arch)) wanted.push_back(std::move(name));
  }
  std::vector<std::string> out;
  for (const auto& name : tuning_order()) {
    if (std::find(wanted.begin(), wanted.end(), name) != wanted.end()) {
      out.push_back(name);
    }
  }
  return out;
}

FoldPlan restrict_folds(const FoldPlan& plan, std::span<const std::size_t> rows) {
  FoldPlan out;
  out.k = plan.k;
  out.seed = plan.seed;
  out.ids.reserve(rows.size());
  out.fold.reserve(rows.size());
  for (const auto r : rows) {
    out.ids.push_back(plan.ids.at(r));
    out.fold.push_back(plan.fold.at(r));
  }
  return out;
}

TuningResult tune_components(const Dataset& train,
                             std::span<const std::string> components,
                             const HyperGrid& grid, int inner_folds,
                             std::uint64_t seed, const CausalOptions& options,
                             const GbtParams& fallback) {
  TuningResult result;
  result.params.fallback = fallback;
  if (components.empty()) return result;
  for (const auto& name : components) {
    if (std::find(tuning_order().begin(), tuning_order().end(), name) ==
        tuning_order().end()) {
      throw invalid_argument("unknown component '" + name + "'");
    }
  }

  const FoldPlan plan = make_folds(train, inner_folds, derive_seed(seed, "inner_folds"));
  const Matrix x = train.covariates();
  const Matrix xt = x.with_column(train.treatments());
  const auto y = train.outcomes();
  const auto t = train.treatments();
  const auto c = train.conversions();
  const auto v = train.values();
  const double e = options.assignment_propensity;

  auto has = [&](const char* name) {
    return std::find(components.begin(), components.end(), name) !=
           components.end();
  };
  auto record = [&](const char* name, GridSearchResult r) {
    result.params.by_component[name] = r.best;
    result.detail.emplace_back(name, std::move(r));
  };

  // Classifiers first: the value components weight by their predictions.
  if (has(component::kConversionXt)) {
    record(component::kConversionXt,
           grid_search(xt, c, std::nullopt, grid, plan, Objective::kLogLoss));
  }
  for (const int arm : {0, 1}) {
    const char* name = arm == 0 ? component::kConversionT0 : component::kConversionT1;
    if (!has(name)) continue;
    const auto rows = rows_where(train, arm, false);
    record(name, grid_search(x.select_rows(rows), gather(c, rows), std::nullopt,
                             grid, restrict_folds(plan, rows),
                             Objective::kLogLoss));
  }

  if (has(component::kValueXt)) {
    const auto rows = rows_where(train, -1, true);
    if (rows.empty()) throw data_error("tuning: no converters");
    const auto conversion =
        fit_gbt(xt, c, std::nullopt, GbtTask::kClassification,
                result.params.get(component::kConversionXt));
    const Matrix x_conv = xt.select_rows(rows);
    const auto w = ipw_weights(conversion.predict(x_conv), options.w_clip);
    GridSearchOptions gso;
    gso.weights = std::span<const double>(w);
    record(component::kValueXt,
           grid_search(x_conv, gather(v, rows), std::nullopt, grid,
                       restrict_folds(plan, rows), Objective::kMse, gso));
  }
  for (const int arm : {0, 1}) {
    const char* name = arm == 0 ? component::kValueT0 : component::kValueT1;
    if (!has(name)) continue;
    const char* conv_name =
        arm == 0 ? component::kConversionT0 : component::kConversionT1;
    const auto arm_rows = rows_where(train, arm, false);
    const auto rows = rows_where(train, arm, true);
    if (rows.empty()) throw data_error("tuning: an arm has no converters");
    const auto conversion = fit_gbt(x.select_rows(arm_rows), gather(c, arm_rows),
                                    std::nullopt, GbtTask::kClassification,
                                    result.params.get(conv_name));
    const Matrix x_conv = x.select_rows(rows);
    const auto w = ipw_weights(conversion.predict(x_conv), options.w_clip);
    GridSearchOptions gso;
    gso.weights = std::span<const double>(w);
    record(name, grid_search(x_conv, gather(v, rows), std::nullopt, grid,
                             restrict_folds(plan, rows), Objective::kMse, gso));
  }

  if (has(component::kOutcomeXt)) {
    auto evaluate = [&](const GbtParams& params, std::span<const int> counts,
                        const std::vector<std::size_t>& tr,
                        const std::vector<std::size_t>& te) {
      const auto model = fit_gbt(xt.select_rows(tr), gather(y, tr), std::nullopt,
                                 GbtTask::kRegression, params);
      const Matrix x_te = x.select_rows(te);
      const Matrix x1 = with_treatment(x_te, 1.0);
      const Matrix x0 = with_treatment(x_te, 0.0);
      const auto y_te = gather(y, te);
      const auto t_te = gather(t, te);
      std::vector<double> out;
      for (const int count : counts) {
        const auto y1 = model.predict(x1, count);
        const auto y0 = model.predict(x0, count);
        std::vector<double> tau(te.size());
        for (std::size_t i = 0; i < te.size(); ++i) tau[i] = y1[i] - y0[i];
        out.push_back(tol(tau, y_te, t_te, e));
      }
      return out;
    };
    record(component::kOutcomeXt, grid_search_staged(grid, plan, evaluate));
  }

  if (has(component::kOutcomeArms)) {
    auto evaluate = [&](const GbtParams& params, std::span<const int> counts,
                        const std::vector<std::size_t>& tr,
                        const std::vector<std::size_t>& te) {
      std::vector<std::size_t> tr0, tr1;
      for (const auto r : tr) (train[r].t == 1 ? tr1 : tr0).push_back(r);
      if (tr0.empty() || tr1.empty()) {
        throw data_error("tuning: an inner fold lacks one arm");
      }
      const auto m0 = fit_gbt(x.select_rows(tr0), gather(y, tr0), std::nullopt,
                              GbtTask::kRegression, params);
      const auto m1 = fit_gbt(x.select_rows(tr1), gather(y, tr1), std::nullopt,
                              GbtTask::kRegression, params);
      const Matrix x_te = x.select_rows(te);
      const auto y_te = gather(y, te);
      const auto t_te = gather(t, te);
      std::vector<double> out;
      for (const int count : counts) {
        const auto y1 = m1.predict(x_te, count);
        const auto y0 = m0.predict(x_te, count);
        std::vector<double> tau(te.size());
        for (std::size_t i = 0; i < te.size(); ++i) tau[i] = y1[i] - y0[i];
        out.push_back(tol(tau, y_te, t_te, e));
      }
      return out;
    };
    record(component::kOutcomeArms, grid_search_staged(grid, plan, evaluate));
  }

  if (has(component::kDrEffect)) {
    const auto transform = build_dr_transform(train, options);
    GridSearchOptions gso;
    gso.tol_outcome = std::span<const double>(y);
    gso.propensity = e;
    record(component::kDrEffect,
           grid_search(x, transform.y_dr, std::span<const double>(t), grid, plan,
                       Objective::kTol, gso));
  }
  return result;
}

}  // namespace rdtarget
