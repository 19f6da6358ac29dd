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

// Treatment-effect estimators: causal hurdle models (one booster per stage,
// or one per stage and arm), single- and two-model learners on the profit
// outcome, the doubly-robust transformation learner, and the ATE and oracle
// reference models.

#ifndef RDTARGET_CAUSAL_HPP_
#define RDTARGET_CAUSAL_HPP_

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "common/matrix.hpp"
#include "data_model.hpp"
#include "learners/gbt.hpp"
#include "learners/linear.hpp"
#include "simulation.hpp"

namespace rdtarget {

enum class Architecture {
  kHurdleSingle,
  kHurdleTwo,
  kOnestageSingle,
  kOnestageTwo,
  kOnestageDr,
  kAte,
  kOracle,
};

std::string to_string(Architecture arch);
// Accepts the names printed by to_string; "ate-constant" is an alias of "ate".
Architecture parse_architecture(const std::string& name);
// Fitted (non-reference) architectures in roster order.
const std::vector<Architecture>& fitted_architectures();
bool has_value_scorer(Architecture arch);

// Component names used for per-component hyperparameters.
namespace component {
inline constexpr const char* kConversionXt = "conversion_xt";
inline constexpr const char* kValueXt = "value_xt";
inline constexpr const char* kConversionT0 = "conversion_t0";
inline constexpr const char* kConversionT1 = "conversion_t1";
inline constexpr const char* kValueT0 = "value_t0";
inline constexpr const char* kValueT1 = "value_t1";
inline constexpr const char* kOutcomeXt = "outcome_xt";
inline constexpr const char* kOutcomeArms = "outcome_arms";
inline constexpr const char* kDrEffect = "dr_effect";
}  // namespace component

// Booster settings per component; components without an entry use `fallback`.
struct ComponentParams {
  GbtParams fallback;
  std::map<std::string, GbtParams> by_component;

  const GbtParams& get(const std::string& name) const;
};

struct CausalOptions {
  // Floor on the conversion probability inside inverse-probability weights.
  double w_clip = 0.02;
  // Floor applied to every value scorer.
  double value_floor = 0.01;
  // Clip of the estimated propensity in the DR transform.
  double propensity_clip = 0.01;
  // Use `assignment_propensity` instead of a fitted logistic propensity.
  bool known_propensity = false;
  // Randomization probability of the campaign; used by the transformed
  // outcome during tuning and by the empirical policy.
  double assignment_propensity = 0.5;
};

struct HurdleSingleModel {
  GbtModel conversion;  // on [x, t]
  GbtModel value;       // on [x, t], converters, IPW-weighted
};

struct HurdleTwoModel {
  GbtModel conversion0, conversion1;
  GbtModel value0, value1;
};

struct OnestageSingleModel {
  GbtModel outcome;  // on [x, t]
  GbtModel conversion;
};

struct OnestageTwoModel {
  GbtModel outcome0, outcome1;
  GbtModel conversion;
};

struct DrModel {
  LinearModel mu0, mu1;
  std::optional<LinearModel> propensity;  // absent when known
  double known_propensity = 0.5;
  GbtModel effect;
  GbtModel conversion;
};

struct AteModel {
  double tau = 0.0;
  double conversion_rate = 0.0;
  // Mean purchase value of treated converters; lets the constant model
  // price percentage discounts.
  double value = 0.0;
};

struct OracleModel {
  struct Entry {
    double tau, p1, v1;
  };
  std::unordered_map<std::int64_t, Entry> by_id;
};

// Per-row model output.
struct Scores {
  std::vector<double> tau;
  std::vector<double> p1;
  std::optional<std::vector<double>> v1;
};

class TargetingModel {
 public:
  using Body = std::variant<HurdleSingleModel, HurdleTwoModel,
                            OnestageSingleModel, OnestageTwoModel, DrModel,
                            AteModel, OracleModel>;

  TargetingModel() = default;
  TargetingModel(Architecture arch, Body body, double value_floor)
      : arch_(arch), body_(std::move(body)), value_floor_(value_floor) {}

  Architecture architecture() const { return arch_; }
  const Body& body() const { return body_; }
  double value_floor() const { return value_floor_; }
  bool has_value_scorer() const { return rdtarget::has_value_scorer(arch_); }
  // Number of fitted component models (the doubly-robust model counts its
  // outcome, propensity, effect and conversion models).
  int component_count() const;

  // `ids` is only consulted by the oracle model.
  Scores score(std::span<const std::int64_t> ids, const Matrix& x) const;
  Scores score(const Dataset& data) const;

  void write(std::ostream& out) const;
  static TargetingModel read(std::istream& in);

 private:
  Architecture arch_ = Architecture::kAte;
  Body body_ = AteModel{};
  double value_floor_ = 0.01;
};

// [x, t] with a constant treatment column.
Matrix with_treatment(const Matrix& x, double t);
// Inverse-probability weights 1 / max(p, w_clip).
std::vector<double> ipw_weights(std::span<const double> p, double w_clip);

TargetingModel fit_hurdle_single(const Dataset& train,
                                 const ComponentParams& params,
                                 const CausalOptions& options);
TargetingModel fit_hurdle_two(const Dataset& train,
                              const ComponentParams& params,
                              const CausalOptions& options);
// Classifier of conversion on the treated rows.
GbtModel fit_conversion_separate(const Dataset& train, const GbtParams& params);
// The one-stage fits reuse `conversion` when given, else fit their own.
TargetingModel fit_onestage_single(const Dataset& train,
                                   const ComponentParams& params,
                                   const CausalOptions& options,
                                   const GbtModel* conversion = nullptr);
TargetingModel fit_onestage_two(const Dataset& train,
                                const ComponentParams& params,
                                const CausalOptions& options,
                                const GbtModel* conversion = nullptr);
TargetingModel fit_onestage_dr(const Dataset& train,
                               const ComponentParams& params,
                               const CausalOptions& options,
                               const GbtModel* conversion = nullptr);
TargetingModel make_ate_model(const Dataset& train);
TargetingModel make_oracle_model(const GroundTruth& truth);

struct DrTransform {
  std::vector<double> y_dr;
  LinearModel mu0, mu1;
  std::optional<LinearModel> propensity;
  std::vector<double> e_hat;  // clipped propensity per row
};

// Y_DR = mu1 - mu0 + t (y - mu1) / e - (1 - t)(y - mu0) / (1 - e).
double dr_pseudo_outcome(double y, double t, double mu0, double mu1, double e);
DrTransform build_dr_transform(const Dataset& train,
                               const CausalOptions& options);

// Dispatches on the architecture. `truth` is required for the oracle.
TargetingModel fit_architecture(Architecture arch, const Dataset& train,
                                const ComponentParams& params,
                                const CausalOptions& options,
                                const GbtModel* conversion = nullptr,
                                const GroundTruth* truth = nullptr);

}  // namespace rdtarget

#endif  // RDTARGET_CAUSAL_HPP_
