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

// Monte Carlo ground truth: baseline purchase behaviour learned by nuisance
// boosters, nonlinear simulated treatment effects, randomized assignment and
// realized outcomes.

#ifndef RDTARGET_SIMULATION_HPP_
#define RDTARGET_SIMULATION_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "common/matrix.hpp"
#include "data_model.hpp"
#include "learners/gbt.hpp"

namespace rdtarget {

// Weights of the one-hidden-layer effect generator:
//   raw(x) = sigmoid(x^T W1) . W2,  W1 is k x hidden (row-major), W2 hidden.
struct EffectWeights {
  std::size_t k = 0;
  std::size_t hidden = 0;
  std::vector<double> conversion_w1;
  std::vector<double> conversion_w2;
  std::vector<double> value_w1;
  std::vector<double> value_w2;
};

EffectWeights draw_effect_weights(std::size_t k, std::size_t hidden,
                                  std::uint64_t seed);

// Raw generator scores for every row of x_tau (before centering).
std::vector<double> raw_effect_scores(const Matrix& x_tau,
                                      const std::vector<double>& w1,
                                      const std::vector<double>& w2,
                                      std::size_t hidden);

struct SimConfig {
  std::uint64_t seed = 1;
  double ate_conversion = 0.05;
  double ate_value = 1.0;
  double tau_c_min = -0.10;
  double tau_c_max = 0.15;
  double tau_v_min = -10.0;
  double tau_v_max = 10.0;
  // Share of simulated effects that must fall inside the truncation range
  // before clipping.
  double mass_inside = 0.90;
  double propensity = 0.5;
  double value_floor = 1.0;
  std::size_t hidden = kEffectCovariates;
  // Calibration targets of the generator's untreated purchase behaviour.
  double base_conversion = 0.07;
  double value_median = 73.0;
  double value_q05 = 11.59;
  double value_q95 = 210.0;
  GbtParams nuisance{300, 6, 0.1, 5.0, 0.0};

  void validate() const;
};

struct IteDraw {
  std::vector<double> tau_c;
  std::vector<double> tau_v;
  std::vector<std::string> warnings;
};

// Centers each raw score vector, scales it so that 1.645 standard deviations
// fit the distance from the ATE to the nearer truncation bound (shrinking
// further until `mass_inside` of the values lie inside the range), adds the
// ATE and clips to the range.
IteDraw simulate_ite(const Matrix& x_tau, const EffectWeights& weights,
                     const SimConfig& cfg);

// Potential outcomes per customer, aligned with the dataset rows.
struct GroundTruth {
  std::vector<std::int64_t> ids;
  std::vector<double> p0, p1, v0, v1, tau_c, tau_v, tau;

  std::size_t size() const { return ids.size(); }
  // Row of `id`; throws a data error when absent.
  std::size_t row_of(std::int64_t id) const;
  GroundTruth subset(std::span<const std::size_t> rows) const;
  void rebuild_index();

 private:
  std::unordered_map<std::int64_t, std::size_t> index_;
};

// Exact (shortest round-trip) number formatting so that the truth identity
// survives the file round trip.
std::string truth_to_csv(const GroundTruth& truth);
GroundTruth parse_truth_csv(std::string_view text, const std::string& source);
void write_truth_csv(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth load_truth_csv(const std::filesystem::path& path);

// Untreated purchase behaviour defined by the generator: a logistic
// conversion model calibrated to cfg.base_conversion and a skewed value law
// with the configured median and 5%/95% quantiles. Returns t = 0 records.
Dataset generate_base_outcomes(const CovariateTable& covariates,
                               const SimConfig& cfg, std::uint64_t seed);

struct NuisanceModels {
  GbtModel p_model;  // classification on all rows
  GbtModel v_model;  // regression on converters
};

NuisanceModels fit_nuisance(const Dataset& base, const GbtParams& params);

struct Campaign {
  Dataset data;
  GroundTruth truth;
};

Campaign generate_campaign(const CovariateTable& covariates,
                           const NuisanceModels& nuisance, const IteDraw& ite,
                           const SimConfig& cfg, std::uint64_t seed);

// Standardizes each column to mean 0 and unit variance; constant columns
// become zero.
Matrix standardize_columns(const Matrix& x);

struct SimulationRun {
  Dataset base;
  Campaign campaign;
  std::vector<std::string> warnings;
};

// The full pipeline for one seed; a pure function of (n, p, cfg).
SimulationRun simulate(std::size_t n, std::size_t p, const SimConfig& cfg);

}  // namespace rdtarget

#endif  // RDTARGET_SIMULATION_HPP_
