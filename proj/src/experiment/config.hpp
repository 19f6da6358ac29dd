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

// Experiment configuration: a flat "key = value" file. Every key has a
// default; `#` starts a comment. The canonical text lists every key in a
// fixed order and is what the run manifest hashes.

#ifndef RDTARGET_EXPERIMENT_CONFIG_HPP_
#define RDTARGET_EXPERIMENT_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "causal.hpp"
#include "learners/grid_search.hpp"
#include "policy.hpp"
#include "simulation.hpp"

namespace rdtarget {

// per-fold: inner grid search inside every outer training split.
// once: one inner grid search per seed on the full simulated dataset.
// none: every component uses `default.*`.
enum class TuningMode { kPerFold, kOnce, kNone };

std::string to_string(TuningMode mode);

struct ExperimentConfig {
  std::size_t n = 20000;
  std::size_t p = 30;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  int outer_folds = 5;
  int inner_folds = 10;
  TuningMode tuning = TuningMode::kOnce;
  std::vector<Architecture> roster = fitted_architectures();
  std::vector<std::string> policies = {"baseline", "analytical", "empirical"};
  std::vector<std::string> stages = {"a", "b", "c"};
  bool write_preds = true;
  CostSpec cost;
  HyperGrid grid;
  GbtParams default_params;
  CausalOptions causal;
  SimConfig sim;

  void validate() const;
  bool has_policy(const std::string& name) const;
  bool has_stage(const std::string& name) const;
  bool in_roster(Architecture arch) const;
  // Copy of `sim` with the seed set; the DR and tuning propensity follow
  // sim.propensity.
  SimConfig sim_for(std::uint64_t seed) const;
  CausalOptions causal_options() const;
};

// Sets one key from its text value; throws a config error on unknown keys
// or malformed values.
void set_config_value(ExperimentConfig& cfg, std::string_view key,
                      std::string_view value);
std::string get_config_value(const ExperimentConfig& cfg, std::string_view key);
const std::vector<std::string>& config_keys();

ExperimentConfig parse_config(std::string_view text, const std::string& source);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string canonical_config(const ExperimentConfig& cfg);
// FNV-1a 64 of the canonical text.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t hash);

}  // namespace rdtarget

#endif  // RDTARGET_EXPERIMENT_CONFIG_HPP_
