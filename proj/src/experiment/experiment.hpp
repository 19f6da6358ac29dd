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

// The simulation experiment. Per seed: simulate a campaign, split it into
// outer folds, fit every estimator on each training split and score the held
// out customers, then evaluate the policies on the pooled out-of-fold scores.
//
//   stage a   ATE or oracle effects, costed with the treated conversion rate
//             or with a fitted conversion model
//   stage b   every effect estimator, costed with the treated conversion rate
//   stage c   every fitted estimator with its own conversion model
//             (analytical rule) against a threshold tuned on training
//             profit (empirical rule)
//
// Output layout under the run directory:
//   config.txt
//   seed_<s>/stage_<x>/{report.csv,preds.csv,manifest.txt}
//   summary/stage_<x>/{report.csv,manifest.txt}

#ifndef RDTARGET_EXPERIMENT_EXPERIMENT_HPP_
#define RDTARGET_EXPERIMENT_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "experiment/config.hpp"

namespace rdtarget {

inline constexpr const char* kVersion = "1.0.0";

struct StageReport {
  std::string stage;  // "a", "b" or "c"
  CampaignReport report;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<StageReport> stages;
  std::vector<std::string> warnings;
};

struct ExperimentResult {
  std::vector<SeedResult> seeds;
  std::vector<StageReport> summary;  // means over seeds
};

// Runs one seed. Writes seed_<s>/ under `out_dir` unless it is empty.
SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                    const std::filesystem::path& out_dir, std::ostream* log);

// Runs every configured seed and writes the summary. Failures are rethrown
// with the seed and stage prefixed to the message.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir,
                                std::ostream* log = nullptr);

// Row-wise means over seeds of the rows present in every report; a NaN in
// any seed gives NaN.
CampaignReport summarize(const std::vector<CampaignReport>& per_seed);

// `scope` is "seed <s>" or "summary"; `stage` may be empty.
std::string manifest_text(const ExperimentConfig& cfg, const std::string& scope,
                          const std::string& stage);

// Writes seed_<s>/{customers.csv,truth.csv,manifest.txt} per seed.
void simulate_to_dir(const ExperimentConfig& cfg,
                     std::span<const std::uint64_t> seeds,
                     const std::filesystem::path& out_dir);

// Fits one architecture on `data` with the configured tuning (per-fold and
// once both tune on the whole of `data`). `truth` is needed for the oracle.
TargetingModel fit_model(const ExperimentConfig& cfg, const Dataset& data,
                         Architecture arch, std::uint64_t seed,
                         const GroundTruth* truth);

// Baseline and analytical rows of `model` on `data`, scored against `truth`.
CampaignReport evaluate_model(const TargetingModel& model, const Dataset& data,
                              const GroundTruth& truth, const CostSpec& cost,
                              double propensity);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace rdtarget

#endif  // RDTARGET_EXPERIMENT_EXPERIMENT_HPP_
