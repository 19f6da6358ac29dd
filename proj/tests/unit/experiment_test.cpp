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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "common/error.hpp"
#include "experiment/config.hpp"
#include "experiment/experiment.hpp"
#include "test_util.hpp"

namespace rdtarget {
namespace {

namespace fs = std::filesystem;

ExperimentConfig small_config() {
  ExperimentConfig cfg = parse_config(
      "n = 800\n"
      "seeds = 3\n"
      "outer_folds = 3\n"
      "tuning = none\n"
      "default.n_trees = 20\n"
      "default.max_depth = 2\n"
      "sim.nuisance.n_trees = 30\n"
      "sim.nuisance.max_depth = 3\n",
      "small");
  return cfg;
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

TEST(ConfigTest, DefaultsAndCanonicalText) {
  const ExperimentConfig cfg;
  EXPECT_EQ(cfg.n, 20000u);
  EXPECT_EQ(cfg.outer_folds, 5);
  EXPECT_EQ(cfg.inner_folds, 10);
  EXPECT_EQ(cfg.cost.kappa, 0.0);
  EXPECT_EQ(cfg.cost.kind, ResponseCost::kFixed);
  EXPECT_EQ(cfg.cost.delta, 10.0);
  EXPECT_EQ(cfg.sim.propensity, 0.5);
  const auto text = canonical_config(cfg);
  EXPECT_EQ(count_lines(text), config_keys().size());
  const auto again = parse_config(text, "canonical");
  EXPECT_EQ(canonical_config(again), text);
  EXPECT_EQ(config_hash(again), config_hash(cfg));
}

TEST(ConfigTest, HashChangesIffConfigChanges) {
  ExperimentConfig a;
  ExperimentConfig b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  set_config_value(b, "cost.kappa", "0.5");
  EXPECT_NE(config_hash(a), config_hash(b));
  set_config_value(b, "cost.kappa", "0");
  EXPECT_EQ(config_hash(a), config_hash(b));
  for (const auto& key : config_keys()) {
    EXPECT_EQ(get_config_value(a, key), get_config_value(b, key)) << key;
  }
}

TEST(ConfigTest, ErrorsNameTheLine) {
  try {
    parse_config("n = 100\n\nbogus.key = 3\n", "cfg.txt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    EXPECT_NE(std::string(e.what()).find("cfg.txt:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("n = 10\nn = 11\n", "dup"), Error);
  EXPECT_THROW(parse_config("n\n", "noeq"), Error);
  EXPECT_THROW(parse_config("outer_folds = 1\n", "k"), Error);
  EXPECT_THROW(parse_config("cost.eta = 1.5\n", "eta"), Error);
  EXPECT_THROW(parse_config("roster = \n", "roster"), Error);
  EXPECT_THROW(parse_config("seeds = \n", "seeds"), Error);
  EXPECT_THROW(parse_config("tuning = sometimes\n", "tuning"), Error);
  const auto ok = parse_config("# comment\n  cost.kind = percentage  # trailing\ncost.eta = 0.1\n", "ok");
  EXPECT_EQ(ok.cost.kind, ResponseCost::kPercentage);
}

TEST(ExperimentTest, WritesReportsPredsAndManifests) {
  const auto dir = testing::scratch_dir("experiment");
  const auto cfg = small_config();
  const auto result = run_experiment(cfg, dir);
  ASSERT_EQ(result.seeds.size(), 1u);
  ASSERT_EQ(result.seeds[0].stages.size(), 3u);
  for (const std::string stage : {"a", "b", "c"}) {
    const auto base = dir / "seed_3" / ("stage_" + stage);
    EXPECT_TRUE(fs::exists(base / "report.csv")) << stage;
    const auto preds = read_text_file(base / "preds.csv");
    EXPECT_EQ(preds.substr(0, preds.find('\n')), "id,tau_hat,p1_hat,v1_hat,architecture");
    const auto manifest = read_text_file(base / "manifest.txt");
    EXPECT_NE(manifest.find("config_hash " + hash_hex(config_hash(cfg))), std::string::npos);
    EXPECT_NE(manifest.find("cost kappa=0.000000 kind=fixed delta=10.000000"),
              std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "summary" / ("stage_" + stage) / "report.csv"));
  }
  EXPECT_TRUE(fs::exists(dir / "config.txt"));

  const auto a = parse_report_csv(read_text_file(dir / "seed_3/stage_a/report.csv"), "a");
  std::set<std::string> labels;
  for (const auto& r : a) labels.insert(r.policy + "/" + r.architecture);
  EXPECT_TRUE(labels.count("baseline/-"));
  EXPECT_TRUE(labels.count("analytical/ate|rate"));
  EXPECT_TRUE(labels.count("analytical/oracle|hurdle-single"));
  for (const auto& r : a) {
    EXPECT_GE(r.ft, 0.0);
    EXPECT_LE(r.ft, 1.0);
    if (r.policy == "baseline") EXPECT_EQ(r.ft, 0.0);
  }
  const auto c = parse_report_csv(read_text_file(dir / "seed_3/stage_c/report.csv"), "c");
  EXPECT_EQ(c.size(), 10u);
}

TEST(ExperimentTest, AteOnlyRosterKeepsStageA) {
  auto cfg = small_config();
  set_config_value(cfg, "roster", "ate");
  set_config_value(cfg, "write_preds", "false");
  const auto result = run_experiment(cfg, {});
  for (const auto& stage : result.seeds[0].stages) {
    if (stage.stage == "a") {
      EXPECT_GE(stage.report.size(), 5u);
    } else {
      for (const auto& r : stage.report) {
        EXPECT_TRUE(r.architecture == "ate" || r.architecture == "oracle" ||
                    r.architecture == "-")
            << r.architecture;
      }
    }
  }
}

TEST(ExperimentTest, SummaryIsTheMeanOverSeeds) {
  CampaignReport a = {ReportRow{"analytical", "x", 10.0, 0.5, 1.0, 2.0, 0.1, 0.6}};
  CampaignReport b = {ReportRow{"analytical", "x", 20.0, 1.0, 3.0, 4.0, NAN, 0.8}};
  const auto s = summarize({a, b});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0].profit, 15.0);
  EXPECT_DOUBLE_EQ(s[0].ft, 0.75);
  EXPECT_TRUE(std::isnan(s[0].brier));
  EXPECT_DOUBLE_EQ(s[0].auc, 0.7);
}

TEST(SimulateToDirTest, ThousandRowsPerFileAndByteIdentical) {
  auto cfg = small_config();
  set_config_value(cfg, "n", "1000");
  const auto dir = testing::scratch_dir("simulate");
  const std::vector<std::uint64_t> seeds = {4};
  simulate_to_dir(cfg, seeds, dir / "one");
  simulate_to_dir(cfg, seeds, dir / "two");
  const auto customers = read_text_file(dir / "one/seed_4/customers.csv");
  const auto truth = read_text_file(dir / "one/seed_4/truth.csv");
  EXPECT_EQ(count_lines(customers), 1001u);
  EXPECT_EQ(count_lines(truth), 1001u);
  EXPECT_EQ(customers, read_text_file(dir / "two/seed_4/customers.csv"));
  EXPECT_EQ(truth, read_text_file(dir / "two/seed_4/truth.csv"));
  EXPECT_NE(read_text_file(dir / "one/seed_4/manifest.txt").find("delta=10.000000"),
            std::string::npos);
}

TEST(FitModelTest, OracleDecisionsMatchTheRule) {
  auto cfg = small_config();
  const auto run = simulate(cfg.n, cfg.p, cfg.sim_for(5));
  const auto& data = run.campaign.data;
  const auto& truth = run.campaign.truth;
  const auto model = fit_model(cfg, data, Architecture::kOracle, 5, &truth);
  const auto d = analytical_policy(model, data, cfg.cost);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto direct = decide(truth.p1[i], truth.v1[i], truth.p0[i], truth.v0[i], cfg.cost);
    ASSERT_EQ(d[i].target, direct.target);
  }
  const auto report = evaluate_model(model, data, truth, cfg.cost, 0.5);
  for (const auto& r : report) {
    if (r.policy == "analytical") EXPECT_DOUBLE_EQ(r.rmse, 0.0);
  }
}

}  // namespace
}  // namespace rdtarget
