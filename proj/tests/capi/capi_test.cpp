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

// Exercises the shared library through its C header only, and the command
// line tool through its exit codes.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rdtarget/rdtarget.h"

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("rdtarget_capi_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

rdt_config* small_config() {
  rdt_config* cfg = nullptr;
  EXPECT_EQ(rdt_config_default(&cfg), RDT_OK);
  EXPECT_EQ(rdt_config_set(cfg, "n", "600"), RDT_OK);
  EXPECT_EQ(rdt_config_set(cfg, "sim.nuisance.n_trees", "30"), RDT_OK);
  EXPECT_EQ(rdt_config_set(cfg, "sim.nuisance.max_depth", "3"), RDT_OK);
  EXPECT_EQ(rdt_config_set(cfg, "default.n_trees", "20"), RDT_OK);
  EXPECT_EQ(rdt_config_set(cfg, "default.max_depth", "2"), RDT_OK);
  EXPECT_EQ(rdt_config_set(cfg, "tuning", "none"), RDT_OK);
  return cfg;
}

// Simulated customers.csv and truth.csv for seed 1 under `dir`.
void simulate_into(const fs::path& dir) {
  rdt_config* cfg = small_config();
  const uint64_t seed = 1;
  ASSERT_EQ(rdt_simulate(cfg, &seed, 1, dir.c_str()), RDT_OK) << rdt_last_error();
  rdt_config_free(cfg);
}

TEST(CapiTest, VersionAndStatusNames) {
  EXPECT_STREQ(rdt_version(), "1.0.0");
  EXPECT_STREQ(rdt_status_name(RDT_OK), "ok");
  EXPECT_STREQ(rdt_status_name(RDT_ERR_INCOMPATIBLE), "incompatible");
}

TEST(CapiTest, ConfigSetGetAndErrors) {
  rdt_config* cfg = nullptr;
  ASSERT_EQ(rdt_config_default(&cfg), RDT_OK);
  char buf[64];
  ASSERT_EQ(rdt_config_get(cfg, "n", buf, sizeof buf), RDT_OK);
  EXPECT_STREQ(buf, "20000");
  uint64_t h0 = 0, h1 = 0;
  ASSERT_EQ(rdt_config_hash(cfg, &h0), RDT_OK);
  ASSERT_EQ(rdt_config_set(cfg, "cost.kappa", "0.25"), RDT_OK);
  ASSERT_EQ(rdt_config_hash(cfg, &h1), RDT_OK);
  EXPECT_NE(h0, h1);
  rdt_cost cost;
  ASSERT_EQ(rdt_config_cost(cfg, &cost), RDT_OK);
  EXPECT_EQ(cost.kappa, 0.25);
  EXPECT_EQ(cost.kind, RDT_COST_FIXED);
  EXPECT_EQ(cost.delta, 10.0);
  EXPECT_EQ(rdt_config_set(cfg, "nope", "1"), RDT_ERR_CONFIG);
  EXPECT_NE(std::string(rdt_last_error()).find("nope"), std::string::npos);
  ASSERT_EQ(rdt_config_get(cfg, "n", buf, 2), RDT_OK);
  EXPECT_STREQ(buf, "2");
  EXPECT_EQ(rdt_config_get(cfg, "n", buf, 0), RDT_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(rdt_config_set(nullptr, "n", "1"), RDT_ERR_INVALID_ARGUMENT);
  rdt_config_free(cfg);
  rdt_config* missing = nullptr;
  EXPECT_EQ(rdt_config_load("/nonexistent/cfg.txt", &missing), RDT_ERR_IO);
}

TEST(CapiTest, DecideMatchesTheRule) {
  rdt_cost cost{0.0, RDT_COST_FIXED, 10.0, 0.0};
  rdt_decision d;
  // tau = 0.3*100 - 0.1*100 = 20 against cost 0.3*10 = 3
  ASSERT_EQ(rdt_decide(0.3, 100.0, 0.1, 100.0, &cost, &d), RDT_OK);
  EXPECT_EQ(d.target, 1);
  EXPECT_DOUBLE_EQ(d.expected_lhs, 20.0);
  EXPECT_DOUBLE_EQ(d.expected_cost, 3.0);
  cost.kappa = 17.0;  // exact tie is not targeted
  ASSERT_EQ(rdt_decide(0.3, 100.0, 0.1, 100.0, &cost, &d), RDT_OK);
  EXPECT_EQ(d.target, 0);
  EXPECT_EQ(rdt_decide(1.5, 1.0, 0.1, 1.0, &cost, &d), RDT_ERR_INVALID_ARGUMENT);
  ASSERT_EQ(rdt_decide_roas(0.3, 100.0, 0.1, 100.0, &cost, 1.0, &d), RDT_OK);
  EXPECT_EQ(d.target, 1);
  cost.kind = RDT_COST_PERCENTAGE;
  cost.eta = 2.0;
  EXPECT_EQ(rdt_decide(0.3, 100.0, 0.1, 100.0, &cost, &d), RDT_ERR_CONFIG);
}

TEST(CapiTest, ChurnProfitWithoutReactionsMatchesTheClosedForm) {
  rdt_churn_params p{0.6, 0.1, 0.0, 200.0, 20.0, 1.0, 1000.0, 0.2, 50.0};
  double out = 0.0;
  ASSERT_EQ(rdt_churn_profit(&p, &out), RDT_OK);
  const double expected =
      p.n * p.alpha * (p.beta * p.gamma * (p.value - p.delta - p.kappa) +
                       p.beta * (1.0 - p.gamma) * (-p.kappa) +
                       (1.0 - p.beta) * (-p.delta - p.kappa)) -
      p.fixed_cost;
  EXPECT_NEAR(out, expected, 1e-9);
  p.beta = 1.5;
  EXPECT_NE(rdt_churn_profit(&p, &out), RDT_OK);
}

TEST(CapiTest, FitScoreSaveLoadDecideEvaluate) {
  const auto dir = scratch("fit");
  simulate_into(dir);
  rdt_dataset* data = nullptr;
  rdt_truth* truth = nullptr;
  ASSERT_EQ(rdt_dataset_load((dir / "seed_1/customers.csv").c_str(), &data), RDT_OK);
  ASSERT_EQ(rdt_truth_load((dir / "seed_1/truth.csv").c_str(), &truth), RDT_OK);
  ASSERT_EQ(rdt_dataset_size(data), 600u);

  rdt_config* cfg = small_config();
  rdt_model* model = nullptr;
  ASSERT_EQ(rdt_model_fit(cfg, data, "hurdle-single", 1, nullptr, &model), RDT_OK)
      << rdt_last_error();
  EXPECT_STREQ(rdt_model_architecture(model), "hurdle-single");
  EXPECT_EQ(rdt_model_has_value_scorer(model), 1);
  std::vector<double> tau(600), p1(600), v1(600);
  ASSERT_EQ(rdt_model_score(model, data, tau.data(), p1.data(), v1.data()), RDT_OK);

  const auto path = dir / "model.txt";
  ASSERT_EQ(rdt_model_save(model, path.c_str()), RDT_OK);
  rdt_model* loaded = nullptr;
  ASSERT_EQ(rdt_model_load(path.c_str(), &loaded), RDT_OK);
  std::vector<double> tau2(600), p12(600);
  ASSERT_EQ(rdt_model_score(loaded, data, tau2.data(), p12.data(), nullptr), RDT_OK);
  EXPECT_EQ(tau, tau2);
  EXPECT_EQ(p1, p12);

  rdt_cost cost;
  ASSERT_EQ(rdt_config_cost(cfg, &cost), RDT_OK);
  size_t targeted = 0;
  ASSERT_EQ(rdt_decide_batch(loaded, data, &cost, (dir / "dec.csv").c_str(), &targeted),
            RDT_OK);
  size_t expected_targeted = 0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] > p1[i] * cost.delta + cost.kappa) ++expected_targeted;
  }
  EXPECT_EQ(targeted, expected_targeted);
  ASSERT_EQ(rdt_evaluate(loaded, data, truth, &cost, 0.5, (dir / "rep.csv").c_str()), RDT_OK);
  EXPECT_EQ(slurp(dir / "rep.csv").rfind("policy,architecture,", 0), 0u);

  rdt_model* oracle = nullptr;
  EXPECT_EQ(rdt_model_fit(cfg, data, "oracle", 1, nullptr, &oracle), RDT_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(rdt_model_fit(cfg, data, "bogus", 1, nullptr, &oracle), RDT_ERR_INVALID_ARGUMENT);

  rdt_model_free(loaded);
  rdt_model_free(model);
  rdt_config_free(cfg);
  rdt_truth_free(truth);
  rdt_dataset_free(data);
}

TEST(CapiTest, LoadErrors) {
  const auto dir = scratch("errors");
  rdt_dataset* data = nullptr;
  EXPECT_EQ(rdt_dataset_load((dir / "missing.csv").c_str(), &data), RDT_ERR_IO);
  std::ofstream(dir / "bad.csv") << "id,t,c,v\n1,2,0,0\n";
  EXPECT_EQ(rdt_dataset_load((dir / "bad.csv").c_str(), &data), RDT_ERR_DATA);
  std::ofstream(dir / "model.txt") << "rdtarget-model 999\n";
  rdt_model* model = nullptr;
  EXPECT_EQ(rdt_model_load((dir / "model.txt").c_str(), &model), RDT_ERR_INCOMPATIBLE);
}

int run(const std::string& args) {
  const std::string cmd = std::string(RDTARGET_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliTest, ExitCodes) {
  const auto dir = scratch("cli");
  const std::string d = dir.string();
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("simulate --out " + d + "/x --set bogus=1"), 2);
  EXPECT_EQ(run("simulate --out " + d + "/x --set n"), 2);
  std::ofstream(dir / "bad.cfg") << "n = 10\nn = 11\n";
  EXPECT_EQ(run("simulate --out " + d + "/x --config " + d + "/bad.cfg"), 2);
  EXPECT_EQ(run("fit --data " + d + "/none.csv --arch ate --out " + d + "/m.txt"), 3);

  const std::string sets =
      " --set n=600 --set sim.nuisance.n_trees=30 --set sim.nuisance.max_depth=3"
      " --set tuning=none --set default.n_trees=20 --set default.max_depth=2";
  ASSERT_EQ(run("simulate --out " + d + "/sim --seed 2" + sets), 0);
  const std::string data = d + "/sim/seed_2/customers.csv";
  const std::string truth = d + "/sim/seed_2/truth.csv";
  ASSERT_EQ(run("fit --data " + data + " --arch onestage-single --out " + d + "/os.txt" + sets),
            0);
  // A one-stage model has no value scorer, so percentage cost cannot be applied.
  EXPECT_EQ(run("decide --model " + d + "/os.txt --data " + data + " --out " + d +
                "/dec.csv --eta 0.1"),
            2);
  EXPECT_EQ(run("decide --model " + d + "/os.txt --data " + data + " --out " + d +
                "/dec.csv --delta 10"),
            0);

  ASSERT_EQ(run("fit --data " + data + " --arch oracle --truth " + truth + " --out " + d +
                "/oracle.txt"),
            0);
  ASSERT_EQ(run("decide --model " + d + "/oracle.txt --data " + data + " --out " + d +
                "/oracle_dec.csv"),
            0);
  ASSERT_EQ(run("evaluate --model " + d + "/oracle.txt --data " + data + " --truth " +
                truth + " --out " + d + "/oracle_rep.csv"),
            0);
  const auto report = slurp(dir / "oracle_rep.csv");
  EXPECT_NE(report.find("analytical,oracle,"), std::string::npos) << report;
}

}  // namespace
