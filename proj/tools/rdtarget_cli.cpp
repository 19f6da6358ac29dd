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

// rdtarget command line. Talks to the library through the C API only.
//
// Exit codes: 0 success, 2 config or usage error, 3 data or file error,
// 1 anything else.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rdtarget/rdtarget.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

int exit_code(rdt_status status) {
  switch (status) {
    case RDT_OK:
      return kExitOk;
    case RDT_ERR_CONFIG:
    case RDT_ERR_INVALID_ARGUMENT:
    case RDT_ERR_INCOMPATIBLE:
      return kExitConfig;
    case RDT_ERR_DATA:
    case RDT_ERR_IO:
      return kExitData;
    default:
      return kExitOther;
  }
}

struct Failure {
  int code;
};

void check(rdt_status status) {
  if (status == RDT_OK) return;
  std::cerr << "rdtarget: " << rdt_status_name(status) << ": "
            << rdt_last_error() << '\n';
  throw Failure{exit_code(status)};
}

struct ConfigDeleter {
  void operator()(rdt_config* p) const { rdt_config_free(p); }
};
struct DatasetDeleter {
  void operator()(rdt_dataset* p) const { rdt_dataset_free(p); }
};
struct TruthDeleter {
  void operator()(rdt_truth* p) const { rdt_truth_free(p); }
};
struct ModelDeleter {
  void operator()(rdt_model* p) const { rdt_model_free(p); }
};
using ConfigPtr = std::unique_ptr<rdt_config, ConfigDeleter>;
using DatasetPtr = std::unique_ptr<rdt_dataset, DatasetDeleter>;
using TruthPtr = std::unique_ptr<rdt_truth, TruthDeleter>;
using ModelPtr = std::unique_ptr<rdt_model, ModelDeleter>;

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
};

struct CostOptions {
  std::optional<double> kappa;
  std::optional<double> delta;
  std::optional<double> eta;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "Config file (key = value lines)");
  cmd->add_option("--set", opts.sets, "Override a config key: KEY=VALUE")
      ->type_name("KEY=VALUE");
  cmd->add_option("--seed", opts.seed, "Simulation / tuning seed");
}

void add_cost(CLI::App* cmd, CostOptions& cost) {
  cmd->add_option("--kappa", cost.kappa, "Targeting cost per targeted customer");
  auto* delta = cmd->add_option("--delta", cost.delta,
                                "Fixed cost per converting targeted customer");
  auto* eta = cmd->add_option("--eta", cost.eta,
                              "Percentage discount on the purchase value");
  delta->excludes(eta);
}

ConfigPtr load_config(const CommonOptions& opts) {
  rdt_config* raw = nullptr;
  if (opts.config.empty()) {
    check(rdt_config_default(&raw));
  } else {
    check(rdt_config_load(opts.config.c_str(), &raw));
  }
  ConfigPtr cfg(raw);
  for (const auto& item : opts.sets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      std::cerr << "rdtarget: --set expects KEY=VALUE, got '" << item << "'\n";
      throw Failure{kExitConfig};
    }
    check(rdt_config_set(cfg.get(), item.substr(0, eq).c_str(),
                         item.substr(eq + 1).c_str()));
  }
  if (opts.seed) {
    check(rdt_config_set(cfg.get(), "seeds", std::to_string(*opts.seed).c_str()));
  }
  return cfg;
}

rdt_cost resolve_cost(const rdt_config* cfg, const CostOptions& opts) {
  rdt_cost cost{};
  check(rdt_config_cost(cfg, &cost));
  if (opts.kappa) cost.kappa = *opts.kappa;
  if (opts.delta) {
    cost.kind = RDT_COST_FIXED;
    cost.delta = *opts.delta;
  }
  if (opts.eta) {
    cost.kind = RDT_COST_PERCENTAGE;
    cost.eta = *opts.eta;
  }
  return cost;
}

DatasetPtr load_data(const std::string& path) {
  rdt_dataset* raw = nullptr;
  check(rdt_dataset_load(path.c_str(), &raw));
  return DatasetPtr(raw);
}

TruthPtr load_truth(const std::string& path) {
  rdt_truth* raw = nullptr;
  check(rdt_truth_load(path.c_str(), &raw));
  return TruthPtr(raw);
}

ModelPtr load_model(const std::string& path) {
  rdt_model* raw = nullptr;
  check(rdt_model_load(path.c_str(), &raw));
  return ModelPtr(raw);
}

double config_number(const rdt_config* cfg, const char* key) {
  char buf[64];
  check(rdt_config_get(cfg, key, buf, sizeof(buf)));
  return std::stod(buf);
}

void print_file(const std::string& path) {
  std::ifstream in(path);
  std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Profit-driven customer targeting with causal hurdle models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rdt_version()));

  CommonOptions sim_opts;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Simulate campaign data and truth");
  add_common(sim, sim_opts);
  sim->add_option("--out", sim_out, "Output directory")->required();

  CommonOptions exp_opts;
  std::string exp_out;
  bool exp_quiet = false;
  auto* exp = app.add_subcommand("experiment", "Run the simulation experiment");
  add_common(exp, exp_opts);
  exp->add_option("--out", exp_out, "Output directory")->required();
  exp->add_flag("--quiet", exp_quiet, "No progress output");

  CommonOptions fit_opts;
  std::string fit_data, fit_arch, fit_out, fit_truth;
  auto* fit = app.add_subcommand("fit", "Fit one architecture and save it");
  add_common(fit, fit_opts);
  fit->add_option("--data", fit_data, "customers.csv")->required();
  fit->add_option("--arch", fit_arch, "Architecture name")->required();
  fit->add_option("--out", fit_out, "Model file to write")->required();
  fit->add_option("--truth", fit_truth, "truth.csv (oracle only)");

  CommonOptions dec_opts;
  CostOptions dec_cost;
  std::string dec_model, dec_data, dec_out;
  auto* dec = app.add_subcommand("decide", "Score customers and apply the rule");
  add_common(dec, dec_opts);
  add_cost(dec, dec_cost);
  dec->add_option("--model", dec_model, "Model file")->required();
  dec->add_option("--data", dec_data, "customers.csv")->required();
  dec->add_option("--out", dec_out, "decisions.csv to write")->required();

  CommonOptions ev_opts;
  CostOptions ev_cost;
  std::string ev_model, ev_data, ev_truth, ev_out;
  auto* ev = app.add_subcommand("evaluate", "Profit and metrics against truth");
  add_common(ev, ev_opts);
  add_cost(ev, ev_cost);
  ev->add_option("--model", ev_model, "Model file")->required();
  ev->add_option("--data", ev_data, "customers.csv")->required();
  ev->add_option("--truth", ev_truth, "truth.csv")->required();
  ev->add_option("--out", ev_out, "report.csv to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) {
      auto cfg = load_config(sim_opts);
      check(rdt_simulate(cfg.get(), nullptr, 0, sim_out.c_str()));
    } else if (exp->parsed()) {
      auto cfg = load_config(exp_opts);
      check(rdt_experiment(cfg.get(), exp_out.c_str(), exp_quiet ? 0 : 1));
    } else if (fit->parsed()) {
      auto cfg = load_config(fit_opts);
      auto data = load_data(fit_data);
      TruthPtr truth;
      if (!fit_truth.empty()) truth = load_truth(fit_truth);
      rdt_model* raw = nullptr;
      check(rdt_model_fit(cfg.get(), data.get(), fit_arch.c_str(),
                          fit_opts.seed.value_or(1), truth.get(), &raw));
      ModelPtr model(raw);
      check(rdt_model_save(model.get(), fit_out.c_str()));
    } else if (dec->parsed()) {
      auto cfg = load_config(dec_opts);
      const auto cost = resolve_cost(cfg.get(), dec_cost);
      auto model = load_model(dec_model);
      auto data = load_data(dec_data);
      std::size_t targeted = 0;
      check(rdt_decide_batch(model.get(), data.get(), &cost, dec_out.c_str(),
                             &targeted));
      std::cout << "targeted " << targeted << " of "
                << rdt_dataset_size(data.get()) << '\n';
    } else if (ev->parsed()) {
      auto cfg = load_config(ev_opts);
      const auto cost = resolve_cost(cfg.get(), ev_cost);
      auto model = load_model(ev_model);
      auto data = load_data(ev_data);
      auto truth = load_truth(ev_truth);
      check(rdt_evaluate(model.get(), data.get(), truth.get(), &cost,
                         config_number(cfg.get(), "sim.propensity"),
                         ev_out.c_str()));
      print_file(ev_out);
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kExitOk;
}
