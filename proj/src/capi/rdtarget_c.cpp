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

#include "rdtarget/rdtarget.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <new>
#include <string>

#include "common/error.hpp"
#include "common/text.hpp"
#include "experiment/experiment.hpp"
#include "policy.hpp"

struct rdt_config {
  rdtarget::ExperimentConfig value;
};
struct rdt_dataset {
  rdtarget::Dataset value;
};
struct rdt_truth {
  rdtarget::GroundTruth value;
};
struct rdt_model {
  rdtarget::TargetingModel value;
  std::string architecture;
};

namespace {

thread_local std::string g_last_error;

rdt_status status_of(rdtarget::ErrorKind kind) {
  switch (kind) {
    case rdtarget::ErrorKind::kInvalidArgument:
      return RDT_ERR_INVALID_ARGUMENT;
    case rdtarget::ErrorKind::kConfig:
      return RDT_ERR_CONFIG;
    case rdtarget::ErrorKind::kData:
      return RDT_ERR_DATA;
    case rdtarget::ErrorKind::kIo:
      return RDT_ERR_IO;
    case rdtarget::ErrorKind::kIncompatible:
      return RDT_ERR_INCOMPATIBLE;
  }
  return RDT_ERR_INTERNAL;
}

template <typename F>
rdt_status guard(F&& body) {
  g_last_error.clear();
  try {
    body();
    return RDT_OK;
  } catch (const rdtarget::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RDT_ERR_INTERNAL;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return RDT_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RDT_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return RDT_ERR_INTERNAL;
  }
}

template <typename T>
void require(const T* ptr, const char* name) {
  if (!ptr) throw rdtarget::invalid_argument(std::string(name) + " is NULL");
}

rdtarget::CostSpec to_cost(const rdt_cost* cost) {
  require(cost, "cost");
  rdtarget::CostSpec out;
  out.kappa = cost->kappa;
  out.delta = cost->delta;
  out.eta = cost->eta;
  switch (cost->kind) {
    case RDT_COST_NONE:
      out.kind = rdtarget::ResponseCost::kNone;
      break;
    case RDT_COST_FIXED:
      out.kind = rdtarget::ResponseCost::kFixed;
      break;
    case RDT_COST_PERCENTAGE:
      out.kind = rdtarget::ResponseCost::kPercentage;
      break;
    default:
      throw rdtarget::invalid_argument("unknown cost kind");
  }
  out.validate();
  return out;
}

rdt_cost from_cost(const rdtarget::CostSpec& cost) {
  rdt_cost out{};
  out.kappa = cost.kappa;
  out.delta = cost.delta;
  out.eta = cost.eta;
  switch (cost.kind) {
    case rdtarget::ResponseCost::kNone:
      out.kind = RDT_COST_NONE;
      break;
    case rdtarget::ResponseCost::kFixed:
      out.kind = RDT_COST_FIXED;
      break;
    case rdtarget::ResponseCost::kPercentage:
      out.kind = RDT_COST_PERCENTAGE;
      break;
  }
  return out;
}

rdt_decision from_decision(const rdtarget::PolicyDecision& d) {
  rdt_decision out{};
  out.id = d.id;
  out.target = d.target ? 1 : 0;
  out.expected_lhs = d.expected_lhs;
  out.expected_cost = d.expected_cost;
  return out;
}

}  // namespace

extern "C" {

const char* rdt_version(void) { return rdtarget::kVersion; }

const char* rdt_last_error(void) { return g_last_error.c_str(); }

const char* rdt_status_name(rdt_status status) {
  switch (status) {
    case RDT_OK:
      return "ok";
    case RDT_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case RDT_ERR_CONFIG:
      return "config error";
    case RDT_ERR_DATA:
      return "data error";
    case RDT_ERR_IO:
      return "i/o error";
    case RDT_ERR_INCOMPATIBLE:
      return "incompatible";
    case RDT_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

rdt_status rdt_config_default(rdt_config** out) {
  return guard([&] {
    require(out, "out");
    *out = new rdt_config{};
  });
}

rdt_status rdt_config_load(const char* path, rdt_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    auto cfg = rdtarget::load_config(path);
    *out = new rdt_config{std::move(cfg)};
  });
}

rdt_status rdt_config_set(rdt_config* cfg, const char* key, const char* value) {
  return guard([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    auto copy = cfg->value;
    rdtarget::set_config_value(copy, key, value);
    copy.validate();
    cfg->value = std::move(copy);
  });
}

rdt_status rdt_config_get(const rdt_config* cfg, const char* key, char* buf,
                          size_t size) {
  return guard([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(buf, "buf");
    if (size == 0) throw rdtarget::invalid_argument("buffer size is 0");
    const auto text = rdtarget::get_config_value(cfg->value, key);
    const auto n = std::min(size - 1, text.size());
    std::memcpy(buf, text.data(), n);
    buf[n] = '\0';
  });
}

rdt_status rdt_config_hash(const rdt_config* cfg, uint64_t* out) {
  return guard([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = rdtarget::config_hash(cfg->value);
  });
}

rdt_status rdt_config_cost(const rdt_config* cfg, rdt_cost* out) {
  return guard([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = from_cost(cfg->value.cost);
  });
}

rdt_status rdt_config_set_cost(rdt_config* cfg, const rdt_cost* cost) {
  return guard([&] {
    require(cfg, "cfg");
    cfg->value.cost = to_cost(cost);
  });
}

void rdt_config_free(rdt_config* cfg) { delete cfg; }

rdt_status rdt_simulate(const rdt_config* cfg, const uint64_t* seeds,
                        size_t n_seeds, const char* out_dir) {
  return guard([&] {
    require(cfg, "cfg");
    require(out_dir, "out_dir");
    if (seeds) {
      rdtarget::simulate_to_dir(cfg->value, {seeds, n_seeds}, out_dir);
    } else {
      rdtarget::simulate_to_dir(cfg->value, cfg->value.seeds, out_dir);
    }
  });
}

rdt_status rdt_experiment(const rdt_config* cfg, const char* out_dir,
                          int verbose) {
  return guard([&] {
    require(cfg, "cfg");
    require(out_dir, "out_dir");
    rdtarget::run_experiment(cfg->value, out_dir, verbose ? &std::cerr : nullptr);
  });
}

rdt_status rdt_dataset_load(const char* path, rdt_dataset** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    auto data = rdtarget::load_csv(path);
    *out = new rdt_dataset{std::move(data)};
  });
}

size_t rdt_dataset_size(const rdt_dataset* data) {
  return data ? data->value.size() : 0;
}

void rdt_dataset_free(rdt_dataset* data) { delete data; }

rdt_status rdt_truth_load(const char* path, rdt_truth** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    auto truth = rdtarget::load_truth_csv(path);
    *out = new rdt_truth{std::move(truth)};
  });
}

void rdt_truth_free(rdt_truth* truth) { delete truth; }

rdt_status rdt_model_fit(const rdt_config* cfg, const rdt_dataset* data,
                         const char* architecture, uint64_t seed,
                         const rdt_truth* truth, rdt_model** out) {
  return guard([&] {
    require(cfg, "cfg");
    require(data, "data");
    require(architecture, "architecture");
    require(out, "out");
    const auto arch = rdtarget::parse_architecture(architecture);
    auto model = rdtarget::fit_model(cfg->value, data->value, arch, seed,
                                     truth ? &truth->value : nullptr);
    *out = new rdt_model{std::move(model), rdtarget::to_string(arch)};
  });
}

rdt_status rdt_model_save(const rdt_model* model, const char* path) {
  return guard([&] {
    require(model, "model");
    require(path, "path");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw rdtarget::io_error(std::string("cannot write ") + path);
    model->value.write(out);
    if (!out) throw rdtarget::io_error(std::string("write failed for ") + path);
  });
}

rdt_status rdt_model_load(const char* path, rdt_model** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw rdtarget::io_error(std::string("cannot open ") + path);
    auto model = rdtarget::TargetingModel::read(in);
    auto name = rdtarget::to_string(model.architecture());
    *out = new rdt_model{std::move(model), std::move(name)};
  });
}

const char* rdt_model_architecture(const rdt_model* model) {
  return model ? model->architecture.c_str() : nullptr;
}

int rdt_model_has_value_scorer(const rdt_model* model) {
  return model && model->value.has_value_scorer() ? 1 : 0;
}

rdt_status rdt_model_score(const rdt_model* model, const rdt_dataset* data,
                           double* tau, double* p1, double* v1) {
  return guard([&] {
    require(model, "model");
    require(data, "data");
    require(tau, "tau");
    require(p1, "p1");
    const auto scores = model->value.score(data->value);
    for (std::size_t i = 0; i < scores.tau.size(); ++i) {
      tau[i] = scores.tau[i];
      p1[i] = scores.p1[i];
      if (v1) {
        v1[i] = scores.v1 ? (*scores.v1)[i]
                          : std::numeric_limits<double>::quiet_NaN();
      }
    }
  });
}

void rdt_model_free(rdt_model* model) { delete model; }

rdt_status rdt_decide(double p1, double v1, double p0, double v0,
                      const rdt_cost* cost, rdt_decision* out) {
  return guard([&] {
    require(out, "out");
    *out = from_decision(rdtarget::decide(p1, v1, p0, v0, to_cost(cost)));
  });
}

rdt_status rdt_decide_roas(double p1, double v1, double p0, double v0,
                           const rdt_cost* cost, double target_roas,
                           rdt_decision* out) {
  return guard([&] {
    require(out, "out");
    *out = from_decision(
        rdtarget::decide_roas(p1, v1, p0, v0, to_cost(cost), target_roas));
  });
}

rdt_status rdt_decide_batch(const rdt_model* model, const rdt_dataset* data,
                            const rdt_cost* cost, const char* out_csv,
                            size_t* n_targeted) {
  return guard([&] {
    require(model, "model");
    require(data, "data");
    require(out_csv, "out_csv");
    const auto decisions =
        rdtarget::analytical_policy(model->value, data->value, to_cost(cost));
    std::string text = "id,target,expected_lhs,expected_cost\n";
    std::size_t targeted = 0;
    for (const auto& d : decisions) {
      targeted += d.target ? 1 : 0;
      text += std::to_string(d.id) + ',' + (d.target ? "1" : "0") + ',' +
              rdtarget::format_fixed6(d.expected_lhs) + ',' +
              rdtarget::format_fixed6(d.expected_cost) + '\n';
    }
    rdtarget::write_text_file(out_csv, text);
    if (n_targeted) *n_targeted = targeted;
  });
}

rdt_status rdt_evaluate(const rdt_model* model, const rdt_dataset* data,
                        const rdt_truth* truth, const rdt_cost* cost,
                        double propensity, const char* out_csv) {
  return guard([&] {
    require(model, "model");
    require(data, "data");
    require(truth, "truth");
    require(out_csv, "out_csv");
    if (!(propensity > 0.0 && propensity < 1.0)) {
      throw rdtarget::invalid_argument("propensity must lie in (0, 1)");
    }
    const auto report = rdtarget::evaluate_model(
        model->value, data->value, truth->value, to_cost(cost), propensity);
    rdtarget::write_text_file(out_csv, rdtarget::report_to_csv(report));
  });
}

rdt_status rdt_churn_profit(const rdt_churn_params* params, double* out) {
  return guard([&] {
    require(params, "params");
    require(out, "out");
    rdtarget::ChurnParams p;
    p.beta = params->beta;
    p.gamma = params->gamma;
    p.lambda = params->lambda;
    p.value = params->value;
    p.delta = params->delta;
    p.kappa = params->kappa;
    p.n = params->n;
    p.alpha = params->alpha;
    p.fixed_cost = params->fixed_cost;
    *out = rdtarget::churn_profit(p);
  });
}

}  // extern "C"
