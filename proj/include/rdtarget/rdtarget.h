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

/*
 * C interface of librdtarget.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function (NULL is accepted). Every fallible call returns
 * an rdt_status; on failure rdt_last_error() describes the problem until the
 * next call on the same thread.
 */

#ifndef RDTARGET_RDTARGET_H_
#define RDTARGET_RDTARGET_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RDT_API __declspec(dllexport)
#else
#define RDT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rdt_status {
  RDT_OK = 0,
  RDT_ERR_INVALID_ARGUMENT = 1,
  RDT_ERR_CONFIG = 2,
  RDT_ERR_DATA = 3,
  RDT_ERR_IO = 4,
  RDT_ERR_INCOMPATIBLE = 5,
  RDT_ERR_INTERNAL = 6
} rdt_status;

typedef enum rdt_cost_kind {
  RDT_COST_NONE = 0,
  RDT_COST_FIXED = 1,
  RDT_COST_PERCENTAGE = 2
} rdt_cost_kind;

/* Targeting cost kappa plus a response cost paid by converters: nothing, a
 * fixed delta, or eta times the purchase value. */
typedef struct rdt_cost {
  double kappa;
  rdt_cost_kind kind;
  double delta;
  double eta;
} rdt_cost;

typedef struct rdt_decision {
  int64_t id;
  int target;
  double expected_lhs;
  double expected_cost;
} rdt_decision;

typedef struct rdt_churn_params {
  double beta;
  double gamma;
  double lambda;
  double value;
  double delta;
  double kappa;
  double n;
  double alpha;
  double fixed_cost;
} rdt_churn_params;

typedef struct rdt_config rdt_config;
typedef struct rdt_dataset rdt_dataset;
typedef struct rdt_truth rdt_truth;
typedef struct rdt_model rdt_model;

RDT_API const char* rdt_version(void);
RDT_API const char* rdt_last_error(void);
RDT_API const char* rdt_status_name(rdt_status status);

/* Configuration. */
RDT_API rdt_status rdt_config_default(rdt_config** out);
RDT_API rdt_status rdt_config_load(const char* path, rdt_config** out);
RDT_API rdt_status rdt_config_set(rdt_config* cfg, const char* key,
                                  const char* value);
/* Copies the value of `key` into buf (NUL-terminated, truncated to size). */
RDT_API rdt_status rdt_config_get(const rdt_config* cfg, const char* key,
                                  char* buf, size_t size);
RDT_API rdt_status rdt_config_hash(const rdt_config* cfg, uint64_t* out);
RDT_API rdt_status rdt_config_cost(const rdt_config* cfg, rdt_cost* out);
RDT_API rdt_status rdt_config_set_cost(rdt_config* cfg, const rdt_cost* cost);
RDT_API void rdt_config_free(rdt_config* cfg);

/* Simulation and experiments. `seeds` may be NULL to use the configured
 * seeds. */
RDT_API rdt_status rdt_simulate(const rdt_config* cfg, const uint64_t* seeds,
                                size_t n_seeds, const char* out_dir);
/* Progress lines go to stderr when `verbose` is non-zero. */
RDT_API rdt_status rdt_experiment(const rdt_config* cfg, const char* out_dir,
                                  int verbose);

/* Data. */
RDT_API rdt_status rdt_dataset_load(const char* path, rdt_dataset** out);
RDT_API size_t rdt_dataset_size(const rdt_dataset* data);
RDT_API void rdt_dataset_free(rdt_dataset* data);
RDT_API rdt_status rdt_truth_load(const char* path, rdt_truth** out);
RDT_API void rdt_truth_free(rdt_truth* truth);

/* Models. `truth` is only read by the oracle architecture. */
RDT_API rdt_status rdt_model_fit(const rdt_config* cfg, const rdt_dataset* data,
                                 const char* architecture, uint64_t seed,
                                 const rdt_truth* truth, rdt_model** out);
RDT_API rdt_status rdt_model_save(const rdt_model* model, const char* path);
RDT_API rdt_status rdt_model_load(const char* path, rdt_model** out);
RDT_API const char* rdt_model_architecture(const rdt_model* model);
RDT_API int rdt_model_has_value_scorer(const rdt_model* model);
/* Arrays hold rdt_dataset_size(data) entries; v1 may be NULL. Without a
 * value scorer v1 is filled with NaN. */
RDT_API rdt_status rdt_model_score(const rdt_model* model,
                                   const rdt_dataset* data, double* tau,
                                   double* p1, double* v1);
RDT_API void rdt_model_free(rdt_model* model);

/* Decisions. */
RDT_API rdt_status rdt_decide(double p1, double v1, double p0, double v0,
                              const rdt_cost* cost, rdt_decision* out);
RDT_API rdt_status rdt_decide_roas(double p1, double v1, double p0, double v0,
                                   const rdt_cost* cost, double target_roas,
                                   rdt_decision* out);
/* Writes decisions.csv (id,target,expected_lhs,expected_cost). */
RDT_API rdt_status rdt_decide_batch(const rdt_model* model,
                                    const rdt_dataset* data,
                                    const rdt_cost* cost, const char* out_csv,
                                    size_t* n_targeted);
/* Writes a report.csv with the baseline and analytical rows of the model. */
RDT_API rdt_status rdt_evaluate(const rdt_model* model, const rdt_dataset* data,
                                const rdt_truth* truth, const rdt_cost* cost,
                                double propensity, const char* out_csv);

RDT_API rdt_status rdt_churn_profit(const rdt_churn_params* params, double* out);

#ifdef __cplusplus
}
#endif

#endif /* RDTARGET_RDTARGET_H_ */
