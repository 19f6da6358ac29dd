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

#include "experiment/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "common/error.hpp"
#include "common/text.hpp"

namespace rdtarget {
namespace {

double to_double(std::string_view key, std::string_view text) {
  const auto v = parse_double(trim(text));
  if (!v || !std::isfinite(*v)) {
    throw config_error(std::string(key) + ": expected a number, got '" +
                       std::string(text) + "'");
  }
  return *v;
}

std::int64_t to_int(std::string_view key, std::string_view text) {
  const auto v = parse_int(trim(text));
  if (!v) {
    throw config_error(std::string(key) + ": expected an integer, got '" +
                       std::string(text) + "'");
  }
  return *v;
}

std::size_t to_size(std::string_view key, std::string_view text) {
  const auto v = to_int(key, text);
  if (v < 0) throw config_error(std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(v);
}

bool to_bool(std::string_view key, std::string_view text) {
  const auto t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw config_error(std::string(key) + ": expected true or false");
}

std::vector<std::string> to_list(std::string_view text) {
  std::vector<std::string> out;
  for (const auto item : split(text, ',')) {
    const auto t = trim(item);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

template <typename T, typename F>
std::vector<T> list_of(std::string_view key, std::string_view text, F convert) {
  std::vector<T> out;
  for (const auto& item : to_list(text)) out.push_back(convert(key, item));
  if (out.empty()) throw config_error(std::string(key) + ": empty list");
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += format(items[i]);
  }
  return out;
}

std::string num(double v) { return format_exact(v); }
std::string str(const std::string& s) { return s; }

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

#define RDT_DOUBLE(KEY, MEMBER)                                          \
  Field {                                                                \
    KEY, [](const ExperimentConfig& c) { return num(c.MEMBER); },        \
        [](ExperimentConfig& c, std::string_view v) {                    \
          c.MEMBER = to_double(KEY, v);                                  \
        }                                                                \
  }
#define RDT_INT(KEY, MEMBER)                                             \
  Field {                                                                \
    KEY, [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); }, \
        [](ExperimentConfig& c, std::string_view v) {                    \
          c.MEMBER = static_cast<decltype(c.MEMBER)>(to_int(KEY, v));    \
        }                                                                \
  }
#define RDT_SIZE(KEY, MEMBER)                                            \
  Field {                                                                \
    KEY, [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); }, \
        [](ExperimentConfig& c, std::string_view v) {                    \
          c.MEMBER = to_size(KEY, v);                                    \
        }                                                                \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = {
      RDT_SIZE("n", n),
      RDT_SIZE("p", p),
      Field{"seeds",
            [](const ExperimentConfig& c) {
              return join(c.seeds, [](std::uint64_t s) { return std::to_string(s); });
            },
            [](ExperimentConfig& c, std::string_view v) {
              c.seeds = list_of<std::uint64_t>(
                  "seeds", v, [](std::string_view k, std::string_view s) {
                    return static_cast<std::uint64_t>(to_size(k, s));
                  });
            }},
      RDT_INT("outer_folds", outer_folds),
      RDT_INT("inner_folds", inner_folds),
      Field{"tuning",
            [](const ExperimentConfig& c) { return to_string(c.tuning); },
            [](ExperimentConfig& c, std::string_view v) {
              const auto t = trim(v);
              if (t == "per-fold") {
                c.tuning = TuningMode::kPerFold;
              } else if (t == "once") {
                c.tuning = TuningMode::kOnce;
              } else if (t == "none") {
                c.tuning = TuningMode::kNone;
              } else {
                throw config_error("tuning: expected per-fold, once or none");
              }
            }},
      Field{"roster",
            [](const ExperimentConfig& c) {
              return join(c.roster, [](Architecture a) { return to_string(a); });
            },
            [](ExperimentConfig& c, std::string_view v) {
              std::vector<Architecture> roster;
              for (const auto& name : to_list(v)) {
                Architecture arch;
                try {
                  arch = parse_architecture(name);
                } catch (const Error&) {
                  throw config_error("roster: unknown architecture '" + name + "'");
                }
                if (std::find(roster.begin(), roster.end(), arch) == roster.end()) {
                  roster.push_back(arch);
                }
              }
              c.roster = roster;
            }},
      Field{"policies",
            [](const ExperimentConfig& c) { return join(c.policies, str); },
            [](ExperimentConfig& c, std::string_view v) {
              c.policies = to_list(v);
            }},
      Field{"stages",
            [](const ExperimentConfig& c) { return join(c.stages, str); },
            [](ExperimentConfig& c, std::string_view v) { c.stages = to_list(v); }},
      Field{"write_preds",
            [](const ExperimentConfig& c) {
              return std::string(c.write_preds ? "true" : "false");
            },
            [](ExperimentConfig& c, std::string_view v) {
              c.write_preds = to_bool("write_preds", v);
            }},
      RDT_DOUBLE("cost.kappa", cost.kappa),
      Field{"cost.kind",
            [](const ExperimentConfig& c) { return to_string(c.cost.kind); },
            [](ExperimentConfig& c, std::string_view v) {
              c.cost.kind = parse_response_cost(std::string(trim(v)));
            }},
      RDT_DOUBLE("cost.delta", cost.delta),
      RDT_DOUBLE("cost.eta", cost.eta),
      Field{"grid.n_trees",
            [](const ExperimentConfig& c) {
              return join(c.grid.n_trees, [](int v) { return std::to_string(v); });
            },
            [](ExperimentConfig& c, std::string_view v) {
              c.grid.n_trees = list_of<int>(
                  "grid.n_trees", v, [](std::string_view k, std::string_view s) {
                    return static_cast<int>(to_int(k, s));
                  });
            }},
      Field{"grid.max_depth",
            [](const ExperimentConfig& c) {
              return join(c.grid.max_depth, [](int v) { return std::to_string(v); });
            },
            [](ExperimentConfig& c, std::string_view v) {
              c.grid.max_depth = list_of<int>(
                  "grid.max_depth", v, [](std::string_view k, std::string_view s) {
                    return static_cast<int>(to_int(k, s));
                  });
            }},
      Field{"grid.learning_rate",
            [](const ExperimentConfig& c) { return join(c.grid.learning_rate, num); },
            [](ExperimentConfig& c, std::string_view v) {
              c.grid.learning_rate =
                  list_of<double>("grid.learning_rate", v, to_double);
            }},
      Field{"grid.min_leaf_weight",
            [](const ExperimentConfig& c) {
              return join(c.grid.min_leaf_weight, num);
            },
            [](ExperimentConfig& c, std::string_view v) {
              c.grid.min_leaf_weight =
                  list_of<double>("grid.min_leaf_weight", v, to_double);
            }},
      RDT_INT("default.n_trees", default_params.n_trees),
      RDT_INT("default.max_depth", default_params.max_depth),
      RDT_DOUBLE("default.learning_rate", default_params.learning_rate),
      RDT_DOUBLE("default.min_leaf_weight", default_params.min_leaf_weight),
      RDT_DOUBLE("causal.w_clip", causal.w_clip),
      RDT_DOUBLE("causal.value_floor", causal.value_floor),
      RDT_DOUBLE("causal.propensity_clip", causal.propensity_clip),
      Field{"causal.known_propensity",
            [](const ExperimentConfig& c) {
              return std::string(c.causal.known_propensity ? "true" : "false");
            },
            [](ExperimentConfig& c, std::string_view v) {
              c.causal.known_propensity = to_bool("causal.known_propensity", v);
            }},
      RDT_DOUBLE("sim.ate_conversion", sim.ate_conversion),
      RDT_DOUBLE("sim.ate_value", sim.ate_value),
      RDT_DOUBLE("sim.tau_c_min", sim.tau_c_min),
      RDT_DOUBLE("sim.tau_c_max", sim.tau_c_max),
      RDT_DOUBLE("sim.tau_v_min", sim.tau_v_min),
      RDT_DOUBLE("sim.tau_v_max", sim.tau_v_max),
      RDT_DOUBLE("sim.mass_inside", sim.mass_inside),
      RDT_DOUBLE("sim.propensity", sim.propensity),
      RDT_DOUBLE("sim.value_floor", sim.value_floor),
      RDT_SIZE("sim.hidden", sim.hidden),
      RDT_DOUBLE("sim.base_conversion", sim.base_conversion),
      RDT_DOUBLE("sim.value_median", sim.value_median),
      RDT_DOUBLE("sim.value_q05", sim.value_q05),
      RDT_DOUBLE("sim.value_q95", sim.value_q95),
      RDT_INT("sim.nuisance.n_trees", sim.nuisance.n_trees),
      RDT_INT("sim.nuisance.max_depth", sim.nuisance.max_depth),
      RDT_DOUBLE("sim.nuisance.learning_rate", sim.nuisance.learning_rate),
      RDT_DOUBLE("sim.nuisance.min_leaf_weight", sim.nuisance.min_leaf_weight),
  };
  return kFields;
}

#undef RDT_DOUBLE
#undef RDT_INT
#undef RDT_SIZE

const Field& field(std::string_view key) {
  for (const auto& f : fields()) {
    if (key == f.key) return f;
  }
  throw config_error("unknown config key '" + std::string(key) + "'");
}

void validate_params(const GbtParams& p, const char* what) {
  if (p.n_trees < 0 || p.max_depth < 1 || !(p.learning_rate > 0.0) ||
      p.learning_rate > 1.0 || !(p.min_leaf_weight >= 0.0)) {
    throw config_error(std::string(what) + " booster settings are out of range");
  }
}

}  // namespace

std::string to_string(TuningMode mode) {
  switch (mode) {
    case TuningMode::kPerFold:
      return "per-fold";
    case TuningMode::kOnce:
      return "once";
    case TuningMode::kNone:
      return "none";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (n < 2) throw config_error("n must be >= 2");
  if (p < 12) throw config_error("p must be >= 12");
  if (seeds.empty()) throw config_error("seeds must not be empty");
  if (roster.empty()) throw config_error("roster must not be empty");
  if (outer_folds < 2 || static_cast<std::size_t>(outer_folds) > n) {
    throw config_error("outer_folds must lie in [2, n]");
  }
  if (inner_folds < 2) throw config_error("inner_folds must be >= 2");
  for (const auto& policy : policies) {
    if (policy != "baseline" && policy != "analytical" && policy != "empirical") {
      throw config_error("unknown policy '" + policy + "'");
    }
  }
  for (const auto& stage : stages) {
    if (stage != "a" && stage != "b" && stage != "c") {
      throw config_error("unknown stage '" + stage + "'");
    }
  }
  cost.validate();
  grid.validate();
  validate_params(default_params, "default");
  validate_params(sim.nuisance, "sim.nuisance");
  if (!(causal.w_clip > 0.0 && causal.w_clip <= 1.0)) {
    throw config_error("causal.w_clip must lie in (0, 1]");
  }
  if (!(causal.value_floor >= 0.0)) {
    throw config_error("causal.value_floor must be >= 0");
  }
  if (!(causal.propensity_clip > 0.0 && causal.propensity_clip < 0.5)) {
    throw config_error("causal.propensity_clip must lie in (0, 0.5)");
  }
  sim.validate();
}

bool ExperimentConfig::has_policy(const std::string& name) const {
  return std::find(policies.begin(), policies.end(), name) != policies.end();
}

bool ExperimentConfig::has_stage(const std::string& name) const {
  return std::find(stages.begin(), stages.end(), name) != stages.end();
}

bool ExperimentConfig::in_roster(Architecture arch) const {
  return std::find(roster.begin(), roster.end(), arch) != roster.end();
}

SimConfig ExperimentConfig::sim_for(std::uint64_t seed) const {
  SimConfig out = sim;
  out.seed = seed;
  return out;
}

CausalOptions ExperimentConfig::causal_options() const {
  CausalOptions out = causal;
  out.assignment_propensity = sim.propensity;
  return out;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> kKeys = [] {
    std::vector<std::string> keys;
    for (const auto& f : fields()) keys.emplace_back(f.key);
    return keys;
  }();
  return kKeys;
}

void set_config_value(ExperimentConfig& cfg, std::string_view key,
                      std::string_view value) {
  field(trim(key)).set(cfg, trim(value));
}

std::string get_config_value(const ExperimentConfig& cfg, std::string_view key) {
  return field(trim(key)).get(cfg);
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  ExperimentConfig cfg;
  std::size_t line_no = 0;
  std::size_t start = 0;
  std::vector<std::string> seen;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) {
      throw config_error(where + "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
      throw config_error(where + "duplicate key '" + key + "'");
    }
    seen.push_back(key);
    try {
      set_config_value(cfg, key, line.substr(eq + 1));
    } catch (const Error& e) {
      throw config_error(where + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot read config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(cfg);
    out += '\n';
  }
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : canonical_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace rdtarget
