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

#include "experiment/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "causal_tuning.hpp"
#include "common/error.hpp"
#include "common/random.hpp"
#include "common/text.hpp"
#include "metrics.hpp"

namespace rdtarget {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Labels of the conversion models compared in stage a.
constexpr const char* kRateLabel = "rate";
constexpr const char* kHurdleConversion = "conv:hurdle-single";
constexpr const char* kTwoModelConversion = "conv:two-model";

// Out-of-fold scores of one scorer over the full dataset.
struct Oof {
  std::vector<double> tau, p1, v1;
  bool has_v1 = true;
  std::vector<int> producer;

  explicit Oof(std::size_t n)
      : tau(n, kNaN), p1(n, kNaN), v1(n, kNaN), producer(n, -1) {}

  void put(std::span<const std::size_t> rows, const Scores& s, int fold) {
    if (!s.v1) has_v1 = false;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto r = rows[k];
      if (producer[r] != -1) {
        throw std::logic_error("row scored twice in the outer loop");
      }
      tau[r] = s.tau[k];
      p1[r] = s.p1[k];
      if (s.v1) v1[r] = (*s.v1)[k];
      producer[r] = fold;
    }
  }
};

void log_line(std::ostream* log, const std::string& line) {
  if (log) *log << line << std::endl;
}

std::string scorer_key(Architecture arch) { return to_string(arch); }

std::vector<std::string> tuning_components(const ExperimentConfig& cfg) {
  std::vector<Architecture> archs;
  for (const auto arch : cfg.roster) {
    if (arch != Architecture::kAte && arch != Architecture::kOracle) {
      archs.push_back(arch);
    }
  }
  if (cfg.has_stage("a")) {
    archs.push_back(Architecture::kHurdleSingle);
    // conversion_t1 rides along with any one-stage learner.
    archs.push_back(Architecture::kOnestageDr);
  }
  auto comps = components_for(archs);
  if (cfg.has_stage("a") && !cfg.in_roster(Architecture::kOnestageDr)) {
    comps.erase(std::remove(comps.begin(), comps.end(),
                            std::string(component::kDrEffect)),
                comps.end());
  }
  return comps;
}

bool needs_separate_conversion(const ExperimentConfig& cfg) {
  return cfg.has_stage("a") || cfg.in_roster(Architecture::kOnestageSingle) ||
         cfg.in_roster(Architecture::kOnestageTwo) ||
         cfg.in_roster(Architecture::kOnestageDr);
}

std::vector<Architecture> fitted_roster(const ExperimentConfig& cfg) {
  std::vector<Architecture> out;
  for (const auto arch : fitted_architectures()) {
    if (cfg.in_roster(arch)) out.push_back(arch);
  }
  return out;
}

// Metrics of one report row. `p1` feeds Brier and AUC on the treated rows
// when given.
struct RowInputs {
  const Dataset* data;
  const GroundTruth* truth;
  const CostSpec* cost;
  double e;
  std::vector<double> y, t, c;
  std::vector<std::size_t> treated;
};

ReportRow make_row(const RowInputs& in, const std::string& policy,
                   const std::string& arch, const std::vector<char>& target,
                   const std::vector<double>* tau, const std::vector<double>* p1) {
  ReportRow row;
  row.policy = policy;
  row.architecture = arch;
  const auto profit = true_profit_rows(target, *in.truth, *in.cost);
  row.profit = profit.profit;
  row.ft = profit.fraction_targeted;
  row.rmse = row.tol = row.brier = row.auc = kNaN;
  if (tau) {
    row.rmse = rmse(*tau, in.truth->tau);
    row.tol = tol(*tau, in.y, in.t, in.e);
  }
  if (p1) {
    std::vector<double> p, c;
    for (const auto r : in.treated) {
      p.push_back((*p1)[r]);
      c.push_back(in.c[r]);
    }
    row.brier = brier(p, c);
    row.auc = roc_auc(p, c);
  }
  return row;
}

std::vector<char> analytical_targets(const std::vector<double>& tau,
                                     const std::vector<double>& p1,
                                     const std::vector<double>& v1,
                                     const CostSpec& cost) {
  std::vector<char> out(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    out[i] = decide_from_effect(tau[i], p1[i], v1[i], cost).target ? 1 : 0;
  }
  return out;
}

void append_preds(std::string& out, const Dataset& data, const std::string& label,
                  const std::vector<double>& tau, const std::vector<double>& p1,
                  const std::vector<double>* v1) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += std::to_string(data[i].id);
    out += ',';
    out += format_fixed6(tau[i]);
    out += ',';
    out += format_fixed6(p1[i]);
    out += ',';
    if (v1) out += format_fixed6((*v1)[i]);
    out += ',';
    out += label;
    out += '\n';
  }
}

constexpr const char* kPredsHeader = "id,tau_hat,p1_hat,v1_hat,architecture\n";

void write_stage(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                 const std::string& scope, const std::string& stage,
                 const CampaignReport& report, const std::string* preds) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "report.csv", report_to_csv(report));
  if (preds) write_text_file(dir / "preds.csv", *preds);
  write_text_file(dir / "manifest.txt", manifest_text(cfg, scope, stage));
}

Error with_context(const Error& e, std::uint64_t seed, const std::string& stage) {
  return Error(e.kind(), "seed " + std::to_string(seed) + ", stage " + stage +
                             ": " + e.what());
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path.string());
  out << text;
  if (!out) throw io_error("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string manifest_text(const ExperimentConfig& cfg, const std::string& scope,
                          const std::string& stage) {
  std::string out = "rdtarget run manifest\n";
  out += "version " + std::string(kVersion) + '\n';
  out += "rng " + std::string(kRngAlgorithm) + " v" + std::to_string(kRngVersion) +
         '\n';
  out += "config_hash " + hash_hex(config_hash(cfg)) + '\n';
  out += "scope " + scope + '\n';
  out += "seeds " + get_config_value(cfg, "seeds") + '\n';
  if (!stage.empty()) out += "stage " + stage + '\n';
  out += "n " + std::to_string(cfg.n) + '\n';
  out += "p " + std::to_string(cfg.p) + '\n';
  out += "cost " + cfg.cost.describe() + '\n';
  out += "tuning " + to_string(cfg.tuning) + '\n';
  out += "outer_folds " + std::to_string(cfg.outer_folds) + '\n';
  out += "inner_folds " + std::to_string(cfg.inner_folds) + '\n';
  out += "profit expected\n";
  return out;
}

SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                    const std::filesystem::path& out_dir, std::ostream* log) {
  cfg.validate();
  SeedResult result;
  result.seed = seed;
  std::string stage = "simulate";
  try {
    log_line(log, "seed " + std::to_string(seed) + ": simulating");
    auto sim = simulate(cfg.n, cfg.p, cfg.sim_for(seed));
    result.warnings = sim.warnings;
    for (const auto& w : sim.warnings) log_line(log, "warning: " + w);
    const Dataset& data = sim.campaign.data;
    const GroundTruth& truth = sim.campaign.truth;
    const std::size_t n = data.size();
    const auto options = cfg.causal_options();
    const double e = options.assignment_propensity;
    const auto roster = fitted_roster(cfg);
    const auto components = tuning_components(cfg);
    const bool stage_a = cfg.has_stage("a");
    const bool stage_c = cfg.has_stage("c");
    const bool empirical = stage_c && cfg.has_policy("empirical");

    const FoldPlan outer =
        make_folds(data, cfg.outer_folds, derive_seed(seed, "outer_folds"));

    ComponentParams shared;
    shared.fallback = cfg.default_params;
    if (cfg.tuning == TuningMode::kOnce) {
      stage = "tuning";
      log_line(log, "seed " + std::to_string(seed) + ": tuning " +
                        std::to_string(components.size()) + " components");
      shared = tune_components(data, components, cfg.grid, cfg.inner_folds,
                               derive_seed(seed, "tuning"), options,
                               cfg.default_params)
                   .params;
    }

    std::map<std::string, Oof> oof;
    auto slot = [&](const std::string& key) -> Oof& {
      return oof.try_emplace(key, n).first->second;
    };
    std::map<std::string, std::vector<char>> empirical_targets;

    for (int f = 0; f < cfg.outer_folds; ++f) {
      stage = "fit";
      const auto train_rows = outer.rows_not_in(f);
      const auto test_rows = outer.rows_in(f);
      // Out-of-fold discipline: no test id may be among the training ids.
      std::vector<char> in_train(n, 0);
      for (const auto r : train_rows) in_train[r] = 1;
      for (const auto r : test_rows) {
        if (in_train[r]) throw std::logic_error("test row inside training split");
      }
      const Dataset train = data.subset(train_rows);
      const Dataset test = data.subset(test_rows);
      const auto test_ids = test.ids();
      const Matrix x_test = test.covariates();
      log_line(log, "seed " + std::to_string(seed) + ": outer fold " +
                        std::to_string(f + 1) + "/" +
                        std::to_string(cfg.outer_folds));

      ComponentParams params = shared;
      if (cfg.tuning == TuningMode::kPerFold) {
        stage = "tuning";
        params = tune_components(train, components, cfg.grid, cfg.inner_folds,
                                 derive_seed(seed, "tuning", f), options,
                                 cfg.default_params)
                     .params;
        stage = "fit";
      }

      const auto ate = make_ate_model(train);
      slot("ate").put(test_rows, ate.score(test_ids, x_test), f);

      std::optional<GbtModel> conversion;
      if (needs_separate_conversion(cfg)) {
        conversion = fit_conversion_separate(
            train, params.get(component::kConversionT1));
      }
      std::optional<TargetingModel> hurdle_single;
      for (const auto arch : roster) {
        const auto model = fit_architecture(
            arch, train, params, options, conversion ? &*conversion : nullptr);
        const auto test_scores = model.score(test_ids, x_test);
        slot(scorer_key(arch)).put(test_rows, test_scores, f);
        if (arch == Architecture::kHurdleSingle) hurdle_single = model;
        if (empirical) {
          const auto train_scores = model.score(train);
          const auto threshold = empirical_policy_threshold(
              train_scores.tau, train, cfg.cost, e);
          auto& targets = empirical_targets.try_emplace(scorer_key(arch), n, 0)
                              .first->second;
          for (std::size_t k = 0; k < test_rows.size(); ++k) {
            targets[test_rows[k]] = test_scores.tau[k] > threshold.threshold;
          }
        }
      }
      if (stage_a) {
        if (!hurdle_single) {
          hurdle_single = fit_hurdle_single(train, params, options);
        }
        slot(kHurdleConversion)
            .put(test_rows, hurdle_single->score(test_ids, x_test), f);
        Scores s;
        s.p1 = conversion->predict(x_test);
        s.tau.assign(test_rows.size(), kNaN);
        slot(kTwoModelConversion).put(test_rows, s, f);
      }
    }

    for (const auto& [key, scores] : oof) {
      for (std::size_t r = 0; r < n; ++r) {
        if (scores.producer[r] != outer.fold[r]) {
          throw std::logic_error("out-of-fold bookkeeping failed for " + key);
        }
      }
    }

    RowInputs in{&data, &truth, &cfg.cost, e,
                 data.outcomes(), data.treatments(), data.conversions(),
                 data.rows_where_treated(1)};
    const Oof& ate_oof = oof.at("ate");
    const std::vector<char> nobody(n, 0);
    const bool percentage = cfg.cost.kind == ResponseCost::kPercentage;
    const auto seed_dir =
        out_dir.empty() ? out_dir : out_dir / ("seed_" + std::to_string(seed));
    const std::string scope = "seed " + std::to_string(seed);

    std::vector<double> oracle_tau = truth.tau, oracle_p1 = truth.p1,
                        oracle_v1 = truth.v1;

    if (stage_a) {
      stage = "a";
      std::vector<ReportRow> rows;
      std::string preds = kPredsHeader;
      if (cfg.has_policy("baseline")) {
        rows.push_back(make_row(in, "baseline", "-", nobody, nullptr, nullptr));
      }
      if (cfg.has_policy("analytical")) {
        const Oof& hs = oof.at(kHurdleConversion);
        const Oof& tm = oof.at(kTwoModelConversion);
        struct Effect {
          const char* name;
          const std::vector<double>* tau;
        };
        struct Conversion {
          const char* name;
          const std::vector<double>* p1;
          const std::vector<double>* v1;
        };
        const Effect effects[] = {{"ate", &ate_oof.tau}, {"oracle", &oracle_tau}};
        const Conversion conversions[] = {
            {kRateLabel, &ate_oof.p1, &ate_oof.v1},
            {"hurdle-single", &hs.p1, &hs.v1},
            {"two-model", &tm.p1, nullptr}};
        for (const auto& eff : effects) {
          for (const auto& conv : conversions) {
            if (percentage && !conv.v1) continue;
            const std::string label = std::string(eff.name) + "|" + conv.name;
            const std::vector<double> no_value(n, 0.0);
            const auto& v1 = conv.v1 ? *conv.v1 : no_value;
            rows.push_back(make_row(in, "analytical", label,
                                    analytical_targets(*eff.tau, *conv.p1, v1,
                                                       cfg.cost),
                                    eff.tau, conv.p1));
            append_preds(preds, data, label, *eff.tau, *conv.p1, conv.v1);
          }
        }
      }
      auto report = assemble_report(std::move(rows));
      if (!seed_dir.empty()) {
        write_stage(seed_dir / "stage_a", cfg, scope, "a", report,
                    cfg.write_preds ? &preds : nullptr);
      }
      result.stages.push_back({"a", std::move(report)});
    }

    if (cfg.has_stage("b")) {
      stage = "b";
      std::vector<ReportRow> rows;
      std::string preds = kPredsHeader;
      if (cfg.has_policy("baseline")) {
        rows.push_back(make_row(in, "baseline", "-", nobody, nullptr, nullptr));
      }
      if (cfg.has_policy("analytical")) {
        std::vector<std::pair<std::string, const std::vector<double>*>> effects;
        effects.emplace_back("ate", &ate_oof.tau);
        effects.emplace_back("oracle", &oracle_tau);
        for (const auto arch : roster) {
          effects.emplace_back(to_string(arch), &oof.at(scorer_key(arch)).tau);
        }
        for (const auto& [label, tau] : effects) {
          rows.push_back(make_row(
              in, "analytical", label,
              analytical_targets(*tau, ate_oof.p1, ate_oof.v1, cfg.cost), tau,
              nullptr));
          append_preds(preds, data, label, *tau, ate_oof.p1, &ate_oof.v1);
        }
      }
      auto report = assemble_report(std::move(rows));
      if (!seed_dir.empty()) {
        write_stage(seed_dir / "stage_b", cfg, scope, "b", report,
                    cfg.write_preds ? &preds : nullptr);
      }
      result.stages.push_back({"b", std::move(report)});
    }

    if (stage_c) {
      stage = "c";
      std::vector<ReportRow> rows;
      std::string preds = kPredsHeader;
      for (const auto arch : roster) {
        const auto label = to_string(arch);
        const Oof& s = oof.at(scorer_key(arch));
        const bool priced = !percentage || s.has_v1;
        if (cfg.has_policy("analytical") && priced) {
          const std::vector<double> no_value(n, 0.0);
          const auto& v1 = s.has_v1 ? s.v1 : no_value;
          rows.push_back(make_row(in, "analytical", label,
                                  analytical_targets(s.tau, s.p1, v1, cfg.cost),
                                  &s.tau, &s.p1));
        }
        if (empirical) {
          rows.push_back(make_row(in, "empirical", label,
                                  empirical_targets.at(label), &s.tau, nullptr));
        }
        append_preds(preds, data, label, s.tau, s.p1, s.has_v1 ? &s.v1 : nullptr);
      }
      auto report = assemble_report(std::move(rows));
      if (!seed_dir.empty()) {
        write_stage(seed_dir / "stage_c", cfg, scope, "c", report,
                    cfg.write_preds ? &preds : nullptr);
      }
      result.stages.push_back({"c", std::move(report)});
    }
  } catch (const Error& e) {
    throw with_context(e, seed, stage);
  } catch (const std::logic_error& e) {
    throw std::logic_error("seed " + std::to_string(seed) + ", stage " + stage +
                           ": " + e.what());
  }
  return result;
}

CampaignReport summarize(const std::vector<CampaignReport>& per_seed) {
  if (per_seed.empty()) return {};
  std::vector<ReportRow> out;
  for (const auto& first : per_seed.front()) {
    std::vector<const ReportRow*> matches;
    for (const auto& report : per_seed) {
      for (const auto& row : report) {
        if (row.policy == first.policy && row.architecture == first.architecture) {
          matches.push_back(&row);
          break;
        }
      }
    }
    if (matches.size() != per_seed.size()) continue;
    ReportRow mean = first;
    double* fields[] = {&mean.profit, &mean.ft,    &mean.rmse,
                        &mean.tol,    &mean.brier, &mean.auc};
    for (std::size_t j = 0; j < 6; ++j) {
      double total = 0.0;
      for (const auto* row : matches) {
        const double* src[] = {&row->profit, &row->ft,    &row->rmse,
                               &row->tol,    &row->brier, &row->auc};
        total += *src[j];
      }
      *fields[j] = total / static_cast<double>(matches.size());
    }
    out.push_back(mean);
  }
  return assemble_report(std::move(out));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir,
                                std::ostream* log) {
  cfg.validate();
  ExperimentResult result;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir / "config.txt", canonical_config(cfg));
  }
  for (const auto seed : cfg.seeds) {
    result.seeds.push_back(run_seed(cfg, seed, out_dir, log));
  }
  for (const auto& stage : result.seeds.front().stages) {
    std::vector<CampaignReport> per_seed;
    for (const auto& s : result.seeds) {
      for (const auto& st : s.stages) {
        if (st.stage == stage.stage) per_seed.push_back(st.report);
      }
    }
    auto summary = summarize(per_seed);
    if (!out_dir.empty()) {
      write_stage(out_dir / "summary" / ("stage_" + stage.stage), cfg, "summary",
                  stage.stage, summary, nullptr);
    }
    log_line(log, "summary stage " + stage.stage + " (mean over " +
                      std::to_string(cfg.seeds.size()) + " seeds)\n" +
                      report_to_text(summary));
    result.summary.push_back({stage.stage, std::move(summary)});
  }
  return result;
}

void simulate_to_dir(const ExperimentConfig& cfg,
                     std::span<const std::uint64_t> seeds,
                     const std::filesystem::path& out_dir) {
  cfg.validate();
  for (const auto seed : seeds) {
    const auto dir = out_dir / ("seed_" + std::to_string(seed));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create " + dir.string() + ": " + ec.message());
    const auto sim = simulate(cfg.n, cfg.p, cfg.sim_for(seed));
    write_csv(sim.campaign.data, dir / "customers.csv");
    write_truth_csv(sim.campaign.truth, dir / "truth.csv");
    auto manifest = manifest_text(cfg, "seed " + std::to_string(seed), "");
    for (const auto& w : sim.warnings) manifest += "warning " + w + '\n';
    write_text_file(dir / "manifest.txt", manifest);
  }
}

TargetingModel fit_model(const ExperimentConfig& cfg, const Dataset& data,
                         Architecture arch, std::uint64_t seed,
                         const GroundTruth* truth) {
  if (arch == Architecture::kAte) return make_ate_model(data);
  if (arch == Architecture::kOracle) {
    if (!truth) throw invalid_argument("the oracle model needs a truth file");
    return make_oracle_model(*truth);
  }
  const auto options = cfg.causal_options();
  ComponentParams params;
  params.fallback = cfg.default_params;
  if (cfg.tuning != TuningMode::kNone) {
    const Architecture roster[] = {arch};
    params = tune_components(data, components_for(roster), cfg.grid,
                             cfg.inner_folds, derive_seed(seed, "tuning"),
                             options, cfg.default_params)
                 .params;
  }
  return fit_architecture(arch, data, params, options);
}

CampaignReport evaluate_model(const TargetingModel& model, const Dataset& data,
                              const GroundTruth& truth, const CostSpec& cost,
                              double propensity) {
  std::vector<std::size_t> truth_rows;
  truth_rows.reserve(data.size());
  for (const auto& r : data.records()) truth_rows.push_back(truth.row_of(r.id));
  auto aligned = truth.subset(truth_rows);
  aligned.rebuild_index();
  const auto ids = data.ids();
  const auto scores = model.score(ids, data.covariates());
  const auto decisions = analytical_policy(ids, scores, cost);
  std::vector<char> target(decisions.size());
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    target[i] = decisions[i].target ? 1 : 0;
  }
  RowInputs in{&data, &aligned, &cost, propensity,
               data.outcomes(), data.treatments(), data.conversions(),
               data.rows_where_treated(1)};
  std::vector<ReportRow> rows;
  rows.push_back(make_row(in, "baseline", "-", std::vector<char>(data.size(), 0),
                          nullptr, nullptr));
  rows.push_back(make_row(in, "analytical", to_string(model.architecture()),
                          target, &scores.tau, &scores.p1));
  return assemble_report(std::move(rows));
}

}  // namespace rdtarget
