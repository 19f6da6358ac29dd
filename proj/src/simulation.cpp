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

#include "simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/random.hpp"
#include "common/text.hpp"
#include "metrics.hpp"

namespace rdtarget {
namespace {

// 5% / 95% quantile of the standard normal.
constexpr double kZ95 = 1.6448536269514722;
constexpr double kShrink = 0.9;
constexpr int kMaxShrinkSteps = 200;

double round6(double value) { return std::round(value * 1e6) / 1e6; }

// Logit coefficients of the untreated conversion model on standardized,
// log-compressed covariates. Session behaviour dominates; history matters
// less.
struct Term {
  std::size_t feature;
  double weight;
};
constexpr Term kConversionTerms[] = {
    {0, 0.25},  {2, 0.35},  {3, -0.15}, {6, 0.15},  {10, 0.10}, {11, 0.35},
    {12, 0.80}, {13, 0.25}, {14, 0.20}, {15, 0.35}, {16, 0.45}, {17, -0.15},
    {19, 0.10}, {21, 0.20}, {23, 0.10}, {28, 0.20},
};
// Basket size times session length.
constexpr double kConversionInteraction = 0.25;
constexpr std::size_t kInteractionA = 12;
constexpr std::size_t kInteractionB = 15;

// Ordering score of purchase values among converters.
constexpr Term kValueTerms[] = {
    {9, 0.5}, {13, 0.7}, {12, 0.3}, {17, -0.15}, {2, 0.2},
};
constexpr double kValueSignal = 0.8;
constexpr double kValueNoise = 0.6;  // 0.8^2 + 0.6^2 = 1

// log1p for counts and logs for positive covariates, then standardized.
Matrix generator_features(const CovariateTable& covariates) {
  const std::size_t p = std::min<std::size_t>(covariates.x.cols(), 30);
  Matrix f(covariates.size(), p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto kind = feature_spec(j).kind;
    for (std::size_t i = 0; i < covariates.size(); ++i) {
      const double x = covariates.x(i, j);
      f(i, j) = kind == FeatureKind::kBinary ? x : std::log1p(x);
    }
  }
  return standardize_columns(f);
}

double linear_score(const Matrix& f, std::size_t row,
                    std::span<const Term> terms) {
  double s = 0.0;
  for (const auto& term : terms) {
    if (term.feature < f.cols()) s += term.weight * f(row, term.feature);
  }
  return s;
}

double sigmoid_exact(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Intercept a with mean(sigmoid(a + eta)) = target, by bisection.
double calibrate_intercept(const std::vector<double>& eta, double target) {
  double lo = -30.0;
  double hi = 30.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    double total = 0.0;
    for (const double e : eta) total += sigmoid_exact(mid + e);
    if (total / static_cast<double>(eta.size()) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void scale_effect(std::vector<double>& raw, double ate, double lo, double hi,
                  double mass_inside, const char* what,
                  std::vector<std::string>& warnings) {
  const std::size_t n = raw.size();
  const double m = mean(raw);
  double ss = 0.0;
  for (const double r : raw) ss += (r - m) * (r - m);
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) {
    warnings.push_back(std::string(what) +
                       ": raw effect scores have zero variance; using the "
                       "constant ATE");
    std::fill(raw.begin(), raw.end(), std::clamp(ate, lo, hi));
    return;
  }
  const double room = std::min(ate - lo, hi - ate);
  double scale = room / (kZ95 * sd);
  for (int step = 0; step < kMaxShrinkSteps; ++step) {
    std::size_t inside = 0;
    for (const double r : raw) {
      const double v = ate + scale * (r - m);
      if (v >= lo && v <= hi) ++inside;
    }
    if (static_cast<double>(inside) >= mass_inside * static_cast<double>(n)) {
      break;
    }
    scale *= kShrink;
  }
  for (auto& r : raw) r = std::clamp(ate + scale * (r - m), lo, hi);
}

}  // namespace

void SimConfig::validate() const {
  if (!(propensity > 0.0 && propensity < 1.0)) {
    throw config_error("sim.propensity must lie in (0, 1)");
  }
  if (!(tau_c_min < tau_c_max) || !(tau_v_min < tau_v_max)) {
    throw config_error("truncation ranges must be non-empty");
  }
  if (!(ate_conversion > tau_c_min && ate_conversion < tau_c_max)) {
    throw config_error("sim.ate_conversion must lie inside its range");
  }
  if (!(ate_value > tau_v_min && ate_value < tau_v_max)) {
    throw config_error("sim.ate_value must lie inside its range");
  }
  if (!(mass_inside > 0.0 && mass_inside <= 1.0)) {
    throw config_error("sim.mass_inside must lie in (0, 1]");
  }
  if (!(value_floor > 0.0)) throw config_error("sim.value_floor must be > 0");
  if (hidden < 1) throw config_error("sim.hidden must be >= 1");
  if (!(base_conversion > 0.0 && base_conversion < 1.0)) {
    throw config_error("sim.base_conversion must lie in (0, 1)");
  }
  if (!(value_q05 > 0.0 && value_q05 < value_median &&
        value_median < value_q95)) {
    throw config_error("sim value quantiles must satisfy 0 < q05 < median < q95");
  }
}

EffectWeights draw_effect_weights(std::size_t k, std::size_t hidden,
                                  std::uint64_t seed) {
  if (k < 1 || hidden < 1) {
    throw invalid_argument("draw_effect_weights: k and hidden must be >= 1");
  }
  EffectWeights w;
  w.k = k;
  w.hidden = hidden;
  Rng rng(derive_seed(seed, "effect_weights"));
  auto draw = [&](std::size_t count) {
    std::vector<double> out(count);
    for (auto& v : out) v = rng.normal();
    return out;
  };
  w.conversion_w1 = draw(k * hidden);
  w.conversion_w2 = draw(hidden);
  w.value_w1 = draw(k * hidden);
  w.value_w2 = draw(hidden);
  return w;
}

std::vector<double> raw_effect_scores(const Matrix& x_tau,
                                      const std::vector<double>& w1,
                                      const std::vector<double>& w2,
                                      std::size_t hidden) {
  const std::size_t k = x_tau.cols();
  if (w1.size() != k * hidden || w2.size() != hidden) {
    throw invalid_argument("effect weights do not conform to x_tau");
  }
  std::vector<double> out(x_tau.rows());
  for (std::size_t i = 0; i < x_tau.rows(); ++i) {
    double score = 0.0;
    for (std::size_t h = 0; h < hidden; ++h) {
      double a = 0.0;
      for (std::size_t j = 0; j < k; ++j) a += x_tau(i, j) * w1[j * hidden + h];
      score += sigmoid_exact(a) * w2[h];
    }
    out[i] = score;
  }
  return out;
}

IteDraw simulate_ite(const Matrix& x_tau, const EffectWeights& weights,
                     const SimConfig& cfg) {
  if (x_tau.cols() != weights.k) {
    throw invalid_argument("simulate_ite: x_tau has " +
                           std::to_string(x_tau.cols()) + " columns, weights expect " +
                           std::to_string(weights.k));
  }
  IteDraw out;
  out.tau_c = raw_effect_scores(x_tau, weights.conversion_w1,
                                weights.conversion_w2, weights.hidden);
  out.tau_v = raw_effect_scores(x_tau, weights.value_w1, weights.value_w2,
                                weights.hidden);
  scale_effect(out.tau_c, cfg.ate_conversion, cfg.tau_c_min, cfg.tau_c_max,
               cfg.mass_inside, "conversion effect", out.warnings);
  scale_effect(out.tau_v, cfg.ate_value, cfg.tau_v_min, cfg.tau_v_max,
               cfg.mass_inside, "value effect", out.warnings);
  return out;
}

std::size_t GroundTruth::row_of(std::int64_t id) const {
  if (index_.size() != ids.size()) {
    throw invalid_argument("ground truth index is stale; call rebuild_index");
  }
  const auto it = index_.find(id);
  if (it == index_.end()) {
    throw data_error("ground truth has no id " + std::to_string(id));
  }
  return it->second;
}

void GroundTruth::rebuild_index() {
  index_.clear();
  index_.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!index_.emplace(ids[i], i).second) {
      throw data_error("ground truth: duplicate id " + std::to_string(ids[i]));
    }
  }
}

GroundTruth GroundTruth::subset(std::span<const std::size_t> rows) const {
  GroundTruth out;
  for (const auto r : rows) {
    out.ids.push_back(ids.at(r));
    out.p0.push_back(p0[r]);
    out.p1.push_back(p1[r]);
    out.v0.push_back(v0[r]);
    out.v1.push_back(v1[r]);
    out.tau_c.push_back(tau_c[r]);
    out.tau_v.push_back(tau_v[r]);
    out.tau.push_back(tau[r]);
  }
  out.rebuild_index();
  return out;
}

std::string truth_to_csv(const GroundTruth& truth) {
  std::string out = "id,p0,p1,v0,v1,tau_c,tau_v,tau\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out += std::to_string(truth.ids[i]);
    for (const double v : {truth.p0[i], truth.p1[i], truth.v0[i], truth.v1[i],
                           truth.tau_c[i], truth.tau_v[i], truth.tau[i]}) {
      out += ',';
      out += format_exact(v);
    }
    out += '\n';
  }
  return out;
}

GroundTruth parse_truth_csv(std::string_view text, const std::string& source) {
  GroundTruth truth;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (!have_header) {
      if (line != "id,p0,p1,v0,v1,tau_c,tau_v,tau") {
        throw data_error(where + ": header must be 'id,p0,p1,v0,v1,tau_c,tau_v,tau'");
      }
      have_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 8) {
      throw data_error(where + ": expected 8 fields, got " +
                       std::to_string(fields.size()));
    }
    const auto id = parse_int(fields[0]);
    if (!id) throw data_error(where + ": id is not an integer");
    double values[7];
    for (int k = 0; k < 7; ++k) {
      const auto v = parse_double(fields[k + 1]);
      if (!v || !std::isfinite(*v)) throw data_error(where + ": malformed number");
      values[k] = *v;
    }
    if (values[0] < 0.0 || values[0] > 1.0 || values[1] < 0.0 || values[1] > 1.0) {
      throw data_error(where + ": probabilities must lie in [0, 1]");
    }
    if (values[2] < 0.0 || values[3] < 0.0) {
      throw data_error(where + ": values must be non-negative");
    }
    truth.ids.push_back(*id);
    truth.p0.push_back(values[0]);
    truth.p1.push_back(values[1]);
    truth.v0.push_back(values[2]);
    truth.v1.push_back(values[3]);
    truth.tau_c.push_back(values[4]);
    truth.tau_v.push_back(values[5]);
    truth.tau.push_back(values[6]);
  }
  if (!have_header) throw data_error(source + ": missing header");
  truth.rebuild_index();
  return truth;
}

void write_truth_csv(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path.string());
  out << truth_to_csv(truth);
  if (!out) throw io_error("write failed for " + path.string());
}

GroundTruth load_truth_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_truth_csv(buffer.str(), path.string());
}

Matrix standardize_columns(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  const double n = static_cast<double>(x.rows());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) m += x(i, j);
    m /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) ss += (x(i, j) - m) * (x(i, j) - m);
    const double sd = std::sqrt(ss / n);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      out(i, j) = sd > 0.0 ? (x(i, j) - m) / sd : 0.0;
    }
  }
  return out;
}

Dataset generate_base_outcomes(const CovariateTable& covariates,
                               const SimConfig& cfg, std::uint64_t seed) {
  const std::size_t n = covariates.size();
  if (n == 0) throw invalid_argument("generate_base_outcomes: no rows");
  const Matrix f = generator_features(covariates);

  std::vector<double> eta(n);
  for (std::size_t i = 0; i < n; ++i) {
    eta[i] = linear_score(f, i, kConversionTerms);
    if (f.cols() > std::max(kInteractionA, kInteractionB)) {
      eta[i] += kConversionInteraction * f(i, kInteractionA) * f(i, kInteractionB);
    }
  }
  const double intercept = calibrate_intercept(eta, cfg.base_conversion);

  Rng rng(derive_seed(seed, "base_outcomes"));
  std::vector<int> c(n);
  std::vector<std::size_t> converters;
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = rng.bernoulli(sigmoid_exact(intercept + eta[i])) ? 1 : 0;
    if (c[i] == 1) converters.push_back(i);
  }

  // Rank-normal ordering score, mixed with fresh noise into a standard normal
  // z, mapped through a two-piece exponential that hits the configured
  // median and 5% / 95% quantiles exactly.
  std::vector<double> score;
  score.reserve(converters.size());
  for (const auto i : converters) score.push_back(linear_score(f, i, kValueTerms));
  const auto ranks = average_ranks(score);
  const double m = static_cast<double>(converters.size());
  const double lower = std::log(cfg.value_median / cfg.value_q05) / kZ95;
  const double upper = std::log(cfg.value_q95 / cfg.value_median) / kZ95;
  std::vector<double> v(n, 0.0);
  for (std::size_t k = 0; k < converters.size(); ++k) {
    const double s = normal_quantile((ranks[k] - 0.5) / m);
    const double z = kValueSignal * s + kValueNoise * rng.normal();
    v[converters[k]] =
        round6(cfg.value_median * std::exp(z * (z < 0.0 ? lower : upper)));
  }

  std::vector<CustomerRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = records[i];
    r.id = covariates.ids[i];
    const auto row = covariates.x.row(i);
    r.x.assign(row.begin(), row.end());
    r.t = 0;
    r.c = c[i];
    r.v = v[i];
  }
  return Dataset(covariates.schema, std::move(records));
}

NuisanceModels fit_nuisance(const Dataset& base, const GbtParams& params) {
  if (base.empty()) throw data_error("fit_nuisance: empty base data");
  const Matrix x = base.covariates();
  const auto c = base.conversions();
  std::vector<std::size_t> converters;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base[i].c == 1) converters.push_back(i);
  }
  if (converters.empty()) {
    throw data_error("fit_nuisance: base data has no converters");
  }
  NuisanceModels out;
  out.p_model = fit_gbt(x, c, std::nullopt, GbtTask::kClassification, params);
  std::vector<double> v;
  v.reserve(converters.size());
  for (const auto i : converters) v.push_back(base[i].v);
  out.v_model = fit_gbt(x.select_rows(converters), v, std::nullopt,
                        GbtTask::kRegression, params);
  return out;
}

Campaign generate_campaign(const CovariateTable& covariates,
                           const NuisanceModels& nuisance, const IteDraw& ite,
                           const SimConfig& cfg, std::uint64_t seed) {
  const std::size_t n = covariates.size();
  if (ite.tau_c.size() != n || ite.tau_v.size() != n) {
    throw invalid_argument("generate_campaign: effects not aligned to rows");
  }
  if (!(cfg.propensity >= 0.0 && cfg.propensity <= 1.0)) {
    throw invalid_argument("generate_campaign: propensity must lie in [0, 1]");
  }
  const auto p_hat = nuisance.p_model.predict(covariates.x);
  const auto v_hat = nuisance.v_model.predict(covariates.x);

  Campaign out;
  auto& truth = out.truth;
  truth.ids = covariates.ids;
  truth.p0.resize(n);
  truth.p1.resize(n);
  truth.v0.resize(n);
  truth.v1.resize(n);
  truth.tau_c.resize(n);
  truth.tau_v.resize(n);
  truth.tau.resize(n);
  Rng rng(derive_seed(seed, "campaign"));
  std::vector<CustomerRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p0 = std::clamp(p_hat[i], 0.0, 1.0);
    const double p1 = std::clamp(p0 + ite.tau_c[i], 0.0, 1.0);
    const double v0 = std::max(v_hat[i], cfg.value_floor);
    const double v1 = std::max(v0 + ite.tau_v[i], cfg.value_floor);
    truth.p0[i] = p0;
    truth.p1[i] = p1;
    truth.v0[i] = v0;
    truth.v1[i] = v1;
    // The realized differences never exceed the drawn effects, but p1 - p0
    // can land one ulp outside the window when the draw sits on a bound.
    truth.tau_c[i] = std::clamp(p1 - p0, cfg.tau_c_min, cfg.tau_c_max);
    truth.tau_v[i] = std::clamp(v1 - v0, cfg.tau_v_min, cfg.tau_v_max);
    truth.tau[i] = p1 * v1 - p0 * v0;

    auto& r = records[i];
    r.id = covariates.ids[i];
    const auto row = covariates.x.row(i);
    r.x.assign(row.begin(), row.end());
    r.t = rng.bernoulli(cfg.propensity) ? 1 : 0;
    r.c = rng.bernoulli(r.t == 1 ? p1 : p0) ? 1 : 0;
    r.v = r.c == 1 ? round6(r.t == 1 ? v1 : v0) : 0.0;
  }
  truth.rebuild_index();
  out.data = Dataset(covariates.schema, std::move(records));
  return out;
}

SimulationRun simulate(std::size_t n, std::size_t p, const SimConfig& cfg) {
  cfg.validate();
  const auto covariates =
      generate_covariates(n, p, derive_seed(cfg.seed, "covariates"));
  SimulationRun run;
  run.base = generate_base_outcomes(covariates, cfg, cfg.seed);
  const auto nuisance = fit_nuisance(run.base, cfg.nuisance);
  const auto weights =
      draw_effect_weights(kEffectCovariates, cfg.hidden, cfg.seed);
  const Matrix x_tau =
      standardize_columns(covariates.x.select_columns(0, kEffectCovariates));
  const auto ite = simulate_ite(x_tau, weights, cfg);
  run.warnings = ite.warnings;
  run.campaign = generate_campaign(covariates, nuisance, ite, cfg, cfg.seed);
  return run;
}

}  // namespace rdtarget
