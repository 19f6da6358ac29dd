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

#include "causal.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "common/error.hpp"
#include "common/text.hpp"

namespace rdtarget {
namespace {

constexpr const char* kFormatTag = "rdtarget-model";
constexpr int kFormatVersion = 1;

struct ArmRows {
  std::vector<std::size_t> control, treated;
  std::vector<std::size_t> control_converters, treated_converters;
};

ArmRows split_arms(const Dataset& data) {
  ArmRows arms;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data[i];
    (r.t == 1 ? arms.treated : arms.control).push_back(i);
    if (r.c == 1) {
      (r.t == 1 ? arms.treated_converters : arms.control_converters).push_back(i);
    }
  }
  return arms;
}

void require_arms(const ArmRows& arms, const char* who) {
  if (arms.treated.empty() || arms.control.empty()) {
    throw data_error(std::string(who) + ": training data must contain both arms");
  }
}

void require_converters(const ArmRows& arms, const char* who) {
  if (arms.treated_converters.empty() || arms.control_converters.empty()) {
    throw data_error(std::string(who) +
                     ": each arm needs at least one converter");
  }
}

std::vector<double> gather(const std::vector<double>& values,
                           const std::vector<std::size_t>& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto r : rows) out.push_back(values[r]);
  return out;
}

std::vector<double> floored(std::vector<double> v, double floor) {
  for (auto& x : v) x = std::max(x, floor);
  return v;
}

GbtModel fit_value(const Matrix& x_conv, const std::vector<double>& v_conv,
                   const std::vector<double>& p_conv, double w_clip,
                   const GbtParams& params) {
  const auto w = ipw_weights(p_conv, w_clip);
  return fit_gbt(x_conv, v_conv, std::span<const double>(w),
                 GbtTask::kRegression, params);
}

std::string next_token(std::istream& in, const char* what) {
  std::string token;
  if (!(in >> token)) {
    throw data_error(std::string("model file: unexpected end reading ") + what);
  }
  return token;
}

void expect(std::istream& in, const std::string& expected) {
  const auto token = next_token(in, expected.c_str());
  if (token != expected) {
    throw data_error("model file: expected '" + expected + "', got '" + token +
                     "'");
  }
}

double read_number(std::istream& in, const char* what) {
  const auto token = next_token(in, what);
  const auto value = parse_double(token);
  if (!value) {
    throw data_error(std::string("model file: bad ") + what + " '" + token + "'");
  }
  return *value;
}

void write_component(std::ostream& out, const char* name, const GbtModel& m) {
  out << "component " << name << '\n';
  m.write(out);
}

GbtModel read_component(std::istream& in, const char* name) {
  expect(in, "component");
  expect(in, name);
  return GbtModel::read(in);
}

}  // namespace

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::kHurdleSingle:
      return "hurdle-single";
    case Architecture::kHurdleTwo:
      return "hurdle-two";
    case Architecture::kOnestageSingle:
      return "onestage-single";
    case Architecture::kOnestageTwo:
      return "onestage-two";
    case Architecture::kOnestageDr:
      return "onestage-dr";
    case Architecture::kAte:
      return "ate";
    case Architecture::kOracle:
      return "oracle";
  }
  return "unknown";
}

Architecture parse_architecture(const std::string& name) {
  for (const auto arch :
       {Architecture::kHurdleSingle, Architecture::kHurdleTwo,
        Architecture::kOnestageSingle, Architecture::kOnestageTwo,
        Architecture::kOnestageDr, Architecture::kAte, Architecture::kOracle}) {
    if (name == to_string(arch)) return arch;
  }
  if (name == "ate-constant") return Architecture::kAte;
  throw invalid_argument("unknown architecture '" + name + "'");
}

const std::vector<Architecture>& fitted_architectures() {
  static const std::vector<Architecture> kFitted = {
      Architecture::kHurdleSingle, Architecture::kHurdleTwo,
      Architecture::kOnestageSingle, Architecture::kOnestageTwo,
      Architecture::kOnestageDr};
  return kFitted;
}

bool has_value_scorer(Architecture arch) {
  return arch == Architecture::kHurdleSingle ||
         arch == Architecture::kHurdleTwo || arch == Architecture::kAte ||
         arch == Architecture::kOracle;
}

const GbtParams& ComponentParams::get(const std::string& name) const {
  const auto it = by_component.find(name);
  return it == by_component.end() ? fallback : it->second;
}

Matrix with_treatment(const Matrix& x, double t) {
  return x.with_constant_column(t);
}

std::vector<double> ipw_weights(std::span<const double> p, double w_clip) {
  if (!(w_clip > 0.0 && w_clip <= 1.0)) {
    throw invalid_argument("w_clip must lie in (0, 1]");
  }
  std::vector<double> w(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) w[i] = 1.0 / std::max(p[i], w_clip);
  return w;
}

int TargetingModel::component_count() const {
  switch (arch_) {
    case Architecture::kHurdleSingle:
      return 2;
    case Architecture::kHurdleTwo:
      return 4;
    case Architecture::kOnestageSingle:
      return 2;
    case Architecture::kOnestageTwo:
      return 3;
    case Architecture::kOnestageDr:
      return std::get<DrModel>(body_).propensity ? 5 : 4;
    case Architecture::kAte:
    case Architecture::kOracle:
      return 0;
  }
  return 0;
}

Scores TargetingModel::score(const Dataset& data) const {
  return score(data.ids(), data.covariates());
}

Scores TargetingModel::score(std::span<const std::int64_t> ids,
                             const Matrix& x) const {
  const std::size_t n = x.rows();
  Scores s;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, HurdleSingleModel>) {
          const Matrix x1 = with_treatment(x, 1.0);
          const Matrix x0 = with_treatment(x, 0.0);
          s.p1 = m.conversion.predict(x1);
          const auto p0 = m.conversion.predict(x0);
          s.v1 = floored(m.value.predict(x1), value_floor_);
          const auto v0 = floored(m.value.predict(x0), value_floor_);
          s.tau.resize(n);
          for (std::size_t i = 0; i < n; ++i) {
            s.tau[i] = s.p1[i] * (*s.v1)[i] - p0[i] * v0[i];
          }
        } else if constexpr (std::is_same_v<T, HurdleTwoModel>) {
          s.p1 = m.conversion1.predict(x);
          const auto p0 = m.conversion0.predict(x);
          s.v1 = floored(m.value1.predict(x), value_floor_);
          const auto v0 = floored(m.value0.predict(x), value_floor_);
          s.tau.resize(n);
          for (std::size_t i = 0; i < n; ++i) {
            s.tau[i] = s.p1[i] * (*s.v1)[i] - p0[i] * v0[i];
          }
        } else if constexpr (std::is_same_v<T, OnestageSingleModel>) {
          const auto y1 = m.outcome.predict(with_treatment(x, 1.0));
          const auto y0 = m.outcome.predict(with_treatment(x, 0.0));
          s.tau.resize(n);
          for (std::size_t i = 0; i < n; ++i) s.tau[i] = y1[i] - y0[i];
          s.p1 = m.conversion.predict(x);
        } else if constexpr (std::is_same_v<T, OnestageTwoModel>) {
          const auto y1 = m.outcome1.predict(x);
          const auto y0 = m.outcome0.predict(x);
          s.tau.resize(n);
          for (std::size_t i = 0; i < n; ++i) s.tau[i] = y1[i] - y0[i];
          s.p1 = m.conversion.predict(x);
        } else if constexpr (std::is_same_v<T, DrModel>) {
          s.tau = m.effect.predict(x);
          s.p1 = m.conversion.predict(x);
        } else if constexpr (std::is_same_v<T, AteModel>) {
          s.tau.assign(n, m.tau);
          s.p1.assign(n, m.conversion_rate);
          s.v1 = std::vector<double>(n, std::max(m.value, value_floor_));
        } else if constexpr (std::is_same_v<T, OracleModel>) {
          if (ids.size() != n) {
            throw invalid_argument("oracle scoring needs one id per row");
          }
          s.tau.resize(n);
          s.p1.resize(n);
          s.v1 = std::vector<double>(n);
          for (std::size_t i = 0; i < n; ++i) {
            const auto it = m.by_id.find(ids[i]);
            if (it == m.by_id.end()) {
              throw data_error("oracle model has no truth for id " +
                               std::to_string(ids[i]));
            }
            s.tau[i] = it->second.tau;
            s.p1[i] = it->second.p1;
            (*s.v1)[i] = it->second.v1;
          }
        }
      },
      body_);
  return s;
}

// Layout: "rdtarget-model 1", "architecture <name>", "value_floor <x>", then
// the body. Boosters are written as "component <name>" followed by the
// booster text; linear models as one "linear ..." line each.
void TargetingModel::write(std::ostream& out) const {
  out << kFormatTag << ' ' << kFormatVersion << '\n';
  out << "architecture " << to_string(arch_) << '\n';
  out << "value_floor " << format_exact(value_floor_) << '\n';
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, HurdleSingleModel>) {
          write_component(out, component::kConversionXt, m.conversion);
          write_component(out, component::kValueXt, m.value);
        } else if constexpr (std::is_same_v<T, HurdleTwoModel>) {
          write_component(out, component::kConversionT0, m.conversion0);
          write_component(out, component::kConversionT1, m.conversion1);
          write_component(out, component::kValueT0, m.value0);
          write_component(out, component::kValueT1, m.value1);
        } else if constexpr (std::is_same_v<T, OnestageSingleModel>) {
          write_component(out, component::kOutcomeXt, m.outcome);
          write_component(out, component::kConversionT1, m.conversion);
        } else if constexpr (std::is_same_v<T, OnestageTwoModel>) {
          write_component(out, "outcome_t0", m.outcome0);
          write_component(out, "outcome_t1", m.outcome1);
          write_component(out, component::kConversionT1, m.conversion);
        } else if constexpr (std::is_same_v<T, DrModel>) {
          m.mu0.write(out);
          m.mu1.write(out);
          if (m.propensity) {
            out << "propensity fitted\n";
            m.propensity->write(out);
          } else {
            out << "propensity known " << format_exact(m.known_propensity)
                << '\n';
          }
          write_component(out, component::kDrEffect, m.effect);
          write_component(out, component::kConversionT1, m.conversion);
        } else if constexpr (std::is_same_v<T, AteModel>) {
          out << "ate " << format_exact(m.tau) << ' '
              << format_exact(m.conversion_rate) << ' ' << format_exact(m.value)
              << '\n';
        } else if constexpr (std::is_same_v<T, OracleModel>) {
          std::vector<std::int64_t> ids;
          ids.reserve(m.by_id.size());
          for (const auto& [id, entry] : m.by_id) ids.push_back(id);
          std::sort(ids.begin(), ids.end());
          out << "oracle " << ids.size() << '\n';
          for (const auto id : ids) {
            const auto& e = m.by_id.at(id);
            out << id << ' ' << format_exact(e.tau) << ' ' << format_exact(e.p1)
                << ' ' << format_exact(e.v1) << '\n';
          }
        }
      },
      body_);
  out << "end-model\n";
}

TargetingModel TargetingModel::read(std::istream& in) {
  expect(in, kFormatTag);
  const auto version = next_token(in, "format version");
  if (version != std::to_string(kFormatVersion)) {
    throw incompatible("model file: unsupported format version " + version);
  }
  expect(in, "architecture");
  const auto arch = parse_architecture(next_token(in, "architecture"));
  expect(in, "value_floor");
  const double floor = read_number(in, "value_floor");
  Body body;
  switch (arch) {
    case Architecture::kHurdleSingle: {
      HurdleSingleModel m;
      m.conversion = read_component(in, component::kConversionXt);
      m.value = read_component(in, component::kValueXt);
      body = std::move(m);
      break;
    }
    case Architecture::kHurdleTwo: {
      HurdleTwoModel m;
      m.conversion0 = read_component(in, component::kConversionT0);
      m.conversion1 = read_component(in, component::kConversionT1);
      m.value0 = read_component(in, component::kValueT0);
      m.value1 = read_component(in, component::kValueT1);
      body = std::move(m);
      break;
    }
    case Architecture::kOnestageSingle: {
      OnestageSingleModel m;
      m.outcome = read_component(in, component::kOutcomeXt);
      m.conversion = read_component(in, component::kConversionT1);
      body = std::move(m);
      break;
    }
    case Architecture::kOnestageTwo: {
      OnestageTwoModel m;
      m.outcome0 = read_component(in, "outcome_t0");
      m.outcome1 = read_component(in, "outcome_t1");
      m.conversion = read_component(in, component::kConversionT1);
      body = std::move(m);
      break;
    }
    case Architecture::kOnestageDr: {
      DrModel m;
      m.mu0 = LinearModel::read(in);
      m.mu1 = LinearModel::read(in);
      expect(in, "propensity");
      const auto kind = next_token(in, "propensity kind");
      if (kind == "fitted") {
        m.propensity = LinearModel::read(in);
      } else if (kind == "known") {
        m.known_propensity = read_number(in, "known propensity");
      } else {
        throw data_error("model file: unknown propensity kind '" + kind + "'");
      }
      m.effect = read_component(in, component::kDrEffect);
      m.conversion = read_component(in, component::kConversionT1);
      body = std::move(m);
      break;
    }
    case Architecture::kAte: {
      AteModel m;
      expect(in, "ate");
      m.tau = read_number(in, "ate tau");
      m.conversion_rate = read_number(in, "ate conversion rate");
      m.value = read_number(in, "ate value");
      body = m;
      break;
    }
    case Architecture::kOracle: {
      OracleModel m;
      expect(in, "oracle");
      const double count = read_number(in, "oracle size");
      if (!(count >= 0.0)) throw data_error("model file: bad oracle size");
      for (std::size_t k = 0; k < static_cast<std::size_t>(count); ++k) {
        const auto id = parse_int(next_token(in, "oracle id"));
        if (!id) throw data_error("model file: bad oracle id");
        OracleModel::Entry e{};
        e.tau = read_number(in, "oracle tau");
        e.p1 = read_number(in, "oracle p1");
        e.v1 = read_number(in, "oracle v1");
        m.by_id.emplace(*id, e);
      }
      body = std::move(m);
      break;
    }
  }
  expect(in, "end-model");
  return TargetingModel(arch, std::move(body), floor);
}

TargetingModel fit_hurdle_single(const Dataset& train,
                                 const ComponentParams& params,
                                 const CausalOptions& options) {
  const auto arms = split_arms(train);
  require_arms(arms, "hurdle-single");
  require_converters(arms, "hurdle-single");
  const Matrix xt = train.covariates().with_column(train.treatments());
  HurdleSingleModel m;
  m.conversion = fit_gbt(xt, train.conversions(), std::nullopt,
                         GbtTask::kClassification,
                         params.get(component::kConversionXt));
  std::vector<std::size_t> converters = arms.control_converters;
  converters.insert(converters.end(), arms.treated_converters.begin(),
                    arms.treated_converters.end());
  std::sort(converters.begin(), converters.end());
  const Matrix x_conv = xt.select_rows(converters);
  m.value = fit_value(x_conv, gather(train.values(), converters),
                      m.conversion.predict(x_conv), options.w_clip,
                      params.get(component::kValueXt));
  return TargetingModel(Architecture::kHurdleSingle, std::move(m),
                        options.value_floor);
}

TargetingModel fit_hurdle_two(const Dataset& train,
                              const ComponentParams& params,
                              const CausalOptions& options) {
  const auto arms = split_arms(train);
  require_arms(arms, "hurdle-two");
  require_converters(arms, "hurdle-two");
  const Matrix x = train.covariates();
  const auto c = train.conversions();
  const auto v = train.values();
  HurdleTwoModel m;
  m.conversion0 = fit_gbt(x.select_rows(arms.control), gather(c, arms.control),
                          std::nullopt, GbtTask::kClassification,
                          params.get(component::kConversionT0));
  m.conversion1 = fit_gbt(x.select_rows(arms.treated), gather(c, arms.treated),
                          std::nullopt, GbtTask::kClassification,
                          params.get(component::kConversionT1));
  const Matrix x0 = x.select_rows(arms.control_converters);
  const Matrix x1 = x.select_rows(arms.treated_converters);
  m.value0 = fit_value(x0, gather(v, arms.control_converters),
                       m.conversion0.predict(x0), options.w_clip,
                       params.get(component::kValueT0));
  m.value1 = fit_value(x1, gather(v, arms.treated_converters),
                       m.conversion1.predict(x1), options.w_clip,
                       params.get(component::kValueT1));
  return TargetingModel(Architecture::kHurdleTwo, std::move(m),
                        options.value_floor);
}

GbtModel fit_conversion_separate(const Dataset& train, const GbtParams& params) {
  const auto treated = train.rows_where_treated(1);
  if (treated.empty()) {
    throw data_error("conversion model: training data has no treated rows");
  }
  return fit_gbt(train.covariates().select_rows(treated),
                 gather(train.conversions(), treated), std::nullopt,
                 GbtTask::kClassification, params);
}

TargetingModel fit_onestage_single(const Dataset& train,
                                   const ComponentParams& params,
                                   const CausalOptions& options,
                                   const GbtModel* conversion) {
  const auto arms = split_arms(train);
  require_arms(arms, "onestage-single");
  OnestageSingleModel m;
  const Matrix xt = train.covariates().with_column(train.treatments());
  m.outcome = fit_gbt(xt, train.outcomes(), std::nullopt, GbtTask::kRegression,
                      params.get(component::kOutcomeXt));
  m.conversion = conversion ? *conversion
                            : fit_conversion_separate(
                                  train, params.get(component::kConversionT1));
  return TargetingModel(Architecture::kOnestageSingle, std::move(m),
                        options.value_floor);
}

TargetingModel fit_onestage_two(const Dataset& train,
                                const ComponentParams& params,
                                const CausalOptions& options,
                                const GbtModel* conversion) {
  const auto arms = split_arms(train);
  require_arms(arms, "onestage-two");
  const Matrix x = train.covariates();
  const auto y = train.outcomes();
  const auto& p = params.get(component::kOutcomeArms);
  OnestageTwoModel m;
  m.outcome0 = fit_gbt(x.select_rows(arms.control), gather(y, arms.control),
                       std::nullopt, GbtTask::kRegression, p);
  m.outcome1 = fit_gbt(x.select_rows(arms.treated), gather(y, arms.treated),
                       std::nullopt, GbtTask::kRegression, p);
  m.conversion = conversion ? *conversion
                            : fit_conversion_separate(
                                  train, params.get(component::kConversionT1));
  return TargetingModel(Architecture::kOnestageTwo, std::move(m),
                        options.value_floor);
}

double dr_pseudo_outcome(double y, double t, double mu0, double mu1, double e) {
  return mu1 - mu0 + t * (y - mu1) / e - (1.0 - t) * (y - mu0) / (1.0 - e);
}

DrTransform build_dr_transform(const Dataset& train,
                               const CausalOptions& options) {
  const auto arms = split_arms(train);
  require_arms(arms, "dr transform");
  const double clip = options.propensity_clip;
  if (!(clip > 0.0 && clip < 0.5)) {
    throw invalid_argument("propensity_clip must lie in (0, 0.5)");
  }
  const Matrix x = train.covariates();
  const auto y = train.outcomes();
  const auto t = train.treatments();
  DrTransform out;
  out.mu0 = fit_linear(x.select_rows(arms.control), gather(y, arms.control),
                       LinkFunction::kIdentity);
  out.mu1 = fit_linear(x.select_rows(arms.treated), gather(y, arms.treated),
                       LinkFunction::kIdentity);
  std::vector<double> e(train.size(), options.assignment_propensity);
  if (!options.known_propensity) {
    out.propensity = fit_linear(x, t, LinkFunction::kLogistic);
    e = out.propensity->predict(x);
  }
  const auto mu0 = out.mu0.predict(x);
  const auto mu1 = out.mu1.predict(x);
  out.y_dr.resize(train.size());
  out.e_hat.resize(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    out.e_hat[i] = std::clamp(e[i], clip, 1.0 - clip);
    out.y_dr[i] = dr_pseudo_outcome(y[i], t[i], mu0[i], mu1[i], out.e_hat[i]);
  }
  return out;
}

TargetingModel fit_onestage_dr(const Dataset& train,
                               const ComponentParams& params,
                               const CausalOptions& options,
                               const GbtModel* conversion) {
  auto transform = build_dr_transform(train, options);
  DrModel m;
  m.mu0 = std::move(transform.mu0);
  m.mu1 = std::move(transform.mu1);
  m.propensity = std::move(transform.propensity);
  m.known_propensity = options.assignment_propensity;
  m.effect = fit_gbt(train.covariates(), transform.y_dr, std::nullopt,
                     GbtTask::kRegression, params.get(component::kDrEffect));
  m.conversion = conversion ? *conversion
                            : fit_conversion_separate(
                                  train, params.get(component::kConversionT1));
  return TargetingModel(Architecture::kOnestageDr, std::move(m),
                        options.value_floor);
}

TargetingModel make_ate_model(const Dataset& train) {
  double y1 = 0.0, y0 = 0.0, n1 = 0.0, n0 = 0.0, c1 = 0.0, v1 = 0.0;
  for (const auto& r : train.records()) {
    if (r.t == 1) {
      y1 += r.y();
      n1 += 1.0;
      c1 += r.c;
      v1 += r.v;
    } else {
      y0 += r.y();
      n0 += 1.0;
    }
  }
  if (n1 == 0.0 || n0 == 0.0) {
    throw data_error("ate model: training data must contain both arms");
  }
  AteModel m;
  m.tau = y1 / n1 - y0 / n0;
  m.conversion_rate = c1 / n1;
  m.value = c1 > 0.0 ? v1 / c1 : 0.0;
  return TargetingModel(Architecture::kAte, m, CausalOptions{}.value_floor);
}

TargetingModel make_oracle_model(const GroundTruth& truth) {
  OracleModel m;
  m.by_id.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    m.by_id.emplace(truth.ids[i],
                    OracleModel::Entry{truth.tau[i], truth.p1[i], truth.v1[i]});
  }
  return TargetingModel(Architecture::kOracle, std::move(m),
                        CausalOptions{}.value_floor);
}

TargetingModel fit_architecture(Architecture arch, const Dataset& train,
                                const ComponentParams& params,
                                const CausalOptions& options,
                                const GbtModel* conversion,
                                const GroundTruth* truth) {
  switch (arch) {
    case Architecture::kHurdleSingle:
      return fit_hurdle_single(train, params, options);
    case Architecture::kHurdleTwo:
      return fit_hurdle_two(train, params, options);
    case Architecture::kOnestageSingle:
      return fit_onestage_single(train, params, options, conversion);
    case Architecture::kOnestageTwo:
      return fit_onestage_two(train, params, options, conversion);
    case Architecture::kOnestageDr:
      return fit_onestage_dr(train, params, options, conversion);
    case Architecture::kAte:
      return make_ate_model(train);
    case Architecture::kOracle:
      if (!truth) throw invalid_argument("oracle model requires ground truth");
      return make_oracle_model(*truth);
  }
  throw invalid_argument("unknown architecture");
}

}  // namespace rdtarget
