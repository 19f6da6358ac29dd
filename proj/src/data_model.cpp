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

#include "data_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/random.hpp"
#include "common/text.hpp"

namespace rdtarget {
namespace {

void validate_record(const CustomerRecord& r, std::size_t p,
                     const std::string& where) {
  if (r.x.size() != p) {
    throw data_error(where + ": expected " + std::to_string(p) +
                     " covariates, got " + std::to_string(r.x.size()));
  }
  for (const double value : r.x) {
    if (!std::isfinite(value)) {
      throw data_error(where + ": covariate is not finite");
    }
  }
  if (r.t != 0 && r.t != 1) throw data_error(where + ": t must be 0 or 1");
  if (r.c != 0 && r.c != 1) throw data_error(where + ": c must be 0 or 1");
  if (!std::isfinite(r.v) || r.v < 0.0) {
    throw data_error(where + ": v must be a non-negative number");
  }
  if (r.c == 0 && r.v != 0.0) {
    throw data_error(where + ": invariant violated, c = 0 requires v = 0");
  }
}

std::string expected_header(std::size_t p) {
  std::string header = "id";
  for (std::size_t j = 0; j < p; ++j) header += ",x" + std::to_string(j);
  header += ",t,c,v";
  return header;
}

// Thirty covariates standing in for a web shop's session log. The first
// kEffectCovariates describe the entry channel and earlier visits.
constexpr std::array<FeatureSpec, 30> kFeatures = {{
    {"returning_visitor", FeatureKind::kBinary, 0.45, 0.0, 0.0, 0.7},
    {"previous_visits", FeatureKind::kCount, 3.0, 0.0, 0.8, 0.8},
    {"previous_purchases", FeatureKind::kCount, 0.6, 0.0, 0.9, 0.7},
    {"days_since_last_visit", FeatureKind::kPositive, 0.0, 2.3, 1.0, -0.4},
    {"entry_search", FeatureKind::kBinary, 0.35, 0.0, 0.0, 0.0},
    {"entry_ad", FeatureKind::kBinary, 0.25, 0.0, 0.0, -0.2},
    {"entry_direct", FeatureKind::kBinary, 0.20, 0.0, 0.0, 0.5},
    {"previous_session_minutes", FeatureKind::kPositive, 0.0, 1.5, 0.8, 0.5},
    {"previous_page_views", FeatureKind::kCount, 12.0, 0.0, 0.7, 0.7},
    {"previous_avg_basket", FeatureKind::kPositive, 0.0, 3.8, 0.7, 0.3},
    {"previous_coupon_use", FeatureKind::kBinary, 0.15, 0.0, 0.0, 0.4},
    {"clicks", FeatureKind::kCount, 9.0, 0.0, 0.5, 0.5},
    {"basket_items", FeatureKind::kCount, 0.8, 0.0, 1.0, 0.5},
    {"basket_value", FeatureKind::kPositive, 0.0, 3.5, 1.0, 0.4},
    {"product_views", FeatureKind::kCount, 4.0, 0.0, 0.6, 0.5},
    {"session_seconds", FeatureKind::kPositive, 0.0, 5.3, 0.7, 0.5},
    {"logged_in", FeatureKind::kBinary, 0.30, 0.0, 0.0, 0.6},
    {"mobile", FeatureKind::kBinary, 0.55, 0.0, 0.0, -0.1},
    {"weekend", FeatureKind::kBinary, 0.28, 0.0, 0.0, 0.0},
    {"sale_page_views", FeatureKind::kCount, 1.2, 0.0, 0.8, 0.2},
    {"search_queries", FeatureKind::kCount, 1.5, 0.0, 0.8, 0.3},
    {"wishlist_items", FeatureKind::kCount, 0.4, 0.0, 1.0, 0.5},
    {"avg_dwell_seconds", FeatureKind::kPositive, 0.0, 3.4, 0.6, 0.2},
    {"newsletter", FeatureKind::kBinary, 0.20, 0.0, 0.0, 0.5},
    {"historic_return_rate", FeatureKind::kPositive, 0.0, -2.0, 0.8, 0.0},
    {"filter_uses", FeatureKind::kCount, 2.0, 0.0, 0.7, 0.3},
    {"brand_views", FeatureKind::kCount, 2.5, 0.0, 0.6, 0.3},
    {"scroll_depth", FeatureKind::kPositive, 0.0, 0.5, 0.5, 0.2},
    {"app_user", FeatureKind::kBinary, 0.12, 0.0, 0.0, 0.4},
    {"referral", FeatureKind::kBinary, 0.08, 0.0, 0.0, 0.0},
}};

// Filler covariates beyond the thirtieth, unrelated to engagement.
constexpr std::array<FeatureSpec, 3> kFiller = {{
    {"noise_binary", FeatureKind::kBinary, 0.5, 0.0, 0.0, 0.0},
    {"noise_count", FeatureKind::kCount, 2.0, 0.0, 0.5, 0.0},
    {"noise_positive", FeatureKind::kPositive, 0.0, 0.0, 0.5, 0.0},
}};

double round6(double value) { return std::round(value * 1e6) / 1e6; }

}  // namespace

Dataset::Dataset(std::vector<std::string> schema,
                 std::vector<CustomerRecord> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    validate_record(r, schema_.size(), "record id " + std::to_string(r.id));
    if (!index_.emplace(r.id, i).second) {
      throw data_error("duplicate id " + std::to_string(r.id));
    }
  }
}

std::ptrdiff_t Dataset::row_of(std::int64_t id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

Matrix Dataset::covariates() const {
  Matrix out(records_.size(), p());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    std::copy(records_[i].x.begin(), records_[i].x.end(), out.row(i).begin());
  }
  return out;
}

std::vector<std::int64_t> Dataset::ids() const {
  std::vector<std::int64_t> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.id);
  return out;
}

std::vector<double> Dataset::outcomes() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.y());
  return out;
}

std::vector<double> Dataset::treatments() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.t);
  return out;
}

std::vector<double> Dataset::conversions() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.c);
  return out;
}

std::vector<double> Dataset::values() const {
  std::vector<double> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.v);
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<CustomerRecord> picked;
  picked.reserve(rows.size());
  for (const auto row : rows) picked.push_back(records_.at(row));
  return Dataset(schema_, std::move(picked));
}

std::vector<std::size_t> Dataset::rows_where_treated(int t) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].t == t) out.push_back(i);
  }
  return out;
}

std::vector<std::string> default_schema(std::size_t p) {
  std::vector<std::string> out;
  out.reserve(p);
  for (std::size_t j = 0; j < p; ++j) out.push_back("x" + std::to_string(j));
  return out;
}

Dataset parse_csv(std::string_view text, const std::string& source) {
  std::vector<CustomerRecord> records;
  std::size_t p = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto fields = split(line, ',');
    if (!have_header) {
      if (fields.size() < 4) throw data_error(where + ": malformed header");
      p = fields.size() - 4;
      if (line != expected_header(p)) {
        throw data_error(where + ": header must be '" + expected_header(p) +
                         "'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != p + 4) {
      throw data_error(where + ": expected " + std::to_string(p + 4) +
                       " fields, got " + std::to_string(fields.size()));
    }
    CustomerRecord r;
    const auto id = parse_int(fields[0]);
    if (!id) throw data_error(where + ": id is not an integer");
    r.id = *id;
    r.x.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
      const auto value = parse_double(fields[1 + j]);
      if (!value) throw data_error(where + ": x" + std::to_string(j) + " is not a number");
      r.x[j] = *value;
    }
    const auto t = parse_int(fields[p + 1]);
    const auto c = parse_int(fields[p + 2]);
    const auto v = parse_double(fields[p + 3]);
    if (!t || !c || !v) throw data_error(where + ": malformed t, c or v");
    r.t = static_cast<int>(*t);
    r.c = static_cast<int>(*c);
    r.v = *v;
    if (*t != r.t || *c != r.c) throw data_error(where + ": t or c out of range");
    validate_record(r, p, where);
    records.push_back(std::move(r));
  }
  if (!have_header) throw data_error(source + ": missing header");
  try {
    return Dataset(default_schema(p), std::move(records));
  } catch (const Error& e) {
    throw data_error(source + ": " + e.what());
  }
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), path.string());
}

std::string to_csv(const Dataset& data) {
  std::string out = expected_header(data.p());
  out += '\n';
  for (const auto& r : data.records()) {
    out += std::to_string(r.id);
    for (const double value : r.x) {
      out += ',';
      out += format_fixed6(value);
    }
    out += ',';
    out += std::to_string(r.t);
    out += ',';
    out += std::to_string(r.c);
    out += ',';
    out += format_fixed6(r.v);
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write " + path.string());
  out << to_csv(data);
  if (!out) throw io_error("write failed for " + path.string());
}

int FoldPlan::fold_of(std::int64_t id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return fold[i];
  }
  throw invalid_argument("id " + std::to_string(id) + " not in fold plan");
}

std::vector<std::size_t> FoldPlan::rows_in(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == f) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::rows_not_in(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != f) out.push_back(i);
  }
  return out;
}

FoldPlan make_folds(const Dataset& data, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > data.size()) {
    throw invalid_argument("fold count must lie in [2, " +
                           std::to_string(data.size()) + "], got " +
                           std::to_string(k));
  }
  std::array<std::vector<std::size_t>, 4> strata;
  for (std::size_t i = 0; i < data.size(); ++i) {
    strata[2 * data[i].t + data[i].c].push_back(i);
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.ids = data.ids();
  plan.fold.assign(data.size(), -1);
  Rng rng(derive_seed(seed, "folds"));
  // Shuffle within strata, then deal the concatenation round-robin.
  std::size_t position = 0;
  for (auto& stratum : strata) {
    rng.shuffle(std::span<std::size_t>(stratum));
    for (const auto row : stratum) {
      plan.fold[row] = static_cast<int>(position % static_cast<std::size_t>(k));
      ++position;
    }
  }
  return plan;
}

double FeatureSpec::expected_mean() const {
  switch (kind) {
    case FeatureKind::kBinary:
    case FeatureKind::kCount:
      return rate;
    case FeatureKind::kPositive:
      return std::exp(location + 0.5 * spread * spread);
  }
  return 0.0;
}

FeatureSpec feature_spec(std::size_t j) {
  if (j < kFeatures.size()) return kFeatures[j];
  return kFiller[(j - kFeatures.size()) % kFiller.size()];
}

CovariateTable generate_covariates(std::size_t n, std::size_t p,
                                   std::uint64_t seed) {
  if (n < 1) throw invalid_argument("generate_covariates: n must be >= 1");
  if (p < kEffectCovariates + 1) {
    throw invalid_argument("generate_covariates: p must be >= 12");
  }
  CovariateTable table;
  table.schema = default_schema(p);
  table.ids.resize(n);
  table.x = Matrix(n, p);
  std::vector<FeatureSpec> specs;
  for (std::size_t j = 0; j < p; ++j) specs.push_back(feature_spec(j));

  Rng rng(derive_seed(seed, "covariates"));
  for (std::size_t i = 0; i < n; ++i) {
    table.ids[i] = static_cast<std::int64_t>(i + 1);
    const double engagement = rng.normal();
    for (std::size_t j = 0; j < p; ++j) {
      const auto& spec = specs[j];
      const double w = spec.loading * engagement +
                       std::sqrt(1.0 - spec.loading * spec.loading) * rng.normal();
      double value = 0.0;
      switch (spec.kind) {
        case FeatureKind::kBinary:
          value = normal_cdf(w) > 1.0 - spec.rate ? 1.0 : 0.0;
          break;
        case FeatureKind::kCount: {
          const double mean = spec.rate * std::exp(spec.spread * w -
                                                   0.5 * spec.spread * spec.spread);
          value = static_cast<double>(rng.poisson(mean));
          break;
        }
        case FeatureKind::kPositive:
          value = round6(std::exp(spec.location + spec.spread * w));
          break;
      }
      table.x(i, j) = value;
    }
  }
  return table;
}

}  // namespace rdtarget
