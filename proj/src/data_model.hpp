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

// Customer data: records, CSV interchange, fold plans and the synthetic
// covariate generator.

#ifndef RDTARGET_DATA_MODEL_HPP_
#define RDTARGET_DATA_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "common/matrix.hpp"

namespace rdtarget {

// One customer: covariates, treatment flag, conversion flag and the observed
// value (zero unless the customer converted).
struct CustomerRecord {
  std::int64_t id = 0;
  std::vector<double> x;
  int t = 0;
  int c = 0;
  double v = 0.0;

  // Observed profit before treatment costs.
  double y() const { return c == 1 ? v : 0.0; }
};

// Immutable after construction; the constructor enforces the record
// invariants (c = 0 implies v = 0, binary flags, shared dimension, unique ids).
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> schema, std::vector<CustomerRecord> records);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t p() const { return schema_.size(); }
  const std::vector<std::string>& schema() const { return schema_; }
  const std::vector<CustomerRecord>& records() const { return records_; }
  const CustomerRecord& operator[](std::size_t row) const {
    return records_[row];
  }

  // Row index of `id`, or -1.
  std::ptrdiff_t row_of(std::int64_t id) const;

  Matrix covariates() const;
  std::vector<std::int64_t> ids() const;
  std::vector<double> outcomes() const;
  std::vector<double> treatments() const;
  std::vector<double> conversions() const;
  std::vector<double> values() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  std::vector<std::size_t> rows_where_treated(int t) const;

 private:
  std::vector<std::string> schema_;
  std::vector<CustomerRecord> records_;
  std::unordered_map<std::int64_t, std::size_t> index_;
};

// Default covariate names x0..x{p-1}.
std::vector<std::string> default_schema(std::size_t p);

Dataset load_csv(const std::filesystem::path& path);
void write_csv(const Dataset& data, const std::filesystem::path& path);
// Parses CSV text; `source` names the input in error messages.
Dataset parse_csv(std::string_view text, const std::string& source);
std::string to_csv(const Dataset& data);

// Assignment of every row to one of k folds, aligned with the dataset rows.
struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> ids;
  std::vector<int> fold;

  int fold_of(std::int64_t id) const;
  std::vector<std::size_t> rows_in(int f) const;
  std::vector<std::size_t> rows_not_in(int f) const;
};

// Stratified on (t, c): every fold gets each stratum's rows within +-1, and
// fold sizes differ by at most one.
FoldPlan make_folds(const Dataset& data, int k, std::uint64_t seed);

// Covariates without treatment or outcomes.
struct CovariateTable {
  std::vector<std::string> schema;
  std::vector<std::int64_t> ids;
  Matrix x;

  std::size_t size() const { return ids.size(); }
};

enum class FeatureKind { kBinary, kCount, kPositive };

// Marginal law of one synthetic covariate. Every feature is driven by a
// standard-normal score w = loading * u + sqrt(1 - loading^2) * z, where u is
// a customer-level engagement factor shared by all features:
//   binary:   1 if Phi(w) > 1 - rate           (mean = rate)
//   count:    Poisson(rate * exp(spread * w - spread^2 / 2))   (mean = rate)
//   positive: exp(location + spread * w)       (mean = exp(location + spread^2/2))
struct FeatureSpec {
  const char* name;
  FeatureKind kind;
  double rate;
  double location;
  double spread;
  double loading;

  double expected_mean() const;
};

// Number of leading covariates that drive the simulated treatment effects.
inline constexpr std::size_t kEffectCovariates = 11;

// Kind and parameters of covariate j of a p-dimensional generator population.
FeatureSpec feature_spec(std::size_t j);

CovariateTable generate_covariates(std::size_t n, std::size_t p,
                                   std::uint64_t seed);

}  // namespace rdtarget

#endif  // RDTARGET_DATA_MODEL_HPP_
