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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "common/error.hpp"
#include "data_model.hpp"
#include "test_util.hpp"

namespace rdtarget {
namespace {

using testing::dataset;
using testing::record;

constexpr const char* kThreeRows =
    "id,x0,x1,t,c,v\n"
    "1,0.500000,2.000000,1,1,12.250000\n"
    "2,1.000000,0.000000,0,0,0.000000\n"
    "3,-3.125000,7.000000,1,0,0.000000\n";

TEST(CsvTest, WellFormedFileLoadsAndRoundTrips) {
  const auto data = parse_csv(kThreeRows, "mem");
  ASSERT_EQ(data.size(), 3u);
  EXPECT_EQ(data.p(), 2u);
  EXPECT_EQ(data[0].id, 1);
  EXPECT_DOUBLE_EQ(data[0].v, 12.25);
  EXPECT_EQ(data[2].t, 1);
  EXPECT_EQ(to_csv(data), kThreeRows);

  const auto dir = testing::scratch_dir("csv");
  write_csv(data, dir / "customers.csv");
  const auto again = load_csv(dir / "customers.csv");
  EXPECT_EQ(to_csv(again), kThreeRows);
}

TEST(CsvTest, TreatmentOutOfDomainNamesTheLine) {
  const std::string text = "id,x0,t,c,v\n1,0.5,1,0,0\n2,0.5,2,0,0\n";
  try {
    parse_csv(text, "bad.csv");
    FAIL() << "expected a data error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
    EXPECT_NE(std::string(e.what()).find("bad.csv:3"), std::string::npos)
        << e.what();
  }
}

TEST(CsvTest, NonConverterWithValueViolatesInvariant) {
  const std::string text = "id,x0,t,c,v\n1,0.5,1,0,5.0\n";
  try {
    parse_csv(text, "inv.csv");
    FAIL() << "expected an invariant error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
    EXPECT_NE(std::string(e.what()).find("invariant"), std::string::npos);
  }
}

TEST(CsvTest, RejectsWrongHeaderFieldCountAndDuplicateIds) {
  EXPECT_THROW(parse_csv("id,a,t,c,v\n1,0,0,0,0\n", "h"), Error);
  EXPECT_THROW(parse_csv("id,x0,t,c,v\n1,0,0,0\n", "f"), Error);
  EXPECT_THROW(parse_csv("id,x0,t,c,v\n1,0,0,0,0\n1,1,1,0,0\n", "d"), Error);
  EXPECT_THROW(parse_csv("id,x0,t,c,v\n1,0,0,1,-1\n", "neg"), Error);
  EXPECT_THROW(parse_csv("", "empty"), Error);
}

TEST(CsvTest, FixedDecimalValuesRoundTripBitExactly) {
  const auto covariates = generate_covariates(200, 14, 5);
  std::vector<CustomerRecord> rows;
  for (std::size_t i = 0; i < covariates.size(); ++i) {
    auto x = std::vector<double>(covariates.x.row(i).begin(),
                                 covariates.x.row(i).end());
    const int c = i % 3 == 0 ? 1 : 0;
    rows.push_back(record(covariates.ids[i], x, static_cast<int>(i % 2), c,
                          c ? 10.125 + static_cast<double>(i) : 0.0));
  }
  const auto data = dataset(rows);
  const auto again = parse_csv(to_csv(data), "mem");
  ASSERT_EQ(again.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(again[i].x, data[i].x) << "row " << i;
    EXPECT_EQ(again[i].v, data[i].v);
  }
}

TEST(FoldTest, TenRowsFiveFoldsOfTwo) {
  std::vector<CustomerRecord> rows;
  for (int i = 0; i < 10; ++i) rows.push_back(record(i + 1, {0.0}, i % 2, 0, 0.0));
  const auto plan = make_folds(dataset(rows), 5, 7);
  for (int f = 0; f < 5; ++f) EXPECT_EQ(plan.rows_in(f).size(), 2u);
}

TEST(FoldTest, DeterministicAndAPartition) {
  const auto data = testing::random_campaign(257, 2, 3);
  const auto a = make_folds(data, 4, 11);
  const auto b = make_folds(data, 4, 11);
  EXPECT_EQ(a.fold, b.fold);
  std::set<std::int64_t> seen;
  for (int f = 0; f < 4; ++f) {
    for (const auto r : a.rows_in(f)) EXPECT_TRUE(seen.insert(data[r].id).second);
  }
  EXPECT_EQ(seen.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(a.fold_of(data[i].id), a.fold[i]);
  }
}

TEST(FoldTest, StrataBalancedWithinOne) {
  // 100 rows, 50 treated: each of five folds gets 10 +- 1 treated.
  std::vector<CustomerRecord> rows;
  for (int i = 0; i < 100; ++i) {
    const int c = i % 7 == 0 ? 1 : 0;
    rows.push_back(record(i + 1, {0.0}, i < 50 ? 1 : 0, c, c ? 1.0 : 0.0));
  }
  const auto data = dataset(rows);
  const auto plan = make_folds(data, 5, 99);
  std::size_t min_size = data.size(), max_size = 0;
  for (int f = 0; f < 5; ++f) {
    const auto members = plan.rows_in(f);
    min_size = std::min(min_size, members.size());
    max_size = std::max(max_size, members.size());
    int counts[4] = {0, 0, 0, 0};
    for (const auto r : members) ++counts[2 * data[r].t + data[r].c];
    int treated = counts[2] + counts[3];
    EXPECT_GE(treated, 9);
    EXPECT_LE(treated, 11);
    // Stratum totals are 50-7=43 control non-converters, 7 control
    // converters, 43 treated non-converters, 7 treated converters.
    const double expect[4] = {43.0 / 5, 7.0 / 5, 43.0 / 5, 7.0 / 5};
    for (int s = 0; s < 4; ++s) EXPECT_LE(std::abs(counts[s] - expect[s]), 1.0);
  }
  EXPECT_LE(max_size - min_size, 1u);
}

TEST(FoldTest, RejectsOutOfRangeK) {
  const auto data = testing::random_campaign(5, 1, 1);
  EXPECT_THROW(make_folds(data, 1, 0), Error);
  EXPECT_THROW(make_folds(data, 6, 0), Error);
}

TEST(GeneratorTest, ShapeAndDeterminism) {
  const auto a = generate_covariates(5, 30, 42);
  EXPECT_EQ(a.size(), 5u);
  EXPECT_EQ(a.x.rows(), 5u);
  EXPECT_EQ(a.x.cols(), 30u);
  const auto b = generate_covariates(5, 30, 42);
  const auto flat = [](const CovariateTable& t) {
    return std::vector<double>(t.x.data().begin(), t.x.data().end());
  };
  EXPECT_EQ(flat(a), flat(b));
  const auto c = generate_covariates(5, 30, 43);
  EXPECT_NE(flat(a), flat(c));
  EXPECT_THROW(generate_covariates(5, 11, 1), Error);
  EXPECT_THROW(generate_covariates(0, 30, 1), Error);
}

TEST(GeneratorTest, FeatureKindsHaveTheirSupport) {
  const auto cov = generate_covariates(2000, 33, 8);
  for (std::size_t j = 0; j < 33; ++j) {
    const auto spec = feature_spec(j);
    for (std::size_t i = 0; i < cov.size(); ++i) {
      const double v = cov.x(i, j);
      switch (spec.kind) {
        case FeatureKind::kBinary:
          EXPECT_TRUE(v == 0.0 || v == 1.0);
          break;
        case FeatureKind::kCount:
          EXPECT_TRUE(v >= 0.0 && v == std::floor(v));
          break;
        case FeatureKind::kPositive:
          EXPECT_GE(v, 0.0);
          break;
      }
    }
  }
}

TEST(GeneratorTest, MarginalMeansMatchTheirLaws) {
  // Oracle: the closed-form mean of each marginal law.
  const auto cov = generate_covariates(100000, 30, 2024);
  for (std::size_t j = 0; j < 30; ++j) {
    const auto spec = feature_spec(j);
    double mean = 0.0;
    for (std::size_t i = 0; i < cov.size(); ++i) mean += cov.x(i, j);
    mean /= static_cast<double>(cov.size());
    const double expected = spec.expected_mean();
    if (spec.kind == FeatureKind::kBinary) {
      EXPECT_NEAR(mean, expected, 0.01) << spec.name;
    } else {
      EXPECT_NEAR(mean, expected, 0.05 * expected) << spec.name;
    }
  }
}

}  // namespace
}  // namespace rdtarget
