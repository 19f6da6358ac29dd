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

#ifndef RDTARGET_COMMON_RANDOM_HPP_
#define RDTARGET_COMMON_RANDOM_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace rdtarget {

// Name and version of the random stream construction. Written into run
// manifests; bump the version whenever any sampler below changes its output.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64+splitmix64";
inline constexpr int kRngVersion = 1;

// Derives an independent 64-bit seed for a named sub-stream.
std::uint64_t derive_seed(std::uint64_t base, std::string_view stream,
                          std::uint64_t index = 0);

// Seeded generator with samplers written out by hand. The standard library
// distributions are implementation-defined, which would make datasets differ
// across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  // Uniform on (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  std::int64_t poisson(double mean);
  // Unbiased integer in [0, n).
  std::size_t index(std::size_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Standard normal CDF.
double normal_cdf(double z);
// Inverse of normal_cdf on (0, 1).
double normal_quantile(double prob);

}  // namespace rdtarget

#endif  // RDTARGET_COMMON_RANDOM_HPP_
