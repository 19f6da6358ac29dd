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

#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "common/error.hpp"

namespace rdtarget {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw invalid_argument(std::string(what) + ": length mismatch (" +
                           std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

double mean(std::span<const double> values) {
  if (values.empty()) return kNaN;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double mse(std::span<const double> pred, std::span<const double> y,
           std::optional<std::span<const double>> weights) {
  require_same_length(pred.size(), y.size(), "mse");
  if (weights) require_same_length(weights->size(), y.size(), "mse");
  double total = 0.0;
  double wsum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    const double r = pred[i] - y[i];
    total += w * r * r;
    wsum += w;
  }
  return wsum > 0.0 ? total / wsum : kNaN;
}

double log_loss(std::span<const double> prob, std::span<const double> y,
                std::optional<std::span<const double>> weights) {
  require_same_length(prob.size(), y.size(), "log_loss");
  if (weights) require_same_length(weights->size(), y.size(), "log_loss");
  double total = 0.0;
  double wsum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    const double p = std::clamp(prob[i], 1e-15, 1.0 - 1e-15);
    total -= w * (y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p));
    wsum += w;
  }
  return wsum > 0.0 ? total / wsum : kNaN;
}

double transformed_outcome(double y, double t, double e) {
  if (!(e > 0.0 && e < 1.0)) {
    throw invalid_argument("transformed_outcome: e must lie in (0, 1)");
  }
  return t * y / e - (1.0 - t) * y / (1.0 - e);
}

double tol(std::span<const double> tau_hat, std::span<const double> y,
           std::span<const double> t, double e) {
  require_same_length(tau_hat.size(), y.size(), "tol");
  require_same_length(t.size(), y.size(), "tol");
  if (y.empty()) return kNaN;
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = transformed_outcome(y[i], t[i], e) - tau_hat[i];
    total += r * r;
  }
  return total / static_cast<double>(y.size());
}

double rmse(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(mse(a, b));
}

double brier(std::span<const double> prob, std::span<const double> c) {
  return mse(prob, c);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  std::size_t start = 0;
  while (start < n) {
    std::size_t end = start + 1;
    while (end < n && values[order[end]] == values[order[start]]) ++end;
    // Positions start..end-1 hold rank start+1..end; all get the mean.
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = rank;
    start = end;
  }
  return ranks;
}

double roc_auc(std::span<const double> score, std::span<const double> c) {
  require_same_length(score.size(), c.size(), "roc_auc");
  const auto ranks = average_ranks(score);
  double positives = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] > 0.5) {
      positives += 1.0;
      rank_sum += ranks[i];
    }
  }
  const double negatives = static_cast<double>(c.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) return kNaN;
  return (rank_sum - positives * (positives + 1.0) / 2.0) /
         (positives * negatives);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "spearman");
  if (a.size() < 2) return kNaN;
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double ma = mean(ra);
  const double mb = mean(rb);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return kNaN;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace rdtarget
