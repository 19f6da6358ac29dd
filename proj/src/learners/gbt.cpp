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

#include "learners/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "common/error.hpp"
#include "common/text.hpp"

namespace rdtarget {
namespace {

constexpr double kMarginClamp = 30.0;
constexpr double kProbClamp = 1e-6;
// A split must improve the children score by this relative amount.
constexpr double kRelativeMinGain = 1e-10;
constexpr int kMaxStepHalvings = 30;
constexpr const char* kFormatTag = "rdtarget-gbt";
constexpr int kFormatVersion = 1;

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct NodeStats {
  double g = 0.0;
  double h = 0.0;
};

double leaf_value(const NodeStats& s, double l2) {
  const double denom = s.h + l2;
  return denom > 0.0 ? -s.g / denom : 0.0;
}

double weighted_loss(GbtTask task, std::span<const std::uint32_t> rows,
                     std::span<const double> y, std::span<const double> w,
                     std::span<const double> margin) {
  double total = 0.0;
  double weight = 0.0;
  for (const auto i : rows) {
    double loss = 0.0;
    if (task == GbtTask::kRegression) {
      const double r = y[i] - margin[i];
      loss = r * r;
    } else {
      const double p = std::clamp(sigmoid(margin[i]), 1e-15, 1.0 - 1e-15);
      loss = y[i] > 0.5 ? -std::log(p) : -std::log(1.0 - p);
    }
    total += w[i] * loss;
    weight += w[i];
  }
  return total / weight;
}

// Presorted view of one feature over the active rows. Columns with few
// distinct values are also coded by value rank so a per-node histogram over
// the distinct values replaces the sorted sweep; both searches are exact.
struct FeatureIndex {
  std::vector<std::uint32_t> sorted_rows;
  std::vector<double> sorted_values;
  std::vector<double> levels;       // distinct values, ascending (coded only)
  std::vector<std::uint8_t> codes;  // per row rank into levels (coded only)
  bool coded = false;
};

constexpr std::size_t kMaxCodedLevels = 256;

std::vector<FeatureIndex> index_features(const Matrix& x,
                                         const std::vector<std::uint32_t>& active) {
  std::vector<FeatureIndex> out(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    auto& f = out[j];
    f.sorted_rows = active;
    std::stable_sort(f.sorted_rows.begin(), f.sorted_rows.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return x(a, j) < x(b, j);
                     });
    f.sorted_values.resize(f.sorted_rows.size());
    for (std::size_t k = 0; k < f.sorted_rows.size(); ++k) {
      f.sorted_values[k] = x(f.sorted_rows[k], j);
    }
    std::vector<double> levels;
    for (const double v : f.sorted_values) {
      if (levels.empty() || v > levels.back()) levels.push_back(v);
      if (levels.size() > kMaxCodedLevels) break;
    }
    if (levels.size() <= kMaxCodedLevels) {
      f.coded = true;
      f.levels = std::move(levels);
      f.codes.assign(x.rows(), 0);
      std::size_t level = 0;
      for (std::size_t k = 0; k < f.sorted_rows.size(); ++k) {
        while (f.sorted_values[k] > f.levels[level]) ++level;
        f.codes[f.sorted_rows[k]] = static_cast<std::uint8_t>(level);
      }
      f.sorted_rows.clear();
      f.sorted_values.clear();
    }
  }
  return out;
}

// Running left-side sums of one node during a scan in ascending value order.
struct ScanState {
  double gl = 0.0;
  double hl = 0.0;
  double last = 0.0;
  bool seen = false;
};

// Offers the boundary between the values already scanned and `value`.
inline void offer_split(ScanState& scan, const NodeStats& node,
                        double parent_score, double value, int feature,
                        const GbtParams& params, SplitCandidate& best) {
  const double gr = node.g - scan.gl;
  const double hr = node.h - scan.hl;
  const double dl = scan.hl + params.l2;
  const double dr = hr + params.l2;
  if (scan.hl < params.min_leaf_weight || hr < params.min_leaf_weight ||
      !(dl > 0.0) || !(dr > 0.0)) {
    return;
  }
  const double children = scan.gl * scan.gl / dl + gr * gr / dr;
  const double gain = children - parent_score;
  if (gain > best.gain && gain > kRelativeMinGain * children) {
    double threshold = scan.last + 0.5 * (value - scan.last);
    if (!(threshold > scan.last)) threshold = value;
    best = {gain, feature, threshold};
  }
}

// Grows one tree on (g, h) over the active rows. Returns the tree and leaves
// the final node index of every active row in `node_of`.
Tree grow_tree(const Matrix& x, const std::vector<FeatureIndex>& features,
               std::span<const std::uint32_t> active,
               std::span<const double> g, std::span<const double> h,
               const GbtParams& params, std::vector<int>& node_of) {
  Tree tree;
  std::vector<NodeStats> stats(1);
  tree.nodes.emplace_back();
  for (const auto i : active) {
    node_of[i] = 0;
    stats[0].g += g[i];
    stats[0].h += h[i];
  }

  std::vector<int> frontier = {0};
  std::vector<int> slot(x.rows(), -1);
  std::vector<double> hist_g;
  std::vector<double> hist_h;
  std::vector<std::uint32_t> hist_n;
  for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
    const std::size_t width = frontier.size();
    std::vector<int> slot_of(tree.nodes.size(), -1);
    for (std::size_t s = 0; s < width; ++s) {
      slot_of[frontier[s]] = static_cast<int>(s);
    }
    for (const auto i : active) slot[i] = slot_of[node_of[i]];
    std::vector<SplitCandidate> best(width);
    std::vector<double> parent_score(width);
    for (std::size_t s = 0; s < width; ++s) {
      const auto& st = stats[frontier[s]];
      parent_score[s] =
          st.h + params.l2 > 0.0 ? st.g * st.g / (st.h + params.l2) : 0.0;
    }

    std::vector<ScanState> scan(width);
    for (std::size_t j = 0; j < features.size(); ++j) {
      const auto& f = features[j];
      const int feature = static_cast<int>(j);
      std::fill(scan.begin(), scan.end(), ScanState{});
      if (f.coded) {
        const std::size_t levels = f.levels.size();
        hist_g.assign(width * levels, 0.0);
        hist_h.assign(width * levels, 0.0);
        hist_n.assign(width * levels, 0);
        for (const auto i : active) {
          const int s = slot[i];
          if (s < 0) continue;
          const std::size_t cell = static_cast<std::size_t>(s) * levels + f.codes[i];
          hist_g[cell] += g[i];
          hist_h[cell] += h[i];
          ++hist_n[cell];
        }
        for (std::size_t s = 0; s < width; ++s) {
          auto& st = scan[s];
          const auto& node = stats[frontier[s]];
          for (std::size_t b = 0; b < levels; ++b) {
            const std::size_t cell = s * levels + b;
            if (hist_n[cell] == 0) continue;
            const double value = f.levels[b];
            if (st.seen) {
              offer_split(st, node, parent_score[s], value, feature, params,
                          best[s]);
            }
            st.gl += hist_g[cell];
            st.hl += hist_h[cell];
            st.last = value;
            st.seen = true;
          }
        }
      } else {
        for (std::size_t k = 0; k < f.sorted_rows.size(); ++k) {
          const auto i = f.sorted_rows[k];
          const int s = slot[i];
          if (s < 0) continue;
          auto& st = scan[s];
          const double value = f.sorted_values[k];
          if (st.seen && value > st.last) {
            offer_split(st, stats[frontier[s]], parent_score[s], value,
                        feature, params, best[s]);
          }
          st.gl += g[i];
          st.hl += h[i];
          st.last = value;
          st.seen = true;
        }
      }
    }

    std::vector<int> next;
    for (std::size_t s = 0; s < width; ++s) {
      if (best[s].feature < 0) continue;
      const int id = frontier[s];
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stats.emplace_back();
      stats.emplace_back();
      auto& node = tree.nodes[id];
      node.feature = best[s].feature;
      node.threshold = best[s].threshold;
      node.left = left;
      node.right = left + 1;
      next.push_back(left);
      next.push_back(left + 1);
    }
    if (next.empty()) break;
    for (const auto i : active) {
      const auto& node = tree.nodes[node_of[i]];
      if (node.is_leaf()) continue;
      const int child =
          x(i, node.feature) < node.threshold ? node.left : node.right;
      node_of[i] = child;
      stats[child].g += g[i];
      stats[child].h += h[i];
    }
    frontier = std::move(next);
  }

  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    if (tree.nodes[id].is_leaf()) {
      tree.nodes[id].value = leaf_value(stats[id], params.l2);
    }
  }
  return tree;
}

void validate_params(const GbtParams& params) {
  if (params.n_trees < 0) throw invalid_argument("n_trees must be >= 0");
  if (params.max_depth < 1) throw invalid_argument("max_depth must be >= 1");
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0)) {
    throw invalid_argument("learning_rate must lie in (0, 1]");
  }
  if (!(params.min_leaf_weight >= 0.0)) {
    throw invalid_argument("min_leaf_weight must be >= 0");
  }
  if (!(params.l2 >= 0.0)) throw invalid_argument("l2 must be >= 0");
}

std::string next_token(std::istream& in, const char* what) {
  std::string token;
  if (!(in >> token)) {
    throw data_error(std::string("gbt model: unexpected end of input reading ") +
                     what);
  }
  return token;
}

void expect_token(std::istream& in, const std::string& expected) {
  const auto token = next_token(in, expected.c_str());
  if (token != expected) {
    throw data_error("gbt model: expected '" + expected + "', got '" + token +
                     "'");
  }
}

double read_double(std::istream& in, const char* what) {
  const auto token = next_token(in, what);
  const auto value = parse_double(token);
  if (!value || !std::isfinite(*value)) {
    throw data_error(std::string("gbt model: bad ") + what + " '" + token + "'");
  }
  return *value;
}

std::int64_t read_int(std::istream& in, const char* what) {
  const auto token = next_token(in, what);
  const auto value = parse_int(token);
  if (!value) {
    throw data_error(std::string("gbt model: bad ") + what + " '" + token + "'");
  }
  return *value;
}

}  // namespace

std::string to_string(GbtTask task) {
  return task == GbtTask::kRegression ? "regression" : "classification";
}

std::string describe(const GbtParams& params) {
  std::ostringstream out;
  out << "n_trees=" << params.n_trees << " max_depth=" << params.max_depth
      << " learning_rate=" << format_exact(params.learning_rate)
      << " min_leaf_weight=" << format_exact(params.min_leaf_weight);
  return out.str();
}

double sigmoid(double margin) {
  const double m = std::clamp(margin, -kMarginClamp, kMarginClamp);
  return 1.0 / (1.0 + std::exp(-m));
}

double Tree::eval(std::span<const double> x) const {
  int id = 0;
  while (!nodes[id].is_leaf()) {
    const auto& node = nodes[id];
    id = x[node.feature] < node.threshold ? node.left : node.right;
  }
  return nodes[id].value;
}

int Tree::depth() const {
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const auto& node = nodes[id];
    if (node.is_leaf()) continue;
    level[node.left] = level[node.right] = level[id] + 1;
    deepest = std::max(deepest, level[id] + 1);
  }
  return deepest;
}

double GbtModel::margin(std::span<const double> x, int max_trees) const {
  if (x.size() != n_features_) {
    throw invalid_argument("gbt predict: expected " +
                           std::to_string(n_features_) + " features, got " +
                           std::to_string(x.size()));
  }
  const std::size_t count =
      max_trees < 0 ? trees_.size()
                    : std::min(trees_.size(), static_cast<std::size_t>(max_trees));
  double sum = 0.0;
  for (std::size_t k = 0; k < count; ++k) sum += trees_[k].eval(x);
  return base_score_ + params_.learning_rate * sum;
}

std::vector<double> GbtModel::predict_margin(const Matrix& x,
                                             int max_trees) const {
  if (x.cols() != n_features_) {
    throw invalid_argument("gbt predict: expected " +
                           std::to_string(n_features_) + " features, got " +
                           std::to_string(x.cols()));
  }
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = margin(x.row(i), max_trees);
  return out;
}

std::vector<double> GbtModel::predict(const Matrix& x, int max_trees) const {
  auto out = predict_margin(x, max_trees);
  if (task_ == GbtTask::kClassification) {
    for (auto& value : out) value = sigmoid(value);
  }
  return out;
}

double GbtModel::predict_one(std::span<const double> x, int max_trees) const {
  const double m = margin(x, max_trees);
  return task_ == GbtTask::kClassification ? sigmoid(m) : m;
}

GbtModel GbtModel::from_parts(GbtTask task, GbtParams params,
                              double base_score, std::size_t n_features,
                              std::vector<Tree> trees) {
  GbtModel model;
  model.task_ = task;
  params.n_trees = static_cast<int>(trees.size());
  model.params_ = params;
  model.base_score_ = base_score;
  model.n_features_ = n_features;
  model.trees_ = std::move(trees);
  return model;
}

// Layout, whitespace separated:
//   rdtarget-gbt 1
//   task <regression|classification>
//   params <n_trees> <max_depth> <learning_rate> <min_leaf_weight> <l2>
//   base_score <b>
//   n_features <p>
//   trees <K>
//   then per tree "tree <nodes>" followed by one node per line, either
//   "split <feature> <threshold> <left> <right>" or "leaf <value>", and a
//   closing "end".
void GbtModel::write(std::ostream& out) const {
  out << kFormatTag << ' ' << kFormatVersion << '\n';
  out << "task " << to_string(task_) << '\n';
  out << "params " << params_.n_trees << ' ' << params_.max_depth << ' '
      << format_exact(params_.learning_rate) << ' '
      << format_exact(params_.min_leaf_weight) << ' '
      << format_exact(params_.l2) << '\n';
  out << "base_score " << format_exact(base_score_) << '\n';
  out << "n_features " << n_features_ << '\n';
  out << "trees " << trees_.size() << '\n';
  for (const auto& tree : trees_) {
    out << "tree " << tree.nodes.size() << '\n';
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) {
        out << "leaf " << format_exact(node.value) << '\n';
      } else {
        out << "split " << node.feature << ' ' << format_exact(node.threshold)
            << ' ' << node.left << ' ' << node.right << '\n';
      }
    }
  }
  out << "end\n";
}

GbtModel GbtModel::read(std::istream& in) {
  expect_token(in, kFormatTag);
  const auto version = read_int(in, "format version");
  if (version != kFormatVersion) {
    throw incompatible("gbt model: unsupported format version " +
                       std::to_string(version));
  }
  GbtModel model;
  expect_token(in, "task");
  const auto task = next_token(in, "task");
  if (task == "regression") {
    model.task_ = GbtTask::kRegression;
  } else if (task == "classification") {
    model.task_ = GbtTask::kClassification;
  } else {
    throw data_error("gbt model: unknown task '" + task + "'");
  }
  expect_token(in, "params");
  model.params_.n_trees = static_cast<int>(read_int(in, "n_trees"));
  model.params_.max_depth = static_cast<int>(read_int(in, "max_depth"));
  model.params_.learning_rate = read_double(in, "learning_rate");
  model.params_.min_leaf_weight = read_double(in, "min_leaf_weight");
  model.params_.l2 = read_double(in, "l2");
  expect_token(in, "base_score");
  model.base_score_ = read_double(in, "base_score");
  expect_token(in, "n_features");
  const auto p = read_int(in, "n_features");
  if (p < 0) throw data_error("gbt model: negative n_features");
  model.n_features_ = static_cast<std::size_t>(p);
  expect_token(in, "trees");
  const auto k = read_int(in, "tree count");
  if (k < 0) throw data_error("gbt model: negative tree count");
  for (std::int64_t t = 0; t < k; ++t) {
    expect_token(in, "tree");
    const auto m = read_int(in, "node count");
    if (m < 1) throw data_error("gbt model: empty tree");
    Tree tree;
    tree.nodes.resize(static_cast<std::size_t>(m));
    for (auto& node : tree.nodes) {
      const auto kind = next_token(in, "node kind");
      if (kind == "leaf") {
        node.value = read_double(in, "leaf value");
      } else if (kind == "split") {
        node.feature = static_cast<int>(read_int(in, "split feature"));
        node.threshold = read_double(in, "split threshold");
        node.left = static_cast<int>(read_int(in, "left child"));
        node.right = static_cast<int>(read_int(in, "right child"));
        if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= model.n_features_ ||
            node.left <= 0 || node.right <= 0 || node.left >= m || node.right >= m) {
          throw data_error("gbt model: split node out of range");
        }
      } else {
        throw data_error("gbt model: unknown node kind '" + kind + "'");
      }
    }
    model.trees_.push_back(std::move(tree));
  }
  expect_token(in, "end");
  if (static_cast<std::size_t>(model.params_.n_trees) != model.trees_.size()) {
    throw data_error("gbt model: tree count disagrees with params");
  }
  return model;
}

GbtModel fit_gbt(const Matrix& x, std::span<const double> y,
                 std::optional<std::span<const double>> weights, GbtTask task,
                 const GbtParams& params) {
  validate_params(params);
  const std::size_t n = x.rows();
  if (n == 0) throw invalid_argument("fit_gbt: empty training data");
  if (y.size() != n) throw invalid_argument("fit_gbt: y length mismatch");
  if (weights && weights->size() != n) {
    throw invalid_argument("fit_gbt: weight length mismatch");
  }
  for (const double value : y) {
    if (!std::isfinite(value)) throw invalid_argument("fit_gbt: y not finite");
    if (task == GbtTask::kClassification && value != 0.0 && value != 1.0) {
      throw invalid_argument("fit_gbt: classification labels must be 0 or 1");
    }
  }

  std::vector<double> w(n, 1.0);
  if (weights) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double value = (*weights)[i];
      if (!std::isfinite(value) || value < 0.0) {
        throw invalid_argument("fit_gbt: weights must be finite and >= 0");
      }
      total += value;
    }
    if (!(total > 0.0)) throw invalid_argument("fit_gbt: all weights are zero");
    const double mean = total / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = (*weights)[i] / mean;
  }

  std::vector<std::uint32_t> active;
  active.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] > 0.0) active.push_back(static_cast<std::uint32_t>(i));
  }

  GbtModel model;
  model.task_ = task;
  model.params_ = params;
  model.n_features_ = x.cols();

  double wsum = 0.0;
  double wy = 0.0;
  for (const auto i : active) {
    wsum += w[i];
    wy += w[i] * y[i];
  }
  const double mean_y = wy / wsum;
  if (task == GbtTask::kRegression) {
    model.base_score_ = mean_y;
  } else {
    const double r = std::clamp(mean_y, kProbClamp, 1.0 - kProbClamp);
    model.base_score_ = std::log(r / (1.0 - r));
  }

  std::vector<double> margin(n, model.base_score_);
  model.train_loss_.push_back(weighted_loss(task, active, y, w, margin));
  if (params.n_trees == 0) return model;

  const auto features = index_features(x, active);

  std::vector<double> g(n, 0.0);
  std::vector<double> h(n, 0.0);
  std::vector<int> node_of(n, -1);
  std::vector<double> trial(n, 0.0);
  for (int round = 0; round < params.n_trees; ++round) {
    for (const auto i : active) {
      if (task == GbtTask::kRegression) {
        g[i] = w[i] * (margin[i] - y[i]);
        h[i] = w[i];
      } else {
        const double prob = sigmoid(margin[i]);
        g[i] = w[i] * (prob - y[i]);
        h[i] = w[i] * prob * (1.0 - prob);
      }
    }
    Tree tree = grow_tree(x, features, active, g, h, params, node_of);

    // Halve the step until the training loss does not increase.
    const double previous = model.train_loss_.back();
    std::vector<double> scaled(tree.nodes.size());
    double scale = 1.0;
    double loss = previous;
    bool accepted = false;
    for (int attempt = 0; attempt <= kMaxStepHalvings; ++attempt) {
      for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
        scaled[id] = tree.nodes[id].value * scale;
      }
      for (const auto i : active) {
        trial[i] = margin[i] + params.learning_rate * scaled[node_of[i]];
      }
      loss = weighted_loss(task, active, y, w, trial);
      if (loss <= previous) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (accepted) {
      for (const auto i : active) margin[i] = trial[i];
    } else {
      std::fill(scaled.begin(), scaled.end(), 0.0);
      loss = previous;
    }
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      if (tree.nodes[id].is_leaf()) tree.nodes[id].value = scaled[id];
    }
    model.train_loss_.push_back(loss);
    model.trees_.push_back(std::move(tree));
  }
  return model;
}

}  // namespace rdtarget
