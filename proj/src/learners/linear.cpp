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

#include "learners/linear.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "common/error.hpp"
#include "common/text.hpp"
#include "learners/gbt.hpp"

namespace rdtarget {
namespace {

constexpr int kMaxIrlsIterations = 100;
constexpr double kIrlsTolerance = 1e-10;

}  // namespace

double LinearModel::predict_one(std::span<const double> x) const {
  if (x.size() != weights.size()) {
    throw invalid_argument("linear predict: expected " +
                           std::to_string(weights.size()) + " features, got " +
                           std::to_string(x.size()));
  }
  double eta = intercept;
  for (std::size_t j = 0; j < x.size(); ++j) eta += weights[j] * x[j];
  return link == LinkFunction::kLogistic ? sigmoid(eta) : eta;
}

std::vector<double> LinearModel::predict(const Matrix& x) const {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict_one(x.row(i));
  return out;
}

void LinearModel::write(std::ostream& out) const {
  out << "linear " << (link == LinkFunction::kLogistic ? "logistic" : "identity")
      << ' ' << weights.size() << ' ' << format_exact(intercept);
  for (const double w : weights) out << ' ' << format_exact(w);
  out << '\n';
}

LinearModel LinearModel::read(std::istream& in) {
  std::string tag;
  std::string link_name;
  std::string count;
  std::string intercept;
  if (!(in >> tag >> link_name >> count >> intercept) || tag != "linear") {
    throw data_error("linear model: malformed header");
  }
  LinearModel model;
  if (link_name == "logistic") {
    model.link = LinkFunction::kLogistic;
  } else if (link_name != "identity") {
    throw data_error("linear model: unknown link '" + link_name + "'");
  }
  const auto p = parse_int(count);
  const auto b = parse_double(intercept);
  if (!p || *p < 0 || !b) throw data_error("linear model: malformed header");
  model.intercept = *b;
  model.weights.resize(static_cast<std::size_t>(*p));
  for (auto& w : model.weights) {
    std::string token;
    if (!(in >> token)) throw data_error("linear model: truncated weights");
    const auto value = parse_double(token);
    if (!value) throw data_error("linear model: bad weight '" + token + "'");
    w = *value;
  }
  return model;
}

LinearModel fit_linear(const Matrix& x, std::span<const double> y,
                       LinkFunction link,
                       std::optional<std::span<const double>> weights) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n == 0) throw invalid_argument("fit_linear: empty training data");
  if (y.size() != n) throw invalid_argument("fit_linear: y length mismatch");
  if (weights && weights->size() != n) {
    throw invalid_argument("fit_linear: weight length mismatch");
  }
  for (const double value : y) {
    if (!std::isfinite(value)) throw invalid_argument("fit_linear: y not finite");
    if (link == LinkFunction::kLogistic && value != 0.0 && value != 1.0) {
      throw invalid_argument("fit_linear: logistic labels must be 0 or 1");
    }
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(p);
  for (std::size_t j = 0; j < p; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += x(i, j);
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (x(i, j) - m) * (x(i, j) - m);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    mean[j] = m;
    if (sd > 0.0) scale[j] = sd;
  }

  Eigen::MatrixXd z(n, p + 1);
  Eigen::VectorXd target(n);
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (std::size_t i = 0; i < n; ++i) {
    z(i, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) z(i, j + 1) = (x(i, j) - mean[j]) / scale[j];
    target[i] = y[i];
    if (weights) {
      const double value = (*weights)[i];
      if (!std::isfinite(value) || value < 0.0) {
        throw invalid_argument("fit_linear: weights must be finite and >= 0");
      }
      w[i] = value;
    }
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  if (link == LinkFunction::kIdentity) {
    Eigen::MatrixXd gram = z.transpose() * w.asDiagonal() * z;
    for (std::size_t j = 1; j <= p; ++j) gram(j, j) += kLinearRidge;
    const Eigen::VectorXd rhs = z.transpose() * w.cwiseProduct(target);
    beta = gram.ldlt().solve(rhs);
  } else {
    for (int iter = 0; iter < kMaxIrlsIterations; ++iter) {
      const Eigen::VectorXd eta = z * beta;
      Eigen::VectorXd grad_weight(n);
      Eigen::VectorXd curvature(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double prob = sigmoid(eta[i]);
        grad_weight[i] = w[i] * (target[i] - prob);
        curvature[i] = w[i] * prob * (1.0 - prob);
      }
      Eigen::VectorXd grad = z.transpose() * grad_weight - kLinearRidge * beta;
      Eigen::MatrixXd hessian = z.transpose() * curvature.asDiagonal() * z;
      hessian.diagonal().array() += kLinearRidge;
      const Eigen::VectorXd step = hessian.ldlt().solve(grad);
      beta += step;
      if (step.cwiseAbs().maxCoeff() < kIrlsTolerance) break;
    }
  }
  if (!beta.allFinite()) throw invalid_argument("fit_linear: solve failed");

  LinearModel model;
  model.link = link;
  model.weights.resize(p);
  model.intercept = beta[0];
  for (std::size_t j = 0; j < p; ++j) {
    model.weights[j] = beta[j + 1] / scale[j];
    model.intercept -= model.weights[j] * mean[j];
  }
  return model;
}

}  // namespace rdtarget
