// Copyright 2026 The netquant Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "netquant/readout.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "netquant/error.hpp"
#include "netquant/kernels.hpp"
#include "netquant/optimize.hpp"

namespace netquant {
namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void check_labels(BinaryLabels labels, std::size_t expected, const char* who) {
  if (labels.size() != expected) {
    throw std::invalid_argument(std::string(who) + ": label count does not match row count");
  }
  std::size_t pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument(std::string(who) + ": labels must be 0/1");
    pos += static_cast<std::size_t>(y);
  }
  if (pos == 0 || pos == labels.size()) {
    throw SingleClassError(std::string(who) +
                           ": need both classes (quantifier adjustments are undefined "
                           "without positive and negative examples)");
  }
}

}  // namespace

double logistic_objective(const Matrix& x, BinaryLabels y, double lambda,
                          std::span<const double> params, std::span<double> grad) {
  const std::size_t d = x.cols();
  const std::size_t n = x.rows();
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    double z = params[d];
    for (std::size_t j = 0; j < d; ++j) z += params[j] * r[j];
    loss += softplus(z) - (y[i] ? z : 0.0);
    const double residual = kernels::sigmoid(z) - y[i];
    for (std::size_t j = 0; j < d; ++j) grad[j] += residual * r[j];
    grad[d] += residual;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  double penalty = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    grad[j] = grad[j] * inv_n + lambda * params[j];
    penalty += params[j] * params[j];
  }
  grad[d] *= inv_n;
  return loss * inv_n + 0.5 * lambda * penalty;
}

LinearReadout train_readout(const Matrix& embeddings, BinaryLabels labels, double lambda,
                            int optimizer_budget) {
  if (!(lambda >= 0)) throw std::invalid_argument("train_readout: lambda must be >= 0");
  if (embeddings.rows() == 0) throw std::invalid_argument("train_readout: no training rows");
  check_labels(labels, embeddings.rows(), "train_readout");
  const std::size_t d = embeddings.cols();
  auto objective = [&](std::span<const double> p, std::span<double> g) {
    return logistic_objective(embeddings, labels, lambda, p, g);
  };
  LbfgsOptions options;
  options.max_iterations = optimizer_budget;
  options.gradient_tolerance = 1e-8;
  auto result = minimize_lbfgs(objective, std::vector<double>(d + 1, 0.0), options);

  LinearReadout r;
  r.weights.assign(result.x.begin(), result.x.begin() + static_cast<std::ptrdiff_t>(d));
  r.bias = result.x[d];
  r.lambda = lambda;
  return r;
}

double predict_raw(const LinearReadout& r, std::span<const double> h) {
  if (h.size() != r.weights.size()) throw std::invalid_argument("predict_raw: dimension mismatch");
  double z = r.bias;
  for (std::size_t j = 0; j < h.size(); ++j) z += r.weights[j] * h[j];
  return kernels::sigmoid(z);
}

std::vector<double> predict_raw(const LinearReadout& r, const Matrix& h) {
  if (h.cols() != r.weights.size()) throw std::invalid_argument("predict_raw: dimension mismatch");
  std::vector<double> out(h.rows());
  kernels::logistic_scores(h, r.weights, r.bias, out);
  return out;
}

double calibrate(const CalibrationParams& p, double raw) {
  const double f = p.a * raw + p.b;
  // 1 / (1 + e^f) without overflow for either sign of f.
  if (f > 0) {
    const double e = std::exp(-f);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(f));
}

CalibrationParams fit_calibration(std::span<const double> raw_scores, BinaryLabels labels) {
  const std::size_t n = raw_scores.size();
  if (n == 0) throw std::invalid_argument("fit_calibration: empty calibration set");
  check_labels(labels, n, "fit_calibration");

  double n_pos = 0;
  for (int y : labels) n_pos += y;
  const double n_neg = static_cast<double>(n) - n_pos;

  const auto [lo, hi] = std::minmax_element(raw_scores.begin(), raw_scores.end());
  if (*hi - *lo < 1e-12) {
    const double prior = n_pos / static_cast<double>(n);
    return {0.0, std::log((1.0 - prior) / prior)};
  }

  const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
  const double t_neg = 1.0 / (n_neg + 2.0);
  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = labels[i] ? t_pos : t_neg;

  // Negative log-likelihood in f = a*y + b is sum softplus(f) - (1 - t) f,
  // with derivative t - p and curvature p (1 - p), where p = calibrate(y).
  auto nll = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = a * raw_scores[i] + b;
      s += softplus(f) - (1.0 - target[i]) * f;
    }
    return s;
  };

  double a = 0.0;
  double b = std::log((n_neg + 1.0) / (n_pos + 1.0));
  double value = nll(a, b);
  constexpr int kMaxNewton = 200;
  const double tolerance = 1e-10 * static_cast<double>(n);
  for (int it = 0; it < kMaxNewton; ++it) {
    double ga = 0, gb = 0, haa = 1e-12, hab = 0, hbb = 1e-12;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = raw_scores[i];
      const double p = calibrate({a, b}, y);
      const double g = target[i] - p;
      const double w = p * (1.0 - p);
      ga += g * y;
      gb += g;
      haa += w * y * y;
      hab += w * y;
      hbb += w;
    }
    if (std::max(std::abs(ga), std::abs(gb)) < tolerance) return {a, b};
    const double det = haa * hbb - hab * hab;
    const double da = -(hbb * ga - hab * gb) / det;
    const double db = -(-hab * ga + haa * gb) / det;
    const double slope = ga * da + gb * db;
    double step = 1.0;
    bool moved = false;
    while (step > 1e-12) {
      const double candidate = nll(a + step * da, b + step * db);
      if (candidate <= value + 1e-4 * step * slope) {
        a += step * da;
        b += step * db;
        value = candidate;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) return {a, b};  // at the optimum to machine precision
    if (std::max(std::abs(step * da), std::abs(step * db)) <= 1e-13 * (1.0 + std::max(std::abs(a), std::abs(b)))) {
      return {a, b};
    }
  }
  throw ConvergenceError("fit_calibration: Newton iterations exhausted", a, kMaxNewton);
}

double CalibratedClassifier::posterior(std::span<const double> h) const {
  return calibrate(calibration, predict_raw(readout, h));
}

std::vector<double> CalibratedClassifier::posteriors(const Matrix& h) const {
  auto raw = predict_raw(readout, h);
  for (double& v : raw) v = calibrate(calibration, v);
  return raw;
}

std::string serialize(const CalibratedClassifier& c) {
  std::ostringstream os;
  os.precision(17);
  os << "dim " << c.readout.weights.size() << '\n' << "weights";
  for (double w : c.readout.weights) os << ' ' << w;
  os << '\n'
     << "bias " << c.readout.bias << '\n'
     << "lambda " << c.readout.lambda << '\n'
     << "a " << c.calibration.a << '\n'
     << "b " << c.calibration.b << '\n';
  return os.str();
}

CalibratedClassifier parse_classifier(std::string_view text) {
  std::map<std::string, std::vector<double>> fields;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto& values = fields[key];
    std::string token;
    while (ls >> token) {
      double v = 0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ParseError("parse_classifier: bad number '" + token + "' for key '" + key + "'");
      }
      values.push_back(v);
    }
  }
  auto scalar = [&](const char* key) {
    auto it = fields.find(key);
    if (it == fields.end() || it->second.size() != 1) {
      throw ParseError(std::string("parse_classifier: missing scalar '") + key + "'");
    }
    return it->second.front();
  };
  CalibratedClassifier c;
  const auto dim = static_cast<std::size_t>(scalar("dim"));
  c.readout.weights = fields["weights"];
  if (c.readout.weights.size() != dim) throw ParseError("parse_classifier: weights/dim mismatch");
  c.readout.bias = scalar("bias");
  c.readout.lambda = scalar("lambda");
  c.calibration.a = scalar("a");
  c.calibration.b = scalar("b");
  return c;
}

}  // namespace netquant
