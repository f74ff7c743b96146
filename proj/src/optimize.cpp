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

#include "netquant/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace netquant {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct Correction {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& f, std::vector<double> x0,
                           const LbfgsOptions& options) {
  const std::size_t n = x0.size();
  LbfgsResult result;
  result.x = std::move(x0);
  std::vector<double> grad(n);
  double value = f(result.x, grad);
  std::deque<Correction> history;
  std::vector<double> dir(n), x_new(n), grad_new(n), alpha(static_cast<std::size_t>(options.history));

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (max_norm(grad) < options.gradient_tolerance) break;

    // Two-loop recursion for dir = -H * grad.
    std::copy(grad.begin(), grad.end(), dir.begin());
    for (std::size_t k = history.size(); k-- > 0;) {
      alpha[k] = history[k].rho * dot(history[k].s, dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha[k] * history[k].y[i];
    }
    double gamma = 1.0;
    if (!history.empty()) {
      const auto& last = history.back();
      gamma = dot(last.s, last.y) / dot(last.y, last.y);
    } else {
      gamma = 1.0 / std::max(1.0, std::sqrt(dot(grad, grad)));
    }
    for (double& v : dir) v *= gamma;
    for (std::size_t k = 0; k < history.size(); ++k) {
      const double beta = history[k].rho * dot(history[k].y, dir);
      for (std::size_t i = 0; i < n; ++i) dir[i] += history[k].s[i] * (alpha[k] - beta);
    }
    for (double& v : dir) v = -v;

    double slope = dot(grad, dir);
    if (slope >= 0) {
      // Lost descent; restart from steepest descent.
      history.clear();
      const double scale = 1.0 / std::max(1.0, std::sqrt(dot(grad, grad)));
      for (std::size_t i = 0; i < n; ++i) dir[i] = -grad[i] * scale;
      slope = dot(grad, dir);
    }

    double step = 1.0;
    double value_new = value;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = result.x[i] + step * dir[i];
      value_new = f(x_new, grad_new);
      if (std::isfinite(value_new) && value_new <= value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Correction c{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      c.s[i] = x_new[i] - result.x[i];
      c.y[i] = grad_new[i] - grad[i];
    }
    const double sy = dot(c.s, c.y);
    result.x.swap(x_new);
    grad.swap(grad_new);
    value = value_new;
    if (sy > 1e-16 * std::sqrt(dot(c.s, c.s) * dot(c.y, c.y))) {
      c.rho = 1.0 / sy;
      history.push_back(std::move(c));
      if (history.size() > static_cast<std::size_t>(options.history)) history.pop_front();
    }
  }

  result.value = value;
  result.gradient_norm = max_norm(grad);
  result.iterations = it;
  result.converged = result.gradient_norm < options.gradient_tolerance;
  return result;
}

}  // namespace netquant
