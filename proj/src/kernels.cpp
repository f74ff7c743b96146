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

#include "netquant/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace netquant::kernels {
namespace {

void check_drive_shapes(const Matrix& x, const Matrix& w_in, std::span<const double> bias,
                        const Matrix& out) {
  if (w_in.cols() != x.cols() || bias.size() != w_in.rows() || out.rows() != x.rows() ||
      out.cols() != w_in.rows()) {
    throw std::invalid_argument("input_drive: shape mismatch");
  }
}

void check_step_shapes(const Graph& g, const Matrix& drive, const Matrix& w_hat,
                       const Matrix& prev, const Matrix& next) {
  const std::size_t n = g.node_count();
  const std::size_t d = w_hat.rows();
  if (w_hat.cols() != d || drive.rows() != n || drive.cols() != d || prev.rows() != n ||
      prev.cols() != d || next.rows() != n || next.cols() != d) {
    throw std::invalid_argument("reservoir_step: shape mismatch");
  }
}

bool row_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// Sum of prev rows over N(v) in canonical (value) order. `order` is scratch.
void neighbor_sum(const Graph& g, const Matrix& prev, NodeId v, std::vector<NodeId>& order,
                  std::span<double> sum) {
  std::fill(sum.begin(), sum.end(), 0.0);
  auto nb = g.neighbors(v);
  order.assign(nb.begin(), nb.end());
  // Two-term sums are commutative in IEEE arithmetic; longer ones are not.
  if (order.size() > 2) {
    std::sort(order.begin(), order.end(),
              [&](NodeId a, NodeId b) { return row_less(prev.row(a), prev.row(b)); });
  }
  for (NodeId u : order) {
    auto h = prev.row(u);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += h[k];
  }
}

void step_row(const Matrix& drive, const Matrix& w_hat, std::span<const double> sum, NodeId v,
              std::span<double> out) {
  const std::size_t d = w_hat.rows();
  auto base = drive.row(v);
  for (std::size_t k = 0; k < d; ++k) {
    auto w = w_hat.row(k);
    double z = base[k];
    for (std::size_t j = 0; j < d; ++j) z += w[j] * sum[j];
    out[k] = std::tanh(z);
  }
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void input_drive(const Matrix& x, const Matrix& w_in, std::span<const double> bias, Matrix& out) {
  check_drive_shapes(x, w_in, bias, out);
  const auto n = static_cast<long long>(x.rows());
  const std::size_t d_out = w_in.rows();
#pragma omp parallel
  {
    std::vector<std::size_t> nonzero;
#pragma omp for schedule(static)
    for (long long i = 0; i < n; ++i) {
      auto xi = x.row(static_cast<std::size_t>(i));
      nonzero.clear();
      for (std::size_t j = 0; j < xi.size(); ++j) {
        if (xi[j] != 0.0) nonzero.push_back(j);
      }
      auto o = out.row(static_cast<std::size_t>(i));
      for (std::size_t k = 0; k < d_out; ++k) {
        auto w = w_in.row(k);
        double s = 0.0;
        for (std::size_t j : nonzero) s += w[j] * xi[j];
        o[k] = s + bias[k];
      }
    }
  }
}

void input_drive_reference(const Matrix& x, const Matrix& w_in, std::span<const double> bias,
                           Matrix& out) {
  check_drive_shapes(x, w_in, bias, out);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t k = 0; k < w_in.rows(); ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < x.cols(); ++j) {
        if (x(i, j) == 0.0) continue;
        s += w_in(k, j) * x(i, j);
      }
      out(i, k) = s + bias[k];
    }
  }
}

void reservoir_step(const Graph& g, const Matrix& drive, const Matrix& w_hat, const Matrix& prev,
                    Matrix& next) {
  check_step_shapes(g, drive, w_hat, prev, next);
  const auto n = static_cast<long long>(g.node_count());
  const std::size_t d = w_hat.rows();
#pragma omp parallel
  {
    std::vector<NodeId> order;
    std::vector<double> sum(d);
#pragma omp for schedule(dynamic, 64)
    for (long long i = 0; i < n; ++i) {
      const auto v = static_cast<NodeId>(i);
      neighbor_sum(g, prev, v, order, sum);
      step_row(drive, w_hat, sum, v, next.row(v));
    }
  }
}

void reservoir_step_reference(const Graph& g, const Matrix& drive, const Matrix& w_hat,
                              const Matrix& prev, Matrix& next) {
  check_step_shapes(g, drive, w_hat, prev, next);
  const std::size_t d = w_hat.rows();
  for (NodeId v = 0; v < g.node_count(); ++v) {
    std::vector<NodeId> nb(g.neighbors(v).begin(), g.neighbors(v).end());
    if (nb.size() > 2) {
      std::sort(nb.begin(), nb.end(),
                [&](NodeId a, NodeId b) { return row_less(prev.row(a), prev.row(b)); });
    }
    std::vector<double> sum(d, 0.0);
    for (NodeId u : nb) {
      for (std::size_t k = 0; k < d; ++k) sum[k] += prev(u, k);
    }
    for (std::size_t k = 0; k < d; ++k) {
      double z = drive(v, k);
      for (std::size_t j = 0; j < d; ++j) z += w_hat(k, j) * sum[j];
      next(v, k) = std::tanh(z);
    }
  }
}

void logistic_scores(const Matrix& h, std::span<const double> w, double b, std::span<double> out) {
  if (w.size() != h.cols() || out.size() != h.rows()) {
    throw std::invalid_argument("logistic_scores: shape mismatch");
  }
  const auto n = static_cast<long long>(h.rows());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    auto r = h.row(static_cast<std::size_t>(i));
    double z = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) z += w[j] * r[j];
    out[static_cast<std::size_t>(i)] = sigmoid(z + b);
  }
}

void logistic_scores_reference(const Matrix& h, std::span<const double> w, double b,
                               std::span<double> out) {
  if (w.size() != h.cols() || out.size() != h.rows()) {
    throw std::invalid_argument("logistic_scores: shape mismatch");
  }
  for (std::size_t i = 0; i < h.rows(); ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < h.cols(); ++j) z += w[j] * h(i, j);
    out[i] = sigmoid(z + b);
  }
}

}  // namespace netquant::kernels
