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

#include "netquant/reservoir.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "netquant/error.hpp"
#include "netquant/kernels.hpp"
#include "netquant/rng.hpp"

namespace netquant {
namespace {

constexpr int kMaxRedraws = 8;

void fill_uniform(Rng& rng, std::span<double> values, double scale) {
  for (double& v : values) v = rng.uniform(-scale, scale);
}

}  // namespace

void ReservoirConfig::validate() const {
  if (embedding_dim < 1) throw std::invalid_argument("reservoir: embedding_dim must be >= 1");
  if (!(target_radius > 0)) throw std::invalid_argument("reservoir: target_radius must be > 0");
  if (!(input_scale > 0)) throw std::invalid_argument("reservoir: input_scale must be > 0");
  if (!(bias_scale >= 0)) throw std::invalid_argument("reservoir: bias_scale must be >= 0");
  if (iterations < 1) throw std::invalid_argument("reservoir: iterations must be >= 1");
}

std::string ReservoirConfig::key() const {
  std::ostringstream os;
  os.precision(17);
  os << "dim=" << embedding_dim << ";radius=" << target_radius
     << ";mode=" << (radius_mode == RadiusMode::absolute ? "abs" : "rel")
     << ";input=" << input_scale << ";bias=" << bias_scale << ";L=" << iterations
     << ";seed=" << seed;
  return os.str();
}

double dense_spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("dense_spectral_radius: matrix not square");
  if (m.rows() == 0) return 0.0;
  Eigen::MatrixXd a(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) a(i, j) = m(i, j);
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw Error("dense_spectral_radius: eigensolver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

double resolve_target_radius(const ReservoirConfig& config, std::optional<double> graph_radius) {
  if (config.radius_mode == RadiusMode::absolute) return config.target_radius;
  if (!graph_radius) {
    throw std::invalid_argument("reservoir: graph-relative radius needs the graph spectral radius");
  }
  if (!(*graph_radius > 0)) {
    // An edgeless graph has no recurrent contribution; any radius is inert.
    return config.target_radius;
  }
  return config.target_radius / *graph_radius;
}

ReservoirWeights init_reservoir(const ReservoirConfig& config, std::size_t input_dim,
                                std::optional<double> graph_radius) {
  config.validate();
  if (input_dim < 1) throw std::invalid_argument("init_reservoir: input_dim must be >= 1");
  const std::size_t d = config.embedding_dim;

  ReservoirWeights w;
  w.radius = resolve_target_radius(config, graph_radius);
  w.w_in = Matrix(d, input_dim);
  w.b_in.assign(d, 0.0);
  Rng in_rng(derive_seed(config.seed, "reservoir/w_in"));
  fill_uniform(in_rng, w.w_in.values(), config.input_scale);
  Rng bias_rng(derive_seed(config.seed, "reservoir/b_in"));
  if (config.bias_scale > 0) fill_uniform(bias_rng, w.b_in, config.bias_scale);

  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    Rng hat_rng(derive_seed(config.seed, "reservoir/w_hat", static_cast<std::uint64_t>(attempt)));
    w.w_hat = Matrix(d, d);
    fill_uniform(hat_rng, w.w_hat.values(), 1.0);
    const double measured = dense_spectral_radius(w.w_hat);
    if (measured > 1e-12) {
      const double scale = w.radius / measured;
      for (double& v : w.w_hat.values()) v *= scale;
      return w;
    }
  }
  throw Error("init_reservoir: recurrent matrix has zero spectral radius after redraws");
}

int resolve_iterations(const Graph& g, int max_iterations) {
  if (max_iterations < 1) throw std::invalid_argument("resolve_iterations: max must be >= 1");
  return std::max(1, std::min(max_iterations, estimate_diameter(g) + 2));
}

NodeEmbeddings embed_nodes(const Graph& g, const NodeFeatures& x, const ReservoirWeights& w,
                           int iterations) {
  if (iterations < 1) throw std::invalid_argument("embed_nodes: iterations must be >= 1");
  if (x.rows() != g.node_count()) {
    throw std::invalid_argument("embed_nodes: feature rows do not match node count");
  }
  if (x.cols() != w.w_in.cols()) {
    throw std::invalid_argument("embed_nodes: feature dimension " + std::to_string(x.cols()) +
                                " does not match reservoir input dimension " +
                                std::to_string(w.w_in.cols()));
  }
  if (!x.all_finite()) throw Error("embed_nodes: non-finite node features");

  const std::size_t n = g.node_count();
  const std::size_t d = w.w_hat.rows();
  Matrix drive(n, d);
  kernels::input_drive(x, w.w_in, w.b_in, drive);
  if (!drive.all_finite()) throw Error("embed_nodes: non-finite input drive");

  // Double buffer: step l reads only states from step l - 1.
  Matrix prev(n, d, 0.0);
  Matrix next(n, d, 0.0);
  for (int l = 0; l < iterations; ++l) {
    kernels::reservoir_step(g, drive, w.w_hat, prev, next);
    std::swap(prev, next);
  }
  if (!prev.all_finite()) throw Error("embed_nodes: non-finite embedding");
  return NodeEmbeddings{std::move(prev), iterations};
}

double embedding_drift(const Matrix& prev, const Matrix& curr) {
  if (prev.rows() != curr.rows() || prev.cols() != curr.cols()) {
    throw std::invalid_argument("embedding_drift: shape mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < prev.rows(); ++i) {
    double s = 0.0;
    auto a = prev.row(i);
    auto b = curr.row(i);
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

}  // namespace netquant
