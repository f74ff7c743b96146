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

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "netquant/graph.hpp"
#include "netquant/matrix.hpp"

namespace netquant {

enum class RadiusMode {
  // target_radius is rho(W_hat) itself.
  absolute,
  // target_radius is a multiple of 1 / rho(A); values below 1 give a
  // contractive reservoir.
  graph_relative,
};

struct ReservoirConfig {
  std::size_t embedding_dim = 64;
  double target_radius = 0.9;
  RadiusMode radius_mode = RadiusMode::absolute;
  double input_scale = 1.0;
  double bias_scale = 0.0;
  // Upper bound on message-passing iterations; see resolve_iterations().
  int iterations = 30;
  std::uint64_t seed = 0;

  void validate() const;
  // Stable text key, used to cache embeddings across grid points.
  std::string key() const;
};

struct ReservoirWeights {
  Matrix w_in;                // embedding_dim x input_dim, entries in [-input_scale, input_scale]
  Matrix w_hat;               // embedding_dim x embedding_dim, rho(w_hat) == target
  std::vector<double> b_in;   // embedding_dim, entries in [-bias_scale, bias_scale]
  double radius = 0.0;        // the target rho(w_hat) that was imposed
};

struct NodeEmbeddings {
  Matrix states;  // node_count x embedding_dim
  int iterations_used = 0;
};

// Spectral radius of a dense square matrix (largest eigenvalue modulus).
double dense_spectral_radius(const Matrix& m);

// Absolute rho(W_hat) requested by the config. graph_radius is rho(A) and is
// only consulted in graph_relative mode.
double resolve_target_radius(const ReservoirConfig& config, std::optional<double> graph_radius);

// Uniform draws from the seeded streams, then W_hat rescaled so that its
// spectral radius equals the resolved target. Deterministic in
// (config, input_dim, graph_radius).
ReservoirWeights init_reservoir(const ReservoirConfig& config, std::size_t input_dim,
                                std::optional<double> graph_radius = std::nullopt);

// min(config.iterations, estimated diameter + 2), at least 1.
int resolve_iterations(const Graph& g, int max_iterations);

// Runs the reservoir recursion for `iterations` synchronous steps from the
// zero state and returns the final states.
NodeEmbeddings embed_nodes(const Graph& g, const NodeFeatures& x, const ReservoirWeights& w,
                           int iterations);

// Max over nodes of the Euclidean distance between corresponding rows.
double embedding_drift(const Matrix& prev, const Matrix& curr);

}  // namespace netquant
