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

#include "netquant/synth.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "netquant/rng.hpp"

namespace netquant {

void SbmConfig::validate() const {
  if (node_count < 2) throw std::invalid_argument("SbmConfig: node_count must be >= 2");
  if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0)) {
    throw std::invalid_argument("SbmConfig: positive_fraction outside [0, 1]");
  }
  if (!(p_in >= 0.0 && p_in <= 1.0) || !(p_out >= 0.0 && p_out <= 1.0)) {
    throw std::invalid_argument("SbmConfig: edge probabilities outside [0, 1]");
  }
  if (feature_dim < 1) throw std::invalid_argument("SbmConfig: feature_dim must be >= 1");
  if (!std::isfinite(feature_shift) || !(feature_noise >= 0.0)) {
    throw std::invalid_argument("SbmConfig: bad feature parameters");
  }
}

Dataset generate_sbm(const SbmConfig& config) {
  config.validate();
  const std::size_t n = config.node_count;
  const auto n_pos = static_cast<std::size_t>(std::llround(config.positive_fraction * static_cast<double>(n)));

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng label_rng(derive_seed(config.seed, "sbm/labels"));
  label_rng.shuffle(order);
  std::vector<Label> labels(n, Label::negative);
  for (std::size_t i = 0; i < n_pos; ++i) labels[order[i]] = Label::positive;

  Rng edge_rng(derive_seed(config.seed, "sbm/edges"));
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? config.p_in : config.p_out;
      if (edge_rng.bernoulli(p)) edges.push_back({u, v});
    }
  }

  Rng feat_rng(derive_seed(config.seed, "sbm/features"));
  Matrix x(n, config.feature_dim);
  for (NodeId v = 0; v < n; ++v) {
    const double mean = labels[v] == Label::positive ? config.feature_shift : -config.feature_shift;
    for (std::size_t j = 0; j < config.feature_dim; ++j) {
      x(v, j) = mean + config.feature_noise * feat_rng.normal();
    }
  }
  return Dataset{build_graph(edges, n), std::move(x), LabelSet(std::move(labels))};
}

}  // namespace netquant
