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

#include "netquant/graph.hpp"

namespace netquant {

// Two-block stochastic block model with class-dependent Gaussian features.
// Block membership is the node label. p_out > p_in gives a heterophilic graph.
struct SbmConfig {
  std::size_t node_count = 200;
  double positive_fraction = 0.5;
  double p_in = 0.05;
  double p_out = 0.01;
  std::size_t feature_dim = 8;
  // Feature means are +shift (positive) and -shift (negative) in every dimension.
  double feature_shift = 0.5;
  double feature_noise = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// round(positive_fraction * node_count) positives placed at random nodes.
// Every node is labeled.
Dataset generate_sbm(const SbmConfig& config);

}  // namespace netquant
