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
#include <vector>

#include "netquant/communities.hpp"
#include "netquant/graph.hpp"

namespace netquant {

// Output of the graph-native labelers: a 0/1 prediction for every node.
// Labeled nodes always carry their own label.
using HardLabels = std::vector<int>;

enum class BaseInit {
  // Unlabeled nodes start from a seeded draw with the training prevalence.
  training_draw,
  // Unlabeled nodes start without a prediction and cast no vote until they get one.
  abstain,
  // Start from WvrnConfig::initial_predictions (e.g. readout predictions).
  provided,
};

struct WvrnConfig {
  // One positive weight per CSR entry of the graph (aligned with
  // Graph::columns()); empty means unit weights.
  std::vector<double> edge_weights;
  int max_rounds = 50;
  BaseInit base_init = BaseInit::training_draw;
  // Used with BaseInit::provided: 0, 1, or -1 for no prediction.
  std::vector<int> initial_predictions;

  void validate(const Graph& g) const;
};

struct EgoConfig {
  int radius = 1;
};

enum class CommunityStrategy {
  // Class with the highest per-community positive frequency, averaged over
  // the node's communities.
  frequency,
  // Majority class of the densest community that has labeled members.
  density,
};

// Majority class of the labeled nodes; ties go to the negative class.
int training_majority(const LabelSet& labels);

// Weighted-vote relational neighbor classifier with synchronous rounds. Stops
// when no prediction changes or after max_rounds. Equal votes keep the
// node's previous vote outcome; a node without one takes the
// training-majority class. Nodes still without a prediction at the end are
// drawn from the training distribution.
HardLabels wvrn_propagate(const Graph& g, const LabelSet& labels, const WvrnConfig& cfg,
                          std::uint64_t seed);

HardLabels cdq_label(const Graph& g, const LabelSet& labels, const CommunityAssignment& communities,
                     CommunityStrategy strategy, std::uint64_t seed);

// Majority class among labeled nodes within cfg.radius hops.
HardLabels enq_label(const Graph& g, const LabelSet& labels, const EgoConfig& cfg,
                     std::uint64_t seed);

}  // namespace netquant
