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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "netquant/baselines.hpp"
#include "netquant/graph.hpp"
#include "netquant/protocol.hpp"
#include "netquant/quantifiers.hpp"
#include "netquant/readout.hpp"
#include "netquant/reservoir.hpp"

namespace netquant {

// Uses the raw node features as embeddings.
struct Passthrough {
  friend bool operator==(const Passthrough&, const Passthrough&) = default;
};

using EmbedderSpec = std::variant<ReservoirConfig, Passthrough>;

struct ReadoutSpec {
  double lambda = 1e-3;
  int optimizer_budget = 1000;
};

struct AggregativeSpec {
  EmbedderSpec embedder = ReservoirConfig{};
  ReadoutSpec readout;
};

enum class BaselineKind { wvrn, cdq, enq };

struct BaselineSpec {
  BaselineKind kind = BaselineKind::wvrn;
  WvrnConfig wvrn;
  CommunityMode community_mode = CommunityMode::louvain;
  CommunityStrategy community_strategy = CommunityStrategy::frequency;
  EgoConfig ego;
};

struct QuantifierSpec {
  QuantifierKind kind = QuantifierKind::sld;
  // Folds for tpr/fpr estimation (ACC, PACC).
  int rate_folds = 10;
  double denominator_floor = kDefaultDenominatorFloor;
  SldOptions sld;
  int bins = 10;
  double alpha_step = 0.01;
};

struct MethodDescriptor {
  std::string name;
  std::variant<AggregativeSpec, BaselineSpec> path = AggregativeSpec{};
  QuantifierSpec quantifier;
  std::uint64_t seed = 0;

  bool is_baseline() const { return std::holds_alternative<BaselineSpec>(path); }
  // Baselines produce hard labels, so only CC and ACC apply to them.
  void validate() const;
  // Stable text summary of every hyperparameter.
  std::string key() const;
};

// Shares embeddings across fits. The reservoir is untrained, so its states
// depend only on (graph, features, reservoir config), never on labels. One
// cache must only ever see one dataset.
class EmbeddingCache {
 public:
  std::shared_ptr<const Matrix> get_or_compute(const Dataset& data, const EmbedderSpec& spec);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const Matrix>> entries_;
  std::optional<double> graph_radius_;
};

std::shared_ptr<const Matrix> compute_embeddings(const Dataset& data, const EmbedderSpec& spec);

// Immutable after fit; quantify() may be called concurrently.
struct FittedMethod {
  MethodDescriptor descriptor;
  std::optional<CalibratedClassifier> classifier;  // aggregative path only
  std::vector<double> posteriors;                  // calibrated, per node (aggregative path)
  HardLabels hard_labels;                          // per node (baseline path)
  std::optional<ClassifierRates> rates;
  std::optional<ScoreDistributionPair> score_pair;
  // Positive share of the training split; SLD starts from it.
  double training_prevalence = 0.5;
  std::vector<NodeId> labeled;  // ascending; quantify() rejects these

  std::string serialize() const;
};

// Trains on the labeled nodes of `visible` outside `calibration`, fits the
// calibration map on `calibration` (or on the training nodes when it is
// empty), and prepares whatever the quantifier needs.
FittedMethod fit(const MethodDescriptor& descriptor, const Dataset& data, const LabelSet& visible,
                 std::span<const NodeId> calibration, EmbeddingCache* cache = nullptr);

// Throws std::invalid_argument on an empty subset or one that touches
// labeled nodes. Independent of the order of `subset`.
PrevalenceEstimate quantify(const FittedMethod& m, std::span<const NodeId> subset);

// Grid of descriptors as protocol candidates that share `cache`.
MethodGrid make_method_grid(const std::string& method, const std::vector<MethodDescriptor>& grid,
                            std::shared_ptr<EmbeddingCache> cache);

}  // namespace netquant
