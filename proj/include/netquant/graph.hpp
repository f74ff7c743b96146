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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "netquant/matrix.hpp"

namespace netquant {

using NodeId = std::size_t;

struct Edge {
  NodeId u;
  NodeId v;
};

struct GraphOptions {
  // Mirror every input pair. When off, the input must already list both
  // directions of every edge.
  bool symmetrize = true;
  bool keep_self_loops = false;
};

// Immutable undirected graph in compressed row form. Column indices within a
// row are strictly increasing. Self-loops are stored only when requested and
// never count towards degree() or edge_count().
class Graph {
 public:
  Graph() = default;

  static Graph from_edges(std::span<const Edge> edges, std::size_t node_count,
                          GraphOptions options = {});

  std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t self_loop_count() const { return self_loops_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {columns_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(NodeId v) const;
  std::size_t max_degree() const;
  bool has_edge(NodeId u, NodeId v) const;

  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const NodeId> columns() const { return columns_; }

  // Relabels node v as new_id[v]. new_id must be a permutation.
  Graph permuted(std::span<const NodeId> new_id) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> columns_;
  std::size_t edge_count_ = 0;
  std::size_t self_loops_ = 0;
};

Graph build_graph(std::span<const Edge> edges, std::size_t node_count, bool symmetrize = true);

// Node features, one row per node.
using NodeFeatures = Matrix;

enum class Label : std::int8_t { negative = 0, positive = 1, unlabeled = -1 };

// Per-node labels with the labeled/unlabeled partition kept in sync.
class LabelSet {
 public:
  LabelSet() = default;
  explicit LabelSet(std::vector<Label> labels);

  std::size_t size() const { return labels_.size(); }
  Label operator[](NodeId v) const { return labels_[v]; }
  bool is_labeled(NodeId v) const { return labels_[v] != Label::unlabeled; }
  std::span<const Label> labels() const { return labels_; }
  std::span<const NodeId> labeled() const { return labeled_; }
  std::span<const NodeId> unlabeled() const { return unlabeled_; }

  std::size_t positive_count() const;
  // Fraction of labeled nodes that are positive. Throws when nothing is labeled.
  double prevalence() const;

  // Copy that keeps only the labels of the listed nodes.
  LabelSet restricted_to(std::span<const NodeId> keep) const;

 private:
  std::vector<Label> labels_;
  std::vector<NodeId> labeled_;
  std::vector<NodeId> unlabeled_;
};

// Dominant eigenvalue of the adjacency matrix by shifted power iteration from
// the all-ones vector. Throws ConvergenceError after max_iterations.
double spectral_radius(const Graph& g, double tolerance = 1e-12, int max_iterations = 100000);

enum class HomophilyBaseline {
  // Sum over classes of squared labeled-node proportions.
  node_proportion,
  // Sum over classes of squared degree shares.
  degree_share,
};

// (h_edge - baseline) / (1 - baseline) over edges whose endpoints are both
// labeled, where h_edge is the fraction of such edges joining equal classes.
double adjusted_homophily(const Graph& g, const LabelSet& labels,
                          HomophilyBaseline baseline = HomophilyBaseline::node_proportion);

// Reusable BFS scratch space, so repeated ego-network queries cost
// O(ego size) instead of O(node_count).
class BfsWorkspace {
 public:
  explicit BfsWorkspace(std::size_t node_count) : depth_(node_count, -1) {}

  // Nodes within `radius` hops of `source`, including the source, in BFS order.
  std::span<const NodeId> ball(const Graph& g, NodeId source, int radius);
  // Depth of the last visited node (the eccentricity when radius is unbounded).
  int last_depth() const { return last_depth_; }

 private:
  std::vector<int> depth_;
  std::vector<NodeId> order_;
  int last_depth_ = 0;
};

// Lower bound on the diameter by double-sweep BFS in every component.
int estimate_diameter(const Graph& g);

struct Dataset {
  Graph graph;
  NodeFeatures features;
  LabelSet labels;
};

}  // namespace netquant
