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

#include "netquant/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "netquant/error.hpp"

namespace netquant {

Graph Graph::from_edges(std::span<const Edge> edges, std::size_t node_count,
                        GraphOptions options) {
  if (node_count == 0) throw std::invalid_argument("build_graph: node_count must be positive");

  std::vector<std::vector<NodeId>> rows(node_count);
  for (const Edge& e : edges) {
    if (e.u >= node_count || e.v >= node_count) {
      throw std::out_of_range("build_graph: edge (" + std::to_string(e.u) + ", " +
                              std::to_string(e.v) + ") out of range for " +
                              std::to_string(node_count) + " nodes");
    }
    if (e.u == e.v) {
      if (options.keep_self_loops) rows[e.u].push_back(e.v);
      continue;
    }
    rows[e.u].push_back(e.v);
    if (options.symmetrize) rows[e.v].push_back(e.u);
  }

  Graph g;
  g.offsets_.assign(node_count + 1, 0);
  for (NodeId v = 0; v < node_count; ++v) {
    auto& r = rows[v];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    g.offsets_[v + 1] = g.offsets_[v] + r.size();
  }
  g.columns_.reserve(g.offsets_.back());
  std::size_t directed = 0;
  for (NodeId v = 0; v < node_count; ++v) {
    for (NodeId u : rows[v]) {
      if (u == v) {
        ++g.self_loops_;
      } else {
        ++directed;
      }
      g.columns_.push_back(u);
    }
  }
  if (!options.symmetrize) {
    for (NodeId v = 0; v < node_count; ++v) {
      for (NodeId u : g.neighbors(v)) {
        if (!g.has_edge(u, v)) {
          throw std::invalid_argument("build_graph: input is not symmetric at (" +
                                      std::to_string(v) + ", " + std::to_string(u) + ")");
        }
      }
    }
  }
  g.edge_count_ = directed / 2;
  return g;
}

Graph build_graph(std::span<const Edge> edges, std::size_t node_count, bool symmetrize) {
  return Graph::from_edges(edges, node_count, GraphOptions{.symmetrize = symmetrize});
}

std::size_t Graph::degree(NodeId v) const {
  auto nb = neighbors(v);
  return nb.size() - (std::binary_search(nb.begin(), nb.end(), v) ? 1 : 0);
}

std::size_t Graph::max_degree() const {
  std::size_t best = 0;
  for (NodeId v = 0; v < node_count(); ++v) best = std::max(best, degree(v));
  return best;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

Graph Graph::permuted(std::span<const NodeId> new_id) const {
  const std::size_t n = node_count();
  if (new_id.size() != n) throw std::invalid_argument("Graph::permuted: size mismatch");
  std::vector<Edge> edges;
  edges.reserve(columns_.size());
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : neighbors(v)) edges.push_back({new_id[v], new_id[u]});
  }
  return from_edges(edges, n, GraphOptions{.symmetrize = false, .keep_self_loops = self_loops_ > 0});
}

LabelSet::LabelSet(std::vector<Label> labels) : labels_(std::move(labels)) {
  for (NodeId v = 0; v < labels_.size(); ++v) {
    (labels_[v] == Label::unlabeled ? unlabeled_ : labeled_).push_back(v);
  }
}

std::size_t LabelSet::positive_count() const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), Label::positive));
}

double LabelSet::prevalence() const {
  if (labeled_.empty()) throw std::invalid_argument("LabelSet::prevalence: no labeled nodes");
  return static_cast<double>(positive_count()) / static_cast<double>(labeled_.size());
}

LabelSet LabelSet::restricted_to(std::span<const NodeId> keep) const {
  std::vector<Label> out(labels_.size(), Label::unlabeled);
  for (NodeId v : keep) {
    if (v >= labels_.size()) throw std::out_of_range("LabelSet::restricted_to: index out of range");
    out[v] = labels_[v];
  }
  return LabelSet(std::move(out));
}

double spectral_radius(const Graph& g, double tolerance, int max_iterations) {
  const std::size_t n = g.node_count();
  if (n == 0) throw std::invalid_argument("spectral_radius: empty graph");
  if (!(tolerance > 0)) throw std::invalid_argument("spectral_radius: tolerance must be positive");
  if (g.edge_count() == 0 && g.self_loop_count() == 0) return 0.0;

  // Iterating on A + I keeps the Perron root strictly dominant even for
  // bipartite graphs, where +rho and -rho tie in modulus.
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> y(n);
  double previous = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    double rayleigh = 0.0;
    double norm2 = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      double s = x[v];
      for (NodeId u : g.neighbors(v)) s += x[u];
      y[v] = s;
      rayleigh += s * x[v];
      norm2 += s * s;
    }
    const double norm = std::sqrt(norm2);
    for (NodeId v = 0; v < n; ++v) x[v] = y[v] / norm;
    if (it > 1 && std::abs(rayleigh - previous) <= tolerance * rayleigh) {
      return std::max(0.0, rayleigh - 1.0);
    }
    previous = rayleigh;
  }
  throw ConvergenceError("spectral_radius: power iteration did not converge", previous - 1.0,
                         max_iterations);
}

double adjusted_homophily(const Graph& g, const LabelSet& labels, HomophilyBaseline baseline) {
  if (labels.size() != g.node_count()) {
    throw std::invalid_argument("adjusted_homophily: label count does not match node count");
  }
  std::size_t edges = 0;
  std::size_t same = 0;
  double degree_pos = 0.0;
  double degree_neg = 0.0;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (!labels.is_labeled(v)) continue;
    for (NodeId u : g.neighbors(v)) {
      if (u == v || !labels.is_labeled(u)) continue;
      (labels[v] == Label::positive ? degree_pos : degree_neg) += 1.0;
      if (u < v) continue;
      ++edges;
      if (labels[u] == labels[v]) ++same;
    }
  }
  if (edges == 0) throw Error("adjusted_homophily: no edge has both endpoints labeled");

  const double h_edge = static_cast<double>(same) / static_cast<double>(edges);
  double base = 0.0;
  if (baseline == HomophilyBaseline::node_proportion) {
    const double p = labels.prevalence();
    base = p * p + (1.0 - p) * (1.0 - p);
  } else {
    const double total = degree_pos + degree_neg;
    base = (degree_pos * degree_pos + degree_neg * degree_neg) / (total * total);
  }
  // A single class makes every edge intra-class and the adjustment 0/0.
  if (1.0 - base <= 0.0) return 1.0;
  return (h_edge - base) / (1.0 - base);
}

std::span<const NodeId> BfsWorkspace::ball(const Graph& g, NodeId source, int radius) {
  for (NodeId v : order_) depth_[v] = -1;
  order_.clear();
  order_.push_back(source);
  depth_[source] = 0;
  last_depth_ = 0;
  for (std::size_t head = 0; head < order_.size(); ++head) {
    const NodeId v = order_[head];
    const int d = depth_[v];
    last_depth_ = d;
    if (d >= radius) continue;
    for (NodeId u : g.neighbors(v)) {
      if (depth_[u] >= 0) continue;
      depth_[u] = d + 1;
      order_.push_back(u);
    }
  }
  return order_;
}

int estimate_diameter(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<bool> seen(n, false);
  BfsWorkspace ws(n);
  constexpr int unbounded = std::numeric_limits<int>::max();
  int best = 0;
  for (NodeId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    auto first = ws.ball(g, s, unbounded);
    for (NodeId v : first) seen[v] = true;
    const NodeId far = first.back();
    ws.ball(g, far, unbounded);
    best = std::max(best, ws.last_depth());
  }
  return best;
}

}  // namespace netquant
