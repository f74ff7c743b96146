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

#include "netquant/communities.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#include "netquant/rng.hpp"

namespace netquant {
namespace {

// Weighted symmetric graph used between Louvain levels. A self-loop entry
// carries the directed weight of the community's internal edges.
struct LevelGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<double> strength;
  double total = 0.0;  // sum of strengths (2m)
};

LevelGraph level_from(const Graph& g) {
  LevelGraph lg;
  const std::size_t n = g.node_count();
  lg.adj.resize(n);
  lg.strength.assign(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : g.neighbors(v)) {
      if (u == v) continue;
      lg.adj[v].emplace_back(static_cast<int>(u), 1.0);
      lg.strength[v] += 1.0;
    }
    lg.total += lg.strength[v];
  }
  return lg;
}

// One round of local moves. Returns true if any node changed community.
bool local_moves(const LevelGraph& lg, std::vector<int>& community, Rng& rng) {
  const std::size_t n = lg.adj.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[static_cast<std::size_t>(community[i])] += lg.strength[i];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::vector<double> link(n, 0.0);
  std::vector<int> touched;
  bool any = false;
  bool moved = true;
  while (moved) {
    moved = false;
    for (std::size_t i : order) {
      const double k_i = lg.strength[i];
      if (k_i == 0.0) continue;
      const int own = community[i];
      touched.clear();
      for (auto [j, w] : lg.adj[i]) {
        if (static_cast<std::size_t>(j) == i) continue;
        const int c = community[static_cast<std::size_t>(j)];
        if (link[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
        link[static_cast<std::size_t>(c)] += w;
      }
      tot[static_cast<std::size_t>(own)] -= k_i;
      auto gain = [&](int c) {
        return link[static_cast<std::size_t>(c)] - tot[static_cast<std::size_t>(c)] * k_i / lg.total;
      };
      int best = own;
      double best_gain = gain(own);
      std::sort(touched.begin(), touched.end());
      for (int c : touched) {
        const double g = gain(c);
        if (g > best_gain + 1e-12) {
          best_gain = g;
          best = c;
        }
      }
      tot[static_cast<std::size_t>(best)] += k_i;
      for (int c : touched) link[static_cast<std::size_t>(c)] = 0.0;
      link[static_cast<std::size_t>(own)] = 0.0;
      if (best != own) {
        community[i] = best;
        moved = true;
        any = true;
      }
    }
  }
  return any;
}

// Renumbers community ids to 0..k-1 in order of first appearance.
int compact(std::vector<int>& community) {
  std::map<int, int> remap;
  for (int& c : community) {
    auto [it, inserted] = remap.emplace(c, static_cast<int>(remap.size()));
    c = it->second;
  }
  return static_cast<int>(remap.size());
}

LevelGraph aggregate(const LevelGraph& lg, const std::vector<int>& community, int k) {
  LevelGraph out;
  out.adj.resize(static_cast<std::size_t>(k));
  out.strength.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<std::map<int, double>> acc(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < lg.adj.size(); ++i) {
    const int ci = community[i];
    for (auto [j, w] : lg.adj[i]) acc[static_cast<std::size_t>(ci)][community[static_cast<std::size_t>(j)]] += w;
    out.strength[static_cast<std::size_t>(ci)] += lg.strength[i];
  }
  for (int c = 0; c < k; ++c) {
    for (auto [d, w] : acc[static_cast<std::size_t>(c)]) out.adj[static_cast<std::size_t>(c)].emplace_back(d, w);
  }
  out.total = lg.total;
  return out;
}

std::vector<int> louvain(const Graph& g, std::uint64_t seed) {
  const std::size_t n = g.node_count();
  std::vector<int> node_community(n);
  std::iota(node_community.begin(), node_community.end(), 0);
  LevelGraph lg = level_from(g);
  if (lg.total == 0.0) return node_community;

  Rng rng(derive_seed(seed, "louvain"));
  while (true) {
    std::vector<int> community(lg.adj.size());
    std::iota(community.begin(), community.end(), 0);
    if (!local_moves(lg, community, rng)) break;
    const int k = compact(community);
    for (int& c : node_community) c = community[static_cast<std::size_t>(c)];
    if (static_cast<std::size_t>(k) == lg.adj.size()) break;
    lg = aggregate(lg, community, k);
  }
  compact(node_community);
  return node_community;
}

void bron_kerbosch(const Graph& g, std::vector<NodeId>& r, std::vector<NodeId> p,
                   std::vector<NodeId> x, std::size_t min_size,
                   std::vector<std::vector<NodeId>>& out) {
  if (p.empty() && x.empty()) {
    if (r.size() >= min_size) {
      auto c = r;
      std::sort(c.begin(), c.end());
      out.push_back(std::move(c));
    }
    return;
  }
  // Pivot on the candidate with the most neighbors in P.
  NodeId pivot = p.empty() ? x.front() : p.front();
  std::size_t best = 0;
  for (const auto* set : {&p, &x}) {
    for (NodeId u : *set) {
      std::size_t cnt = 0;
      for (NodeId w : p) cnt += g.has_edge(u, w);
      if (cnt > best) {
        best = cnt;
        pivot = u;
      }
    }
  }
  std::vector<NodeId> candidates;
  for (NodeId v : p) {
    if (!g.has_edge(pivot, v)) candidates.push_back(v);
  }
  for (NodeId v : candidates) {
    std::vector<NodeId> p2, x2;
    for (NodeId w : p) {
      if (g.has_edge(v, w)) p2.push_back(w);
    }
    for (NodeId w : x) {
      if (g.has_edge(v, w)) x2.push_back(w);
    }
    r.push_back(v);
    bron_kerbosch(g, r, std::move(p2), std::move(x2), min_size, out);
    r.pop_back();
    p.erase(std::find(p.begin(), p.end(), v));
    x.push_back(v);
  }
}

std::vector<std::vector<int>> clique_percolation(const Graph& g, int k) {
  if (k < 2) throw std::invalid_argument("clique_percolation: clique size must be >= 2");
  const std::size_t n = g.node_count();
  std::vector<std::vector<NodeId>> cliques;
  std::vector<NodeId> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<NodeId> r;
  bron_kerbosch(g, r, all, {}, static_cast<std::size_t>(k), cliques);
  std::sort(cliques.begin(), cliques.end());

  std::vector<std::size_t> parent(cliques.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t a = 0; a < cliques.size(); ++a) {
    for (std::size_t b = a + 1; b < cliques.size(); ++b) {
      std::vector<NodeId> common;
      std::set_intersection(cliques[a].begin(), cliques[a].end(), cliques[b].begin(),
                            cliques[b].end(), std::back_inserter(common));
      if (common.size() >= static_cast<std::size_t>(k - 1)) {
        const auto ra = find(a), rb = find(b);
        parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  }

  std::map<std::size_t, int> root_id;
  std::vector<std::vector<int>> memberships(n);
  for (std::size_t a = 0; a < cliques.size(); ++a) {
    auto [it, inserted] = root_id.emplace(find(a), static_cast<int>(root_id.size()));
    for (NodeId v : cliques[a]) memberships[v].push_back(it->second);
  }
  int next = static_cast<int>(root_id.size());
  for (auto& m : memberships) {
    std::sort(m.begin(), m.end());
    m.erase(std::unique(m.begin(), m.end()), m.end());
    if (m.empty()) m.push_back(next++);
  }
  return memberships;
}

}  // namespace

CommunityAssignment make_assignment(const Graph& g, std::vector<std::vector<int>> memberships) {
  if (memberships.size() != g.node_count()) {
    throw std::invalid_argument("make_assignment: one membership list per node required");
  }
  CommunityAssignment a;
  int max_id = -1;
  for (const auto& m : memberships) {
    for (int c : m) {
      if (c < 0) throw std::invalid_argument("make_assignment: negative community id");
      max_id = std::max(max_id, c);
    }
  }
  a.members.resize(static_cast<std::size_t>(max_id + 1));
  for (NodeId v = 0; v < memberships.size(); ++v) {
    for (int c : memberships[v]) a.members[static_cast<std::size_t>(c)].push_back(v);
  }
  a.density.assign(a.members.size(), 0.0);
  for (std::size_t c = 0; c < a.members.size(); ++c) {
    const auto& mem = a.members[c];
    if (mem.size() < 2) continue;
    std::size_t internal = 0;
    for (NodeId v : mem) {
      for (NodeId u : g.neighbors(v)) {
        if (u > v && std::binary_search(mem.begin(), mem.end(), u)) ++internal;
      }
    }
    const double pairs = static_cast<double>(mem.size()) * static_cast<double>(mem.size() - 1) / 2.0;
    a.density[c] = static_cast<double>(internal) / pairs;
  }
  a.memberships = std::move(memberships);
  return a;
}

CommunityAssignment discover_communities(const Graph& g, std::uint64_t seed, CommunityMode mode,
                                         int clique_size) {
  if (g.node_count() == 0) throw std::invalid_argument("discover_communities: empty graph");
  if (mode == CommunityMode::clique_percolation) {
    return make_assignment(g, clique_percolation(g, clique_size));
  }
  const auto community = louvain(g, seed);
  std::vector<std::vector<int>> memberships(community.size());
  for (std::size_t v = 0; v < community.size(); ++v) memberships[v] = {community[v]};
  return make_assignment(g, std::move(memberships));
}

double modularity(const Graph& g, std::span<const int> community_of) {
  if (community_of.size() != g.node_count()) throw std::invalid_argument("modularity: size mismatch");
  const double m2 = 2.0 * static_cast<double>(g.edge_count());
  if (m2 == 0.0) return 0.0;
  std::map<int, double> internal, degree;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    degree[community_of[v]] += static_cast<double>(g.degree(v));
    for (NodeId u : g.neighbors(v)) {
      if (u != v && community_of[u] == community_of[v]) internal[community_of[v]] += 1.0;
    }
  }
  double q = 0.0;
  for (auto [c, d] : degree) q += internal[c] / m2 - (d / m2) * (d / m2);
  return q;
}

}  // namespace netquant
