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
#include <span>
#include <vector>

#include "netquant/graph.hpp"

namespace netquant {

struct CommunityAssignment {
  std::vector<std::vector<int>> memberships;  // community ids per node (possibly several)
  std::vector<std::vector<NodeId>> members;   // nodes per community, ascending
  std::vector<double> density;                // internal edges / (|C| (|C| - 1) / 2); 0 for singletons

  std::size_t community_count() const { return members.size(); }
};

// Builds members and densities from per-node memberships.
CommunityAssignment make_assignment(const Graph& g, std::vector<std::vector<int>> memberships);

enum class CommunityMode {
  // Greedy modularity agglomeration (Louvain); one community per node.
  louvain,
  // k-clique percolation; nodes may sit in several communities. Nodes that
  // belong to no k-clique get a singleton community.
  clique_percolation,
};

// Deterministic in (g, seed). Every node ends up in at least one community;
// isolated nodes are singletons.
CommunityAssignment discover_communities(const Graph& g, std::uint64_t seed,
                                         CommunityMode mode = CommunityMode::louvain,
                                         int clique_size = 3);

// Newman modularity of a single-membership partition.
double modularity(const Graph& g, std::span<const int> community_of);

}  // namespace netquant
