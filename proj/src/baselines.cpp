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

#include "netquant/baselines.hpp"

#include <stdexcept>
#include <string>

#include "netquant/rng.hpp"

namespace netquant {
namespace {

constexpr int kNone = -1;

void require_labels(const Graph& g, const LabelSet& labels, const char* who) {
  if (labels.size() != g.node_count()) {
    throw std::invalid_argument(std::string(who) + ": label count does not match node count");
  }
  if (labels.labeled().empty()) throw std::invalid_argument(std::string(who) + ": no labeled nodes");
}

int vote(double positive, double negative, int majority) {
  if (positive > negative) return 1;
  if (negative > positive) return 0;
  return majority;
}

int draw(std::uint64_t seed, NodeId v, double prevalence) {
  return keyed_uniform(seed, v) < prevalence ? 1 : 0;
}

HardLabels clamped(const LabelSet& labels) {
  HardLabels out(labels.size(), kNone);
  for (NodeId v : labels.labeled()) out[v] = static_cast<int>(labels[v]);
  return out;
}

}  // namespace

void WvrnConfig::validate(const Graph& g) const {
  if (max_rounds < 1) throw std::invalid_argument("WvrnConfig: max_rounds must be >= 1");
  if (!edge_weights.empty()) {
    if (edge_weights.size() != g.columns().size()) {
      throw std::invalid_argument("WvrnConfig: one weight per adjacency entry required");
    }
    for (double w : edge_weights) {
      if (!(w > 0.0)) throw std::invalid_argument("WvrnConfig: edge weights must be positive");
    }
  }
  if (base_init == BaseInit::provided && initial_predictions.size() != g.node_count()) {
    throw std::invalid_argument("WvrnConfig: initial_predictions must cover every node");
  }
}

int training_majority(const LabelSet& labels) {
  return 2 * labels.positive_count() > labels.labeled().size() ? 1 : 0;
}

HardLabels wvrn_propagate(const Graph& g, const LabelSet& labels, const WvrnConfig& cfg,
                          std::uint64_t seed) {
  require_labels(g, labels, "wvrn_propagate");
  cfg.validate(g);
  const std::size_t n = g.node_count();
  const double prevalence = labels.prevalence();
  const int majority = training_majority(labels);

  HardLabels current = clamped(labels);
  const auto unlabeled = labels.unlabeled();
  const std::uint64_t init_seed = derive_seed(seed, "wvrn/init");
  for (NodeId v : unlabeled) {
    switch (cfg.base_init) {
      case BaseInit::training_draw:
        current[v] = draw(init_seed, v, prevalence);
        break;
      case BaseInit::abstain:
        break;
      case BaseInit::provided: {
        const int p = cfg.initial_predictions[v];
        if (p != 0 && p != 1 && p != kNone) {
          throw std::invalid_argument("wvrn_propagate: initial predictions must be 0, 1 or -1");
        }
        current[v] = p;
        break;
      }
    }
  }

  const auto offsets = g.offsets();
  const auto columns = g.columns();
  HardLabels next = current;
  // voted[v]: current[v] came from a neighbor vote rather than the init.
  std::vector<char> voted(n, 0);
  for (int round = 0; round < cfg.max_rounds; ++round) {
    int changed = 0;
#pragma omp parallel for schedule(static) reduction(+ : changed)
    for (std::size_t idx = 0; idx < unlabeled.size(); ++idx) {
      const NodeId v = unlabeled[idx];
      double pos = 0.0, neg = 0.0;
      for (std::size_t e = offsets[v]; e < offsets[v + 1]; ++e) {
        const NodeId u = columns[e];
        if (u == v || current[u] == kNone) continue;
        const double w = cfg.edge_weights.empty() ? 1.0 : cfg.edge_weights[e];
        (current[u] == 1 ? pos : neg) += w;
      }
      if (pos == 0.0 && neg == 0.0) {
        next[v] = current[v];
      } else if (pos == neg && voted[v]) {
        next[v] = current[v];
      } else {
        next[v] = vote(pos, neg, majority);
        voted[v] = 1;
      }
      changed += next[v] != current[v];
    }
    current.swap(next);
    if (changed == 0) break;
    next = current;
  }

  const std::uint64_t fallback_seed = derive_seed(seed, "wvrn/fallback");
  for (NodeId v = 0; v < n; ++v) {
    if (current[v] == kNone) current[v] = draw(fallback_seed, v, prevalence);
  }
  return current;
}

HardLabels cdq_label(const Graph& g, const LabelSet& labels, const CommunityAssignment& communities,
                     CommunityStrategy strategy, std::uint64_t seed) {
  require_labels(g, labels, "cdq_label");
  if (communities.memberships.size() != g.node_count()) {
    throw std::invalid_argument("cdq_label: community assignment does not match the graph");
  }
  const double prevalence = labels.prevalence();
  const int majority = training_majority(labels);

  const std::size_t k = communities.community_count();
  std::vector<std::size_t> pos(k, 0), total(k, 0);
  for (NodeId v : labels.labeled()) {
    for (int c : communities.memberships[v]) {
      ++total[static_cast<std::size_t>(c)];
      pos[static_cast<std::size_t>(c)] += labels[v] == Label::positive;
    }
  }

  HardLabels out = clamped(labels);
  const std::uint64_t fallback_seed = derive_seed(seed, "cdq/fallback");
  for (NodeId v : labels.unlabeled()) {
    int decided = kNone;
    if (g.degree(v) > 0) {
      if (strategy == CommunityStrategy::frequency) {
        double freq_pos = 0.0;
        int used = 0;
        for (int c : communities.memberships[v]) {
          const auto ci = static_cast<std::size_t>(c);
          if (total[ci] == 0) continue;
          freq_pos += static_cast<double>(pos[ci]) / static_cast<double>(total[ci]);
          ++used;
        }
        if (used > 0) {
          freq_pos /= used;
          decided = vote(freq_pos, 1.0 - freq_pos, majority);
        }
      } else {
        int best = -1;
        for (int c : communities.memberships[v]) {
          const auto ci = static_cast<std::size_t>(c);
          if (total[ci] == 0) continue;
          if (best < 0 || communities.density[ci] > communities.density[static_cast<std::size_t>(best)]) {
            best = c;
          }
        }
        if (best >= 0) {
          const auto bi = static_cast<std::size_t>(best);
          decided = vote(static_cast<double>(pos[bi]), static_cast<double>(total[bi] - pos[bi]), majority);
        }
      }
    }
    out[v] = decided != kNone ? decided : draw(fallback_seed, v, prevalence);
  }
  return out;
}

HardLabels enq_label(const Graph& g, const LabelSet& labels, const EgoConfig& cfg,
                     std::uint64_t seed) {
  require_labels(g, labels, "enq_label");
  if (cfg.radius < 1) throw std::invalid_argument("EgoConfig: radius must be >= 1");
  const double prevalence = labels.prevalence();
  const int majority = training_majority(labels);
  const std::uint64_t fallback_seed = derive_seed(seed, "enq/fallback");

  HardLabels out = clamped(labels);
  const auto unlabeled = labels.unlabeled();
#pragma omp parallel
  {
    BfsWorkspace bfs(g.node_count());
#pragma omp for schedule(dynamic, 64)
    for (std::size_t idx = 0; idx < unlabeled.size(); ++idx) {
      const NodeId v = unlabeled[idx];
      std::size_t p = 0, q = 0;
      for (NodeId u : bfs.ball(g, v, cfg.radius)) {
        if (!labels.is_labeled(u)) continue;
        (labels[u] == Label::positive ? p : q) += 1;
      }
      out[v] = (p + q == 0) ? draw(fallback_seed, v, prevalence)
                            : vote(static_cast<double>(p), static_cast<double>(q), majority);
    }
  }
  return out;
}

}  // namespace netquant
