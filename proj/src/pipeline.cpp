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

#include "netquant/pipeline.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "netquant/communities.hpp"
#include "netquant/error.hpp"
#include "netquant/rng.hpp"

namespace netquant {
namespace {

std::string_view baseline_name(BaselineKind k) {
  switch (k) {
    case BaselineKind::wvrn:
      return "wvrn";
    case BaselineKind::cdq:
      return "cdq";
    case BaselineKind::enq:
      return "enq";
  }
  return "?";
}

std::string embedder_key(const EmbedderSpec& spec) {
  if (std::holds_alternative<Passthrough>(spec)) return "passthrough";
  return "reservoir(" + std::get<ReservoirConfig>(spec).key() + ")";
}

std::vector<int> to_binary(std::span<const NodeId> nodes, const LabelSet& labels) {
  std::vector<int> y;
  y.reserve(nodes.size());
  for (NodeId v : nodes) y.push_back(labels[v] == Label::positive ? 1 : 0);
  return y;
}

double fraction_positive(std::span<const int> y) {
  std::size_t p = 0;
  for (int v : y) p += static_cast<std::size_t>(v == 1);
  return static_cast<double>(p) / static_cast<double>(y.size());
}

void require_both_classes(std::span<const int> y, const char* what) {
  const double p = y.empty() ? 0.0 : fraction_positive(y);
  if (!(p > 0.0 && p < 1.0)) throw SingleClassError(std::string("fit: ") + what + " holds a single class");
}

struct BaselineRunner {
  const BaselineSpec& spec;
  const Graph& g;
  std::optional<CommunityAssignment> communities;

  BaselineRunner(const BaselineSpec& s, const Graph& graph, std::uint64_t seed) : spec(s), g(graph) {
    if (spec.kind == BaselineKind::cdq) {
      communities = discover_communities(g, derive_seed(seed, "communities"), spec.community_mode);
    }
  }

  HardLabels run(const LabelSet& labels, std::uint64_t seed) const {
    switch (spec.kind) {
      case BaselineKind::wvrn:
        return wvrn_propagate(g, labels, spec.wvrn, seed);
      case BaselineKind::cdq:
        return cdq_label(g, labels, *communities, spec.community_strategy, seed);
      case BaselineKind::enq:
        return enq_label(g, labels, spec.ego, seed);
    }
    throw std::logic_error("unknown baseline");
  }
};

// tpr/fpr of a labeler by hiding one stratified fold of the visible labels
// at a time and pooling its predictions on the hidden nodes.
ClassifierRates baseline_rates(const BaselineRunner& runner, const LabelSet& visible, int k,
                               std::uint64_t seed) {
  const auto labeled = visible.labeled();
  const auto y = to_binary(labeled, visible);
  std::size_t pos = 0;
  for (int v : y) pos += static_cast<std::size_t>(v);
  const std::size_t smaller = std::min(pos, y.size() - pos);
  if (smaller < 2) throw SingleClassError("fit: need at least two labeled nodes of each class for rates");
  k = std::min<int>(k, static_cast<int>(smaller));
  const auto fold = stratified_folds(y, k, derive_seed(seed, "rates/folds"));
  std::vector<double> pooled(labeled.size());
  for (int f = 0; f < k; ++f) {
    std::vector<NodeId> keep;
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      if (fold[i] != f) keep.push_back(labeled[i]);
    }
    const auto pred = runner.run(visible.restricted_to(keep), derive_seed(seed, "rates/run", static_cast<std::uint64_t>(f)));
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      if (fold[i] == f) pooled[i] = pred[labeled[i]];
    }
  }
  return rates_from_scores(pooled, y, false);
}

}  // namespace

void MethodDescriptor::validate() const {
  if (name.empty()) throw std::invalid_argument("MethodDescriptor: empty name");
  if (const auto* b = std::get_if<BaselineSpec>(&path)) {
    if (!uses_hard_labels(quantifier.kind)) {
      throw std::invalid_argument("MethodDescriptor: baseline '" + name + "' needs cc or acc, got " +
                                  std::string(to_string(quantifier.kind)));
    }
    if (b->wvrn.max_rounds < 1) throw std::invalid_argument("MethodDescriptor: max_rounds must be >= 1");
    if (b->ego.radius < 1) throw std::invalid_argument("MethodDescriptor: radius must be >= 1");
  } else {
    const auto& a = std::get<AggregativeSpec>(path);
    if (const auto* r = std::get_if<ReservoirConfig>(&a.embedder)) r->validate();
    if (!(a.readout.lambda >= 0.0)) throw std::invalid_argument("MethodDescriptor: lambda must be >= 0");
    if (a.readout.optimizer_budget < 1) throw std::invalid_argument("MethodDescriptor: optimizer budget must be >= 1");
  }
  if (quantifier.rate_folds < 2) throw std::invalid_argument("MethodDescriptor: rate_folds must be >= 2");
  if (quantifier.bins < 2) throw std::invalid_argument("MethodDescriptor: bins must be >= 2");
  if (!(quantifier.alpha_step > 0.0 && quantifier.alpha_step <= 1.0)) {
    throw std::invalid_argument("MethodDescriptor: alpha_step must be in (0, 1]");
  }
}

std::string MethodDescriptor::key() const {
  std::ostringstream os;
  os << name << ';';
  if (const auto* b = std::get_if<BaselineSpec>(&path)) {
    os << "baseline=" << baseline_name(b->kind);
    switch (b->kind) {
      case BaselineKind::wvrn:
        os << ",max_rounds=" << b->wvrn.max_rounds << ",init=" << static_cast<int>(b->wvrn.base_init)
           << ",weighted=" << !b->wvrn.edge_weights.empty();
        break;
      case BaselineKind::cdq:
        os << ",mode=" << static_cast<int>(b->community_mode)
           << ",strategy=" << static_cast<int>(b->community_strategy);
        break;
      case BaselineKind::enq:
        os << ",radius=" << b->ego.radius;
        break;
    }
  } else {
    const auto& a = std::get<AggregativeSpec>(path);
    os << "embedder=" << embedder_key(a.embedder) << ",lambda=" << format_double(a.readout.lambda)
       << ",budget=" << a.readout.optimizer_budget;
  }
  os << ";quantifier=" << to_string(quantifier.kind) << ",rate_folds=" << quantifier.rate_folds
     << ",floor=" << format_double(quantifier.denominator_floor)
     << ",sld_tol=" << format_double(quantifier.sld.tolerance) << ",bins=" << quantifier.bins
     << ",alpha_step=" << format_double(quantifier.alpha_step) << ";seed=" << seed;
  return os.str();
}

std::shared_ptr<const Matrix> compute_embeddings(const Dataset& data, const EmbedderSpec& spec) {
  if (std::holds_alternative<Passthrough>(spec)) return std::make_shared<const Matrix>(data.features);
  const auto& cfg = std::get<ReservoirConfig>(spec);
  std::optional<double> radius;
  if (cfg.radius_mode == RadiusMode::graph_relative) radius = spectral_radius(data.graph);
  const auto w = init_reservoir(cfg, data.features.cols(), radius);
  const int iters = resolve_iterations(data.graph, cfg.iterations);
  return std::make_shared<const Matrix>(embed_nodes(data.graph, data.features, w, iters).states);
}

std::shared_ptr<const Matrix> EmbeddingCache::get_or_compute(const Dataset& data, const EmbedderSpec& spec) {
  const std::string key = embedder_key(spec);
  std::lock_guard lock(mutex_);
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  std::shared_ptr<const Matrix> m;
  if (const auto* cfg = std::get_if<ReservoirConfig>(&spec);
      cfg && cfg->radius_mode == RadiusMode::graph_relative) {
    if (!graph_radius_) graph_radius_ = spectral_radius(data.graph);
    const auto w = init_reservoir(*cfg, data.features.cols(), graph_radius_);
    const int iters = resolve_iterations(data.graph, cfg->iterations);
    m = std::make_shared<const Matrix>(embed_nodes(data.graph, data.features, w, iters).states);
  } else {
    m = compute_embeddings(data, spec);
  }
  entries_.emplace(key, m);
  return m;
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string FittedMethod::serialize() const {
  std::ostringstream os;
  os << "method " << descriptor.key() << '\n';
  if (classifier) os << "classifier\n" << netquant::serialize(*classifier) << "end\n";
  os << "training_prevalence " << format_double(training_prevalence) << '\n';
  if (rates) {
    os << "rates " << format_double(rates->tpr) << ' ' << format_double(rates->fpr) << ' '
       << rates->soft << '\n';
  }
  if (score_pair) {
    os << "score_pair " << score_pair->bin_count;
    for (double s : score_pair->positive_scores) os << ' ' << format_double(s);
    os << " |";
    for (double s : score_pair->negative_scores) os << ' ' << format_double(s);
    os << '\n';
  }
  os << "labeled " << labeled.size() << '\n';
  if (!posteriors.empty()) {
    os << "posteriors";
    for (double p : posteriors) os << ' ' << format_double(p);
    os << '\n';
  }
  if (!hard_labels.empty()) {
    os << "hard_labels ";
    for (int y : hard_labels) os << y;
    os << '\n';
  }
  return os.str();
}

FittedMethod fit(const MethodDescriptor& descriptor, const Dataset& data, const LabelSet& visible,
                 std::span<const NodeId> calibration, EmbeddingCache* cache) {
  descriptor.validate();
  const std::size_t n = data.graph.node_count();
  if (visible.size() != n || data.features.rows() != n) {
    throw std::invalid_argument("fit: graph, features and labels disagree on node count");
  }
  std::vector<NodeId> cal(calibration.begin(), calibration.end());
  std::sort(cal.begin(), cal.end());
  for (NodeId v : cal) {
    if (v >= n || !visible.is_labeled(v)) throw std::invalid_argument("fit: calibration node is not labeled");
  }

  FittedMethod m;
  m.descriptor = descriptor;
  m.labeled.assign(visible.labeled().begin(), visible.labeled().end());
  std::sort(m.labeled.begin(), m.labeled.end());
  const QuantifierSpec& qs = descriptor.quantifier;

  if (const auto* b = std::get_if<BaselineSpec>(&descriptor.path)) {
    if (visible.labeled().empty()) throw std::invalid_argument("fit: no labeled nodes");
    const BaselineRunner runner(*b, data.graph, descriptor.seed);
    m.hard_labels = runner.run(visible, derive_seed(descriptor.seed, "baseline"));
    m.training_prevalence = visible.prevalence();
    if (qs.kind == QuantifierKind::acc) {
      m.rates = baseline_rates(runner, visible, qs.rate_folds, descriptor.seed);
    }
    return m;
  }

  const auto& spec = std::get<AggregativeSpec>(descriptor.path);
  std::vector<NodeId> train;
  std::set_difference(m.labeled.begin(), m.labeled.end(), cal.begin(), cal.end(), std::back_inserter(train));
  const auto y_train = to_binary(train, visible);
  require_both_classes(y_train, "training split");

  const auto emb = cache ? cache->get_or_compute(data, spec.embedder) : compute_embeddings(data, spec.embedder);
  const Matrix x_train = emb->select_rows(train);
  CalibratedClassifier clf;
  clf.readout = train_readout(x_train, y_train, spec.readout.lambda, spec.readout.optimizer_budget);

  const std::vector<NodeId>& cal_nodes = cal.empty() ? train : cal;
  const auto y_cal = to_binary(cal_nodes, visible);
  require_both_classes(y_cal, "calibration split");
  const Matrix x_cal = emb->select_rows(cal_nodes);
  clf.calibration = fit_calibration(predict_raw(clf.readout, x_cal), y_cal);
  m.classifier = clf;
  m.posteriors = clf.posteriors(*emb);
  m.training_prevalence = fraction_positive(y_train);

  if (qs.kind == QuantifierKind::acc || qs.kind == QuantifierKind::pacc) {
    const CalibrationParams calib = clf.calibration;
    const ReadoutSpec rs = spec.readout;
    ScoreFunction score = [calib, rs](const Matrix& tx, BinaryLabels ty, const Matrix& sx) {
      const auto r = train_readout(tx, ty, rs.lambda, rs.optimizer_budget);
      auto raw = predict_raw(r, sx);
      for (double& s : raw) s = calibrate(calib, s);
      return raw;
    };
    m.rates = estimate_rates(score, x_train, y_train, qs.rate_folds, qs.kind == QuantifierKind::pacc,
                             derive_seed(descriptor.seed, "rates"));
  }
  if (qs.kind == QuantifierKind::hdy || qs.kind == QuantifierKind::dys) {
    ScoreDistributionPair pair;
    pair.bin_count = qs.bins;
    for (std::size_t i = 0; i < cal_nodes.size(); ++i) {
      (y_cal[i] == 1 ? pair.positive_scores : pair.negative_scores).push_back(m.posteriors[cal_nodes[i]]);
    }
    m.score_pair = std::move(pair);
  }
  return m;
}

PrevalenceEstimate quantify(const FittedMethod& m, std::span<const NodeId> subset) {
  if (subset.empty()) throw std::invalid_argument("quantify: empty subset");
  std::vector<NodeId> nodes(subset.begin(), subset.end());
  std::sort(nodes.begin(), nodes.end());
  const std::size_t n = m.posteriors.empty() ? m.hard_labels.size() : m.posteriors.size();
  for (NodeId v : nodes) {
    if (v >= n) throw std::invalid_argument("quantify: node id out of range");
    if (std::binary_search(m.labeled.begin(), m.labeled.end(), v)) {
      throw std::invalid_argument("quantify: subset overlaps the labeled nodes");
    }
  }
  const QuantifierSpec& qs = m.descriptor.quantifier;

  std::vector<int> hard;
  std::vector<double> post;
  if (m.descriptor.is_baseline()) {
    for (NodeId v : nodes) hard.push_back(m.hard_labels[v]);
  } else {
    for (NodeId v : nodes) post.push_back(m.posteriors[v]);
    if (uses_hard_labels(qs.kind)) {
      for (double p : post) hard.push_back(p > 0.5 ? 1 : 0);
    }
  }

  switch (qs.kind) {
    case QuantifierKind::cc:
      return cc(hard);
    case QuantifierKind::acc: {
      const auto base = cc(hard);
      try {
        return acc(base.value, *m.rates, qs.denominator_floor);
      } catch (const UninformativeClassifierError&) {
        // The adjustment is undefined; report the unadjusted count instead.
        return base;
      }
    }
    case QuantifierKind::pcc:
      return pcc(post);
    case QuantifierKind::pacc: {
      const auto base = pcc(post);
      try {
        return pacc(base.value, *m.rates, qs.denominator_floor);
      } catch (const UninformativeClassifierError&) {
        return base;
      }
    }
    case QuantifierKind::sld:
      return sld(PosteriorSample{post, m.training_prevalence}, qs.sld);
    case QuantifierKind::hdy:
      return distribution_match(post, *m.score_pair, Divergence::hellinger, qs.alpha_step);
    case QuantifierKind::dys:
      return distribution_match(post, *m.score_pair, Divergence::topsoe, qs.alpha_step);
  }
  throw std::logic_error("quantify: unknown quantifier");
}

MethodGrid make_method_grid(const std::string& method, const std::vector<MethodDescriptor>& grid,
                            std::shared_ptr<EmbeddingCache> cache) {
  MethodGrid out;
  out.method = method;
  for (const auto& d : grid) {
    d.validate();
    out.candidates.push_back({d.key(), [d, cache](const FitContext& ctx) -> SubsetQuantifier {
                                auto fitted = std::make_shared<const FittedMethod>(
                                    fit(d, ctx.data, ctx.visible, ctx.calibration, cache.get()));
                                return [fitted](std::span<const NodeId> s) { return quantify(*fitted, s).value; };
                              }});
  }
  return out;
}

}  // namespace netquant
