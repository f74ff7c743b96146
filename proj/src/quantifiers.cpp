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

#include "netquant/quantifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "netquant/error.hpp"
#include "netquant/rng.hpp"

namespace netquant {
namespace {

PrevalenceEstimate clipped_estimate(double raw, QuantifierKind kind) {
  PrevalenceEstimate e;
  e.method = kind;
  e.value = std::clamp(raw, 0.0, 1.0);
  e.clipped = e.value != raw;
  return e;
}

PrevalenceEstimate adjust(double estimate, const ClassifierRates& rates, double denom_floor,
                          QuantifierKind kind) {
  if (!(denom_floor > 0)) throw std::invalid_argument("adjusted count: denom_floor must be > 0");
  const double denom = rates.tpr - rates.fpr;
  if (std::abs(denom) < denom_floor) {
    throw UninformativeClassifierError("adjusted count: |tpr - fpr| = " +
                                       std::to_string(std::abs(denom)) +
                                       " is below the floor; the classifier is uninformative");
  }
  return clipped_estimate((estimate - rates.fpr) / denom, kind);
}

void check_sorted_grid_step(double step) {
  if (!(step > 0) || step > 1) throw std::invalid_argument("distribution_match: bad alpha step");
}

}  // namespace

std::string_view to_string(QuantifierKind kind) {
  switch (kind) {
    case QuantifierKind::cc: return "cc";
    case QuantifierKind::acc: return "acc";
    case QuantifierKind::pcc: return "pcc";
    case QuantifierKind::pacc: return "pacc";
    case QuantifierKind::sld: return "sld";
    case QuantifierKind::hdy: return "hdy";
    case QuantifierKind::dys: return "dys";
  }
  return "?";
}

QuantifierKind parse_quantifier(std::string_view name) {
  for (auto k : {QuantifierKind::cc, QuantifierKind::acc, QuantifierKind::pcc, QuantifierKind::pacc,
                 QuantifierKind::sld, QuantifierKind::hdy, QuantifierKind::dys}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown quantifier '" + std::string(name) + "'");
}

bool uses_hard_labels(QuantifierKind kind) {
  return kind == QuantifierKind::cc || kind == QuantifierKind::acc;
}

PrevalenceEstimate cc(std::span<const int> hard_predictions) {
  if (hard_predictions.empty()) throw std::invalid_argument("cc: empty sample");
  std::size_t positives = 0;
  for (int y : hard_predictions) {
    if (y != 0 && y != 1) throw std::invalid_argument("cc: predictions must be 0/1");
    positives += static_cast<std::size_t>(y);
  }
  PrevalenceEstimate e;
  e.method = QuantifierKind::cc;
  e.value = static_cast<double>(positives) / static_cast<double>(hard_predictions.size());
  return e;
}

PrevalenceEstimate acc(double cc_estimate, const ClassifierRates& rates, double denom_floor) {
  if (rates.soft) throw std::invalid_argument("acc: requires hard rates");
  return adjust(cc_estimate, rates, denom_floor, QuantifierKind::acc);
}

PrevalenceEstimate pcc(std::span<const double> posteriors) {
  if (posteriors.empty()) throw std::invalid_argument("pcc: empty sample");
  // Neumaier summation keeps the mean exact to rounding on large subsets.
  double sum = 0.0, carry = 0.0;
  for (double p : posteriors) {
    const double t = sum + p;
    carry += std::abs(sum) >= std::abs(p) ? (sum - t) + p : (p - t) + sum;
    sum = t;
  }
  return clipped_estimate((sum + carry) / static_cast<double>(posteriors.size()), QuantifierKind::pcc);
}

PrevalenceEstimate pcc(const PosteriorSample& sample) { return pcc(sample.posteriors); }

PrevalenceEstimate pacc(double pcc_estimate, const ClassifierRates& rates, double denom_floor) {
  if (!rates.soft) throw std::invalid_argument("pacc: requires soft rates");
  return adjust(pcc_estimate, rates, denom_floor, QuantifierKind::pacc);
}

ClassifierRates rates_from_scores(std::span<const double> scores, BinaryLabels labels, bool soft) {
  if (scores.size() != labels.size()) throw std::invalid_argument("rates: size mismatch");
  double tp = 0, fn = 0, fp = 0, tn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double pos = soft ? scores[i] : (scores[i] > 0.5 ? 1.0 : 0.0);
    if (labels[i]) {
      tp += pos;
      fn += 1.0 - pos;
    } else {
      fp += pos;
      tn += 1.0 - pos;
    }
  }
  if (tp + fn == 0 || fp + tn == 0) {
    throw SingleClassError("rates: both classes must be present in the labeled set");
  }
  return {tp / (tp + fn), fp / (fp + tn), soft};
}

std::vector<int> stratified_folds(BinaryLabels labels, int k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("stratified_folds: k must be >= 1");
  std::vector<int> fold(labels.size(), 0);
  Rng rng(seed);
  int next = 0;
  for (int cls : {1, 0}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    rng.shuffle(members);
    // Continue dealing where the previous class stopped so fold sizes stay balanced.
    for (std::size_t i : members) {
      fold[i] = next;
      next = (next + 1) % k;
    }
  }
  return fold;
}

ClassifierRates estimate_rates(const ScoreFunction& fit_and_score, const Matrix& x,
                               BinaryLabels labels, int k, bool soft, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("estimate_rates: k must be >= 2");
  if (x.rows() != labels.size()) throw std::invalid_argument("estimate_rates: size mismatch");
  std::size_t pos = 0;
  for (int y : labels) pos += static_cast<std::size_t>(y == 1);
  const std::size_t smaller = std::min(pos, labels.size() - pos);
  if (smaller == 0) throw SingleClassError("estimate_rates: a class is absent from the labeled set");
  if (smaller < 2) {
    throw SingleClassError("estimate_rates: need at least two examples of each class");
  }
  k = std::min<int>(k, static_cast<int>(smaller));

  const auto fold = stratified_folds(labels, k, seed);
  std::vector<double> pooled(labels.size());
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < labels.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    std::vector<int> train_y;
    train_y.reserve(train.size());
    for (std::size_t i : train) train_y.push_back(labels[i]);
    auto scores = fit_and_score(x.select_rows(train), train_y, x.select_rows(test));
    if (scores.size() != test.size()) throw Error("estimate_rates: scorer returned wrong size");
    for (std::size_t t = 0; t < test.size(); ++t) pooled[test[t]] = scores[t];
  }
  return rates_from_scores(pooled, labels, soft);
}

PrevalenceEstimate sld(const PosteriorSample& sample, const SldOptions& options) {
  if (sample.posteriors.empty()) throw std::invalid_argument("sld: empty sample");
  const double q0 = sample.training_prevalence;
  if (!(q0 > 0 && q0 < 1)) throw std::invalid_argument("sld: training prevalence must lie in (0, 1)");
  if (options.max_iterations < 1) throw std::invalid_argument("sld: max_iterations must be >= 1");
  const double eps = options.epsilon;

  std::vector<double> post(sample.posteriors.size());
  for (std::size_t i = 0; i < post.size(); ++i) {
    const double p = sample.posteriors[i];
    if (!std::isfinite(p)) throw Error("sld: non-finite posterior");
    post[i] = std::clamp(p, eps, 1.0 - eps);
  }
  const double n = static_cast<double>(post.size());

  PrevalenceEstimate e;
  e.method = QuantifierKind::sld;
  double previous = q0;
  for (int k = 1; k <= options.max_iterations; ++k) {
    // E-step: reweight by the prior ratio and renormalize each pair.
    const double r_pos = previous / q0;
    const double r_neg = (1.0 - previous) / (1.0 - q0);
    double sum = 0.0;
    for (double p : post) {
      const double a = r_pos * p;
      sum += a / (a + r_neg * (1.0 - p));
    }
    // M-step.
    const double current = std::clamp(sum / n, eps, 1.0 - eps);
    if (!std::isfinite(current)) throw Error("sld: non-finite estimate");
    e.iterations = k;
    if (std::abs(current - previous) < options.tolerance) {
      e.value = current;
      return e;
    }
    previous = current;
  }
  e.value = previous;
  return e;
}

std::vector<double> score_histogram(std::span<const double> scores, int bins) {
  if (bins < 2) throw std::invalid_argument("score_histogram: need at least 2 bins");
  if (scores.empty()) throw std::invalid_argument("score_histogram: empty scores");
  std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
  for (double s : scores) {
    if (!std::isfinite(s)) throw std::invalid_argument("score_histogram: non-finite score");
    const double c = std::clamp(s, 0.0, 1.0);
    const auto b = std::min(static_cast<int>(c * bins), bins - 1);
    h[static_cast<std::size_t>(b)] += 1.0;
  }
  for (double& v : h) v /= static_cast<double>(scores.size());
  return h;
}

double histogram_divergence(std::span<const double> p, std::span<const double> q,
                            Divergence metric) {
  if (p.size() != q.size()) throw std::invalid_argument("histogram_divergence: bin count mismatch");
  double sp = 0, sq = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0 || q[i] < 0) throw std::invalid_argument("histogram_divergence: negative mass");
    sp += p[i];
    sq += q[i];
  }
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9) {
    throw std::invalid_argument("histogram_divergence: histograms must sum to 1");
  }
  double d = 0.0;
  if (metric == Divergence::hellinger) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double diff = std::sqrt(p[i]) - std::sqrt(q[i]);
      d += diff * diff;
    }
    return std::sqrt(d);
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = p[i] + q[i];
    if (p[i] > 0) d += p[i] * std::log(2.0 * p[i] / m);
    if (q[i] > 0) d += q[i] * std::log(2.0 * q[i] / m);
  }
  return std::max(0.0, d);
}

PrevalenceEstimate distribution_match(std::span<const double> unlabeled_scores,
                                      const ScoreDistributionPair& pair, Divergence metric,
                                      double alpha_step) {
  check_sorted_grid_step(alpha_step);
  if (unlabeled_scores.empty() || pair.positive_scores.empty() || pair.negative_scores.empty()) {
    throw std::invalid_argument("distribution_match: empty score set");
  }
  const int bins = pair.bin_count;
  const auto h_pos = score_histogram(pair.positive_scores, bins);
  const auto h_neg = score_histogram(pair.negative_scores, bins);
  const auto h_unl = score_histogram(unlabeled_scores, bins);

  const auto steps = static_cast<int>(std::lround(1.0 / alpha_step));
  std::vector<double> mix(h_pos.size());
  double best_alpha = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double alpha = static_cast<double>(i) / steps;
    for (std::size_t b = 0; b < mix.size(); ++b) mix[b] = alpha * h_pos[b] + (1.0 - alpha) * h_neg[b];
    const double d = histogram_divergence(mix, h_unl, metric);
    if (d < best) {
      best = d;
      best_alpha = alpha;
    }
  }
  PrevalenceEstimate e;
  e.method = metric == Divergence::hellinger ? QuantifierKind::hdy : QuantifierKind::dys;
  e.value = best_alpha;
  return e;
}

PrevalenceEstimate distribution_match_multibin(std::span<const double> unlabeled_scores,
                                               const ScoreDistributionPair& pair,
                                               Divergence metric, double alpha_step,
                                               std::span<const int> bin_counts) {
  if (bin_counts.empty()) throw std::invalid_argument("distribution_match: no bin counts");
  std::vector<double> alphas;
  ScoreDistributionPair p = pair;
  for (int bins : bin_counts) {
    p.bin_count = bins;
    alphas.push_back(distribution_match(unlabeled_scores, p, metric, alpha_step).value);
  }
  std::sort(alphas.begin(), alphas.end());
  const std::size_t m = alphas.size();
  PrevalenceEstimate e;
  e.method = metric == Divergence::hellinger ? QuantifierKind::hdy : QuantifierKind::dys;
  e.value = m % 2 ? alphas[m / 2] : 0.5 * (alphas[m / 2 - 1] + alphas[m / 2]);
  return e;
}

}  // namespace netquant
