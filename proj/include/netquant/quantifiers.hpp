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
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "netquant/matrix.hpp"
#include "netquant/readout.hpp"

namespace netquant {

enum class QuantifierKind { cc, acc, pcc, pacc, sld, hdy, dys };

std::string_view to_string(QuantifierKind kind);
QuantifierKind parse_quantifier(std::string_view name);
// True for the quantifiers that only need hard labels (CC, ACC).
bool uses_hard_labels(QuantifierKind kind);

struct PosteriorSample {
  std::vector<double> posteriors;
  double training_prevalence = 0.5;
};

struct ClassifierRates {
  double tpr = 1.0;
  double fpr = 0.0;
  bool soft = false;  // expectations of posteriors instead of hard counts
};

struct PrevalenceEstimate {
  double value = 0.0;  // positive-class prevalence, always in [0, 1]
  QuantifierKind method = QuantifierKind::cc;
  int iterations = 0;
  bool clipped = false;

  double negative() const { return 1.0 - value; }
};

// Validation-set scores split by true class, used by HDy and DyS.
struct ScoreDistributionPair {
  std::vector<double> positive_scores;
  std::vector<double> negative_scores;
  int bin_count = 10;
};

enum class Divergence { hellinger, topsoe };

inline constexpr double kDefaultDenominatorFloor = 1e-3;

PrevalenceEstimate cc(std::span<const int> hard_predictions);

// (cc - fpr) / (tpr - fpr), clipped to [0, 1]. Requires hard rates.
PrevalenceEstimate acc(double cc_estimate, const ClassifierRates& rates,
                       double denom_floor = kDefaultDenominatorFloor);

PrevalenceEstimate pcc(std::span<const double> posteriors);
PrevalenceEstimate pcc(const PosteriorSample& sample);

// PCC counterpart of acc(). Requires soft rates.
PrevalenceEstimate pacc(double pcc_estimate, const ClassifierRates& rates,
                        double denom_floor = kDefaultDenominatorFloor);

// Hard rates threshold scores at > 0.5; soft rates average the scores.
ClassifierRates rates_from_scores(std::span<const double> scores, BinaryLabels labels, bool soft);

// Trains on (train_x, train_y) and returns scores in [0, 1] for test_x.
using ScoreFunction =
    std::function<std::vector<double>(const Matrix& train_x, BinaryLabels train_y, const Matrix& test_x)>;

// Fold id in [0, k) per row; each class is shuffled and dealt round-robin.
std::vector<int> stratified_folds(BinaryLabels labels, int k, std::uint64_t seed);

// tpr/fpr from pooled out-of-fold scores of a stratified k-fold split. k is
// lowered to the size of the smaller class when that is smaller than k.
ClassifierRates estimate_rates(const ScoreFunction& fit_and_score, const Matrix& x,
                               BinaryLabels labels, int k, bool soft, std::uint64_t seed);

struct SldOptions {
  double tolerance = 1e-6;
  int max_iterations = 1000;
  double epsilon = 1e-6;  // posteriors and estimates are kept in [eps, 1 - eps]
};

// Saerens-Latinne-Decaestecker EM re-estimation of the positive prior.
PrevalenceEstimate sld(const PosteriorSample& sample, const SldOptions& options = {});

// Normalized equal-width histogram on [0, 1].
std::vector<double> score_histogram(std::span<const double> scores, int bins);

double histogram_divergence(std::span<const double> p, std::span<const double> q,
                            Divergence metric);

// Grid search over alpha for the mixture alpha * pos + (1 - alpha) * neg
// closest to the unlabeled histogram. Ties go to the smaller alpha.
// Hellinger gives HDy, Topsoe gives DyS.
PrevalenceEstimate distribution_match(std::span<const double> unlabeled_scores,
                                      const ScoreDistributionPair& pair, Divergence metric,
                                      double alpha_step = 0.01);

// Median of distribution_match over several bin counts.
PrevalenceEstimate distribution_match_multibin(std::span<const double> unlabeled_scores,
                                               const ScoreDistributionPair& pair,
                                               Divergence metric, double alpha_step,
                                               std::span<const int> bin_counts);

}  // namespace netquant
