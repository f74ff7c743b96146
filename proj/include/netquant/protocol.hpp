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
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "netquant/graph.hpp"
#include "netquant/rng.hpp"

namespace netquant {

struct APPConfig {
  std::vector<double> prevalence_grid = default_grid();
  // Total APP instances per evaluation, spread round-robin over the grid.
  int samples_per_run = 100;
  // 0 picks min(500, positives in pool, negatives in pool), which keeps
  // every grid point attainable.
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;

  // 0.00, 0.05, ..., 1.00
  static std::vector<double> default_grid();
  void validate() const;
};

// Pool of labeled candidates for APP draws, split by class, ascending ids.
struct LabeledPool {
  std::vector<NodeId> positives;
  std::vector<NodeId> negatives;

  static LabeledPool from(std::span<const NodeId> nodes, const LabelSet& labels);
  std::size_t size() const { return positives.size() + negatives.size(); }
};

// round(p * size) with ties to even.
std::size_t app_positive_count(double prevalence, std::size_t size);

// Uniform draw without replacement of app_positive_count(p, size) positives
// and the remainder negatives. Returned ids are ascending. Throws
// InsufficientPoolError when the pool cannot supply the counts.
std::vector<NodeId> app_sample(const LabeledPool& pool, double prevalence, std::size_t size, Rng& rng);

std::size_t resolve_sample_size(const APPConfig& app, const LabeledPool& pool);

double mae(std::span<const double> true_prevalences, std::span<const double> estimates);

struct SplitPlan {
  int fold_count = 5;
  double train_fraction = 0.625;
  double calibration_fraction = 0.125;
  double validation_fraction = 0.25;
  // Share of the inner training split whose labels are kept.
  double label_fraction = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Stratified partition of the labeled nodes into plan.fold_count test folds.
std::vector<std::vector<NodeId>> make_folds(const LabelSet& labels, const SplitPlan& plan);

struct InnerSplit {
  std::vector<NodeId> train;
  std::vector<NodeId> calibration;
  std::vector<NodeId> validation;
};

// Stratified train/calibration/validation split of a development set. The
// validation and calibration sizes are round(fraction * |dev|); training
// takes the rest. `fold` keys the random stream.
InnerSplit make_inner_split(std::span<const NodeId> development, const LabelSet& labels,
                            const SplitPlan& plan, int fold);

// Stratified subsample keeping round(fraction * class size) nodes of each
// class, at least one per class present.
std::vector<NodeId> subsample_labeled(std::span<const NodeId> nodes, const LabelSet& labels,
                                      double fraction, std::uint64_t seed);

// Prevalence estimator for node subsets. Must be safe to call concurrently.
using SubsetQuantifier = std::function<double(std::span<const NodeId>)>;

struct FitContext {
  const Dataset& data;
  // Labels of the training and calibration nodes only.
  const LabelSet& visible;
  std::span<const NodeId> train;
  std::span<const NodeId> calibration;
  int fold;
};

struct Candidate {
  std::string config;  // human-readable hyperparameter summary
  std::function<SubsetQuantifier(const FitContext&)> fit;
};

struct MethodGrid {
  std::string method;
  std::vector<Candidate> candidates;
};

struct EvaluationRecord {
  int fold = 0;
  std::string method;
  double true_prevalence = 0.0;  // realized prevalence of the drawn subset
  double estimated_prevalence = 0.0;
  double grid_prevalence = 0.0;  // grid point the subset was drawn for

  friend bool operator==(const EvaluationRecord&, const EvaluationRecord&) = default;
};

struct SkippedInstance {
  int fold = 0;
  double grid_prevalence = 0.0;

  friend bool operator==(const SkippedInstance&, const SkippedInstance&) = default;
};

struct EvaluationReport {
  std::vector<EvaluationRecord> records;
  std::vector<double> mae_per_fold;
  double mae_mean = 0.0;
  double mae_std = 0.0;  // population formula over folds
  std::vector<std::string> selected;  // chosen config per fold
  std::vector<SkippedInstance> skipped;

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

// Draws plan.fold_count folds; for each, splits the development part,
// fits every candidate, keeps the one with the lowest validation MAE
// (first wins on ties), and evaluates it by APP on the test fold. Splits
// and APP subsets depend only on (plan.seed, app.seed), so every method
// sees the same data.
EvaluationReport run_cross_validation(const Dataset& data, const MethodGrid& grid,
                                      const SplitPlan& plan, const APPConfig& app);

// APP evaluation of one quantifier on a pool. Instance i targets grid point
// i mod grid size and uses the stream derive_seed(app.seed, stream, fold, i).
std::vector<EvaluationRecord> evaluate_app(const SubsetQuantifier& q, const LabeledPool& pool,
                                           const APPConfig& app, std::string_view stream, int fold,
                                           const std::string& method,
                                           std::vector<SkippedInstance>* skipped = nullptr);

// Fills mae_per_fold, mae_mean and mae_std from the records.
void summarize(EvaluationReport& report, int fold_count);

struct DiagonalRow {
  double true_prevalence = 0.0;
  double mean_estimate = 0.0;
  double std_estimate = 0.0;  // population formula
};

// One row per grid prevalence, ascending.
std::vector<DiagonalRow> export_diagonal(const EvaluationReport& report);

// Shortest round-trip decimal form, used by every writer.
std::string format_double(double v);

// fold,method,true_prev,est_prev
void write_report_csv(const std::filesystem::path& path, std::span<const EvaluationReport> reports);
// {"methods": {name: {"mae_mean", "mae_std", "mae_per_fold", "selected"}}}
void write_summary_json(const std::filesystem::path& path, std::span<const std::string> methods,
                        std::span<const EvaluationReport> reports);
// true_prev,mean_est,std_est (one file per method)
void write_diagonal_csv(const std::filesystem::path& path, std::span<const DiagonalRow> rows);

}  // namespace netquant
