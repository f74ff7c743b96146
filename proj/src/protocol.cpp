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

#include "netquant/protocol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "netquant/error.hpp"

namespace netquant {
namespace {

// Shuffles each class and interleaves them so that every prefix keeps the
// class ratio as closely as possible.
std::vector<NodeId> stratified_order(std::span<const NodeId> nodes, const LabelSet& labels, Rng& rng) {
  std::vector<NodeId> pos, neg;
  for (NodeId v : nodes) {
    if (!labels.is_labeled(v)) throw std::invalid_argument("stratified split: node is unlabeled");
    (labels[v] == Label::positive ? pos : neg).push_back(v);
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  rng.shuffle(pos);
  rng.shuffle(neg);
  std::vector<NodeId> out;
  out.reserve(nodes.size());
  std::size_t i = 0, j = 0;
  while (i < pos.size() || j < neg.size()) {
    // Compare (i + 0.5) / |pos| against (j + 0.5) / |neg| without division.
    const bool take_pos =
        j == neg.size() ||
        (i < pos.size() && (2 * i + 1) * neg.size() <= (2 * j + 1) * pos.size());
    out.push_back(take_pos ? pos[i++] : neg[j++]);
  }
  return out;
}

std::size_t round_count(double fraction, std::size_t n) {
  return app_positive_count(fraction, n);
}

void require_fraction(double f, const char* what) {
  if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument(std::string("SplitPlan: ") + what + " outside [0, 1]");
}

}  // namespace

std::vector<double> APPConfig::default_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
  return grid;
}

void APPConfig::validate() const {
  if (prevalence_grid.empty()) throw std::invalid_argument("APPConfig: empty prevalence grid");
  for (std::size_t i = 0; i < prevalence_grid.size(); ++i) {
    const double p = prevalence_grid[i];
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("APPConfig: grid value outside [0, 1]");
    if (i > 0 && !(prevalence_grid[i - 1] < p)) {
      throw std::invalid_argument("APPConfig: grid must be strictly increasing");
    }
  }
  if (samples_per_run < 1) throw std::invalid_argument("APPConfig: samples_per_run must be >= 1");
}

LabeledPool LabeledPool::from(std::span<const NodeId> nodes, const LabelSet& labels) {
  LabeledPool pool;
  for (NodeId v : nodes) {
    if (!labels.is_labeled(v)) throw std::invalid_argument("LabeledPool: node is unlabeled");
    (labels[v] == Label::positive ? pool.positives : pool.negatives).push_back(v);
  }
  std::sort(pool.positives.begin(), pool.positives.end());
  std::sort(pool.negatives.begin(), pool.negatives.end());
  return pool;
}

std::size_t app_positive_count(double prevalence, std::size_t size) {
  if (!(prevalence >= 0.0 && prevalence <= 1.0)) {
    throw std::invalid_argument("app_positive_count: prevalence outside [0, 1]");
  }
  const double x = prevalence * static_cast<double>(size);
  const double lo = std::floor(x);
  const double frac = x - lo;
  // Products such as 0.15 * 10 land a hair off the half; treat them as ties.
  constexpr double kTieSlack = 1e-9;
  double r;
  if (std::abs(frac - 0.5) <= kTieSlack) {
    r = std::fmod(lo, 2.0) == 0.0 ? lo : lo + 1.0;
  } else {
    r = frac < 0.5 ? lo : lo + 1.0;
  }
  return std::min(size, static_cast<std::size_t>(r));
}

std::vector<NodeId> app_sample(const LabeledPool& pool, double prevalence, std::size_t size, Rng& rng) {
  if (size == 0) throw std::invalid_argument("app_sample: size must be >= 1");
  const std::size_t n_pos = app_positive_count(prevalence, size);
  const std::size_t n_neg = size - n_pos;
  if (n_pos > pool.positives.size() || n_neg > pool.negatives.size()) {
    throw InsufficientPoolError("app_sample: pool holds " + std::to_string(pool.positives.size()) +
                                " positives and " + std::to_string(pool.negatives.size()) +
                                " negatives, need " + std::to_string(n_pos) + " and " +
                                std::to_string(n_neg));
  }
  std::vector<NodeId> out;
  out.reserve(size);
  auto take = [&](const std::vector<NodeId>& src, std::size_t k) {
    std::vector<NodeId> tmp = src;
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(tmp[i], tmp[i + rng.index(tmp.size() - i)]);
    }
    out.insert(out.end(), tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(k));
  };
  take(pool.positives, n_pos);
  take(pool.negatives, n_neg);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t resolve_sample_size(const APPConfig& app, const LabeledPool& pool) {
  if (app.sample_size > 0) return app.sample_size;
  return std::min<std::size_t>({500, pool.positives.size(), pool.negatives.size()});
}

double mae(std::span<const double> true_prevalences, std::span<const double> estimates) {
  if (true_prevalences.size() != estimates.size()) throw std::invalid_argument("mae: length mismatch");
  if (true_prevalences.empty()) throw std::invalid_argument("mae: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) s += std::abs(true_prevalences[i] - estimates[i]);
  return s / static_cast<double>(estimates.size());
}

void SplitPlan::validate() const {
  if (fold_count < 2) throw std::invalid_argument("SplitPlan: fold_count must be >= 2");
  require_fraction(train_fraction, "train_fraction");
  require_fraction(calibration_fraction, "calibration_fraction");
  require_fraction(validation_fraction, "validation_fraction");
  if (std::abs(train_fraction + calibration_fraction + validation_fraction - 1.0) > 1e-9) {
    throw std::invalid_argument("SplitPlan: fractions must sum to 1");
  }
  if (!(label_fraction > 0.0 && label_fraction <= 1.0)) {
    throw std::invalid_argument("SplitPlan: label_fraction must be in (0, 1]");
  }
}

std::vector<std::vector<NodeId>> make_folds(const LabelSet& labels, const SplitPlan& plan) {
  plan.validate();
  const auto labeled = labels.labeled();
  if (labeled.size() < static_cast<std::size_t>(plan.fold_count)) {
    throw std::invalid_argument("make_folds: fewer labeled nodes than folds");
  }
  Rng rng(derive_seed(plan.seed, "split/folds"));
  // Each class is shuffled and dealt round-robin, the deal continuing from
  // one class into the next, so fold sizes differ by at most one.
  const auto pool = LabeledPool::from(labeled, labels);
  std::vector<NodeId> order;
  for (const auto* cls : {&pool.positives, &pool.negatives}) {
    std::vector<NodeId> tmp = *cls;
    rng.shuffle(tmp);
    order.insert(order.end(), tmp.begin(), tmp.end());
  }
  std::vector<std::vector<NodeId>> folds(static_cast<std::size_t>(plan.fold_count));
  for (std::size_t i = 0; i < order.size(); ++i) folds[i % folds.size()].push_back(order[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

InnerSplit make_inner_split(std::span<const NodeId> development, const LabelSet& labels,
                            const SplitPlan& plan, int fold) {
  plan.validate();
  Rng rng(derive_seed(plan.seed, "split/inner", static_cast<std::uint64_t>(fold)));
  const auto order = stratified_order(development, labels, rng);
  const std::size_t n = order.size();
  const std::size_t n_val = round_count(plan.validation_fraction, n);
  const std::size_t n_cal = std::min(n - n_val, round_count(plan.calibration_fraction, n));
  InnerSplit s;
  s.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.calibration.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val),
                       order.begin() + static_cast<std::ptrdiff_t>(n_val + n_cal));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val + n_cal), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.calibration.begin(), s.calibration.end());
  std::sort(s.validation.begin(), s.validation.end());
  return s;
}

std::vector<NodeId> subsample_labeled(std::span<const NodeId> nodes, const LabelSet& labels,
                                      double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("subsample_labeled: fraction must be in (0, 1]");
  }
  const auto pool = LabeledPool::from(nodes, labels);
  Rng rng(derive_seed(seed, "split/label-fraction"));
  std::vector<NodeId> out;
  for (const auto* cls : {&pool.positives, &pool.negatives}) {
    if (cls->empty()) continue;
    std::vector<NodeId> tmp = *cls;
    rng.shuffle(tmp);
    const std::size_t keep = std::max<std::size_t>(1, round_count(fraction, tmp.size()));
    out.insert(out.end(), tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<EvaluationRecord> evaluate_app(const SubsetQuantifier& q, const LabeledPool& pool,
                                           const APPConfig& app, std::string_view stream, int fold,
                                           const std::string& method,
                                           std::vector<SkippedInstance>* skipped) {
  app.validate();
  const std::size_t size = resolve_sample_size(app, pool);
  if (size == 0) throw InsufficientPoolError("evaluate_app: pool lacks one of the classes");

  struct Draw {
    double grid;
    double realized;
    std::vector<NodeId> subset;
  };
  std::vector<Draw> draws;
  for (int i = 0; i < app.samples_per_run; ++i) {
    const double p = app.prevalence_grid[static_cast<std::size_t>(i) % app.prevalence_grid.size()];
    Rng rng(derive_seed(app.seed, stream, static_cast<std::uint64_t>(fold), static_cast<std::uint64_t>(i)));
    try {
      auto subset = app_sample(pool, p, size, rng);
      const double realized = static_cast<double>(app_positive_count(p, size)) / static_cast<double>(size);
      draws.push_back({p, realized, std::move(subset)});
    } catch (const InsufficientPoolError&) {
      if (skipped) skipped->push_back({fold, p});
    }
  }

  std::vector<double> est(draws.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < draws.size(); ++i) {
    try {
      est[i] = q(draws[i].subset);
    } catch (...) {
#pragma omp critical(netquant_app_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<EvaluationRecord> records;
  records.reserve(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    records.push_back({fold, method, draws[i].realized, est[i], draws[i].grid});
  }
  return records;
}

void summarize(EvaluationReport& report, int fold_count) {
  report.mae_per_fold.assign(static_cast<std::size_t>(fold_count), 0.0);
  std::vector<std::size_t> counts(static_cast<std::size_t>(fold_count), 0);
  for (const auto& r : report.records) {
    if (r.fold < 0 || r.fold >= fold_count) throw std::invalid_argument("summarize: fold id out of range");
    report.mae_per_fold[static_cast<std::size_t>(r.fold)] += std::abs(r.true_prevalence - r.estimated_prevalence);
    ++counts[static_cast<std::size_t>(r.fold)];
  }
  for (std::size_t f = 0; f < counts.size(); ++f) {
    if (counts[f] == 0) throw Error("summarize: fold " + std::to_string(f) + " has no evaluated instances");
    report.mae_per_fold[f] /= static_cast<double>(counts[f]);
  }
  double mean = 0.0;
  for (double m : report.mae_per_fold) mean += m;
  mean /= fold_count;
  double var = 0.0;
  for (double m : report.mae_per_fold) var += (m - mean) * (m - mean);
  report.mae_mean = mean;
  report.mae_std = std::sqrt(var / fold_count);
}

EvaluationReport run_cross_validation(const Dataset& data, const MethodGrid& grid,
                                      const SplitPlan& plan, const APPConfig& app) {
  plan.validate();
  app.validate();
  if (grid.candidates.empty()) throw std::invalid_argument("run_cross_validation: empty grid");
  if (data.labels.size() != data.graph.node_count()) {
    throw std::invalid_argument("run_cross_validation: label count does not match node count");
  }
  const auto folds = make_folds(data.labels, plan);
  EvaluationReport report;
  for (int f = 0; f < plan.fold_count; ++f) {
    std::vector<NodeId> dev;
    for (int g = 0; g < plan.fold_count; ++g) {
      if (g != f) dev.insert(dev.end(), folds[static_cast<std::size_t>(g)].begin(), folds[static_cast<std::size_t>(g)].end());
    }
    std::sort(dev.begin(), dev.end());
    auto inner = make_inner_split(dev, data.labels, plan, f);
    if (plan.label_fraction < 1.0) {
      inner.train = subsample_labeled(inner.train, data.labels,
                                      plan.label_fraction, derive_seed(plan.seed, "fold", static_cast<std::uint64_t>(f)));
    }
    const auto train_pool = LabeledPool::from(inner.train, data.labels);
    if (train_pool.positives.empty() || train_pool.negatives.empty()) {
      throw SingleClassError("run_cross_validation: fold " + std::to_string(f) +
                             " has a single class in its training split");
    }
    std::vector<NodeId> visible_nodes = inner.train;
    visible_nodes.insert(visible_nodes.end(), inner.calibration.begin(), inner.calibration.end());
    const LabelSet visible = data.labels.restricted_to(visible_nodes);
    const FitContext ctx{data, visible, inner.train, inner.calibration, f};

    const auto val_pool = LabeledPool::from(inner.validation, data.labels);
    SubsetQuantifier best;
    std::string best_config;
    double best_mae = std::numeric_limits<double>::infinity();
    for (const auto& cand : grid.candidates) {
      SubsetQuantifier q = cand.fit(ctx);
      const auto val = evaluate_app(q, val_pool, app, "app/validation", f, grid.method);
      if (val.empty()) throw InsufficientPoolError("run_cross_validation: no validation instance could be drawn");
      std::vector<double> t, e;
      for (const auto& r : val) {
        t.push_back(r.true_prevalence);
        e.push_back(r.estimated_prevalence);
      }
      const double m = mae(t, e);
      if (m < best_mae) {
        best_mae = m;
        best = std::move(q);
        best_config = cand.config;
      }
    }
    report.selected.push_back(best_config);
    const auto test_pool = LabeledPool::from(folds[static_cast<std::size_t>(f)], data.labels);
    auto test = evaluate_app(best, test_pool, app, "app/test", f, grid.method, &report.skipped);
    report.records.insert(report.records.end(), test.begin(), test.end());
  }
  summarize(report, plan.fold_count);
  return report;
}

std::vector<DiagonalRow> export_diagonal(const EvaluationReport& report) {
  if (report.records.empty()) throw std::invalid_argument("export_diagonal: empty report");
  std::map<double, std::vector<double>> groups;
  for (const auto& r : report.records) groups[r.grid_prevalence].push_back(r.estimated_prevalence);
  std::vector<DiagonalRow> rows;
  for (const auto& [p, est] : groups) {
    double mean = 0.0;
    for (double e : est) mean += e;
    mean /= static_cast<double>(est.size());
    double var = 0.0;
    for (double e : est) var += (e - mean) * (e - mean);
    rows.push_back({p, mean, std::sqrt(var / static_cast<double>(est.size()))});
  }
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_report_csv(const std::filesystem::path& path, std::span<const EvaluationReport> reports) {
  auto out = open_out(path);
  out << "fold,method,true_prev,est_prev\n";
  for (const auto& rep : reports) {
    for (const auto& r : rep.records) {
      out << r.fold << ',' << r.method << ',' << format_double(r.true_prevalence) << ','
          << format_double(r.estimated_prevalence) << '\n';
    }
  }
  if (!out) throw Error("write failed: " + path.string());
}

void write_summary_json(const std::filesystem::path& path, std::span<const std::string> methods,
                        std::span<const EvaluationReport> reports) {
  if (methods.size() != reports.size()) throw std::invalid_argument("write_summary_json: size mismatch");
  nlohmann::ordered_json j;
  j["methods"] = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    nlohmann::ordered_json m;
    m["mae_mean"] = r.mae_mean;
    m["mae_std"] = r.mae_std;
    m["mae_per_fold"] = r.mae_per_fold;
    m["selected"] = r.selected;
    m["records"] = r.records.size();
    m["skipped"] = r.skipped.size();
    j["methods"][methods[i]] = std::move(m);
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

void write_diagonal_csv(const std::filesystem::path& path, std::span<const DiagonalRow> rows) {
  auto out = open_out(path);
  out << "true_prev,mean_est,std_est\n";
  for (const auto& r : rows) {
    out << format_double(r.true_prevalence) << ',' << format_double(r.mean_estimate) << ','
        << format_double(r.std_estimate) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace netquant
