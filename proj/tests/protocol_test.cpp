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

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

#include "netquant/error.hpp"
#include "netquant/protocol.hpp"
#include "netquant/synth.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace netquant {
namespace {

LabeledPool pool_of(std::size_t pos, std::size_t neg) {
  LabeledPool p;
  for (std::size_t i = 0; i < pos; ++i) p.positives.push_back(i);
  for (std::size_t i = 0; i < neg; ++i) p.negatives.push_back(pos + i);
  return p;
}

std::size_t count_positives(const std::vector<NodeId>& s, const LabeledPool& p) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](NodeId v) {
    return std::binary_search(p.positives.begin(), p.positives.end(), v);
  }));
}

TEST(AppSample, Examples) {
  const auto pool = pool_of(200, 200);
  Rng rng(1);
  const auto zero = app_sample(pool, 0.0, 100, rng);
  EXPECT_EQ(zero.size(), 100u);
  EXPECT_EQ(count_positives(zero, pool), 0u);
  EXPECT_EQ(count_positives(app_sample(pool, 0.5, 10, rng), pool), 5u);
  const auto third = app_sample(pool, 0.33, 10, rng);
  EXPECT_EQ(count_positives(third, pool), 3u);
  EXPECT_DOUBLE_EQ(static_cast<double>(count_positives(third, pool)) / 10.0, 0.3);
}

TEST(AppSample, RoundsHalfToEven) {
  EXPECT_EQ(app_positive_count(0.25, 10), 2u);  // 2.5
  EXPECT_EQ(app_positive_count(0.35, 10), 4u);  // 3.5 (0.35 * 10 is 3.4999999999999996)
  EXPECT_EQ(app_positive_count(0.15, 10), 2u);  // 1.5
  EXPECT_EQ(app_positive_count(0.05, 10), 0u);  // 0.5
  EXPECT_EQ(app_positive_count(0.33, 10), 3u);
  EXPECT_EQ(app_positive_count(1.0, 7), 7u);
}

TEST(AppSample, InsufficientPool) {
  const auto pool = pool_of(3, 50);
  Rng rng(2);
  EXPECT_THROW(app_sample(pool, 0.5, 10, rng), InsufficientPoolError);
  EXPECT_NO_THROW(app_sample(pool, 0.3, 10, rng));
}

TEST(AppSampleProperty, RealizedPrevalenceIsExactAndDrawIsWithoutReplacement) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    SCOPED_TRACE(trial);
    const auto pool = pool_of(100 + rng.index(100), 100 + rng.index(100));
    const double p = rng.uniform();
    const std::size_t size = 1 + rng.index(100);
    const auto s = app_sample(pool, p, size, rng);
    ASSERT_EQ(s.size(), size);
    ASSERT_TRUE(std::is_sorted(s.begin(), s.end()));
    ASSERT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
    ASSERT_EQ(count_positives(s, pool), app_positive_count(p, size));
    ASSERT_EQ(static_cast<double>(count_positives(s, pool)) / static_cast<double>(size),
              static_cast<double>(app_positive_count(p, size)) / static_cast<double>(size));
  }
}

TEST(AppSampleProperty, EveryPoolMemberCanBeDrawn) {
  const auto pool = pool_of(20, 20);
  Rng rng(4);
  std::vector<int> hits(40, 0);
  for (int i = 0; i < 2000; ++i) {
    for (NodeId v : app_sample(pool, 0.5, 10, rng)) ++hits[v];
  }
  // Each node is drawn with probability 1/4 per call.
  for (int h : hits) {
    EXPECT_GT(h, 380);
    EXPECT_LT(h, 620);
  }
}

TEST(Mae, Examples) {
  const std::vector<double> a{0.1, 0.5, 0.9};
  EXPECT_EQ(mae(a, a), 0.0);
  EXPECT_NEAR(mae(std::vector<double>{0.2, 0.8}, std::vector<double>{0.3, 0.7}), 0.1, 1e-15);
  EXPECT_THROW(mae(std::vector<double>{0.2}, std::vector<double>{0.3, 0.7}), std::invalid_argument);
  EXPECT_THROW(mae(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
}

TEST(Mae, MatchesIndependentSummation) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(500);
    const auto t = testing::random_vector(rng, n), e = testing::random_vector(rng, n);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = std::abs(t[i] - e[i]);
    ASSERT_NEAR(mae(t, e), oracle::mean(d), 1e-15);
  }
}

TEST(ExportDiagonal, Examples) {
  EvaluationReport r;
  r.records = {{0, "m", 0.5, 0.4, 0.5}, {1, "m", 0.5, 0.6, 0.5}};
  const auto rows = export_diagonal(r);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].true_prevalence, 0.5);
  EXPECT_NEAR(rows[0].mean_estimate, 0.5, 1e-15);
  EXPECT_NEAR(rows[0].std_estimate, 0.1, 1e-15);

  EvaluationReport perfect;
  for (double p : APPConfig::default_grid()) perfect.records.push_back({0, "m", p, p, p});
  for (const auto& row : export_diagonal(perfect)) {
    EXPECT_EQ(row.mean_estimate, row.true_prevalence);
    EXPECT_EQ(row.std_estimate, 0.0);
  }
  EXPECT_EQ(export_diagonal(perfect).size(), 21u);
  EXPECT_THROW(export_diagonal(EvaluationReport{}), std::invalid_argument);
}

TEST(Summarize, PopulationStdOverFolds) {
  EvaluationReport r;
  r.records = {{0, "m", 0.2, 0.3, 0.2}, {0, "m", 0.4, 0.4, 0.4}, {1, "m", 0.5, 0.8, 0.5}};
  summarize(r, 2);
  ASSERT_EQ(r.mae_per_fold.size(), 2u);
  EXPECT_NEAR(r.mae_per_fold[0], 0.05, 1e-15);
  EXPECT_NEAR(r.mae_per_fold[1], 0.3, 1e-15);
  EXPECT_NEAR(r.mae_mean, 0.175, 1e-15);
  EXPECT_NEAR(r.mae_std, 0.125, 1e-15);
}

// ------------------------------------------------------------ splits

LabelSet sbm_labels(std::size_t n, std::uint64_t seed) {
  SbmConfig c;
  c.node_count = n;
  c.positive_fraction = 0.3;
  c.seed = seed;
  return generate_sbm(c).labels;
}

TEST(Splits, FoldsPartitionTheLabeledNodes) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SCOPED_TRACE(seed);
    Rng rng(seed);
    const auto y = testing::random_labels(rng, 100 + rng.index(200), 0.3, 0.8);
    SplitPlan plan;
    plan.seed = seed;
    const auto folds = make_folds(y, plan);
    ASSERT_EQ(folds.size(), 5u);
    std::vector<NodeId> all;
    for (const auto& f : folds) {
      ASSERT_TRUE(std::is_sorted(f.begin(), f.end()));
      all.insert(all.end(), f.begin(), f.end());
    }
    std::sort(all.begin(), all.end());
    ASSERT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());  // pairwise disjoint
    ASSERT_EQ(all, std::vector<NodeId>(y.labeled().begin(), y.labeled().end()));
    // Stratified: class counts per fold differ by at most one.
    std::vector<std::size_t> pos;
    for (const auto& f : folds) pos.push_back(LabeledPool::from(f, y).positives.size());
    ASSERT_LE(*std::max_element(pos.begin(), pos.end()) - *std::min_element(pos.begin(), pos.end()), 1u);
  }
}

TEST(Splits, InnerSplitSizesFollowTheFractions) {
  const auto y = sbm_labels(1000, 6);
  SplitPlan plan;
  const auto folds = make_folds(y, plan);
  std::vector<NodeId> dev;
  for (int g = 1; g < 5; ++g) dev.insert(dev.end(), folds[static_cast<std::size_t>(g)].begin(), folds[static_cast<std::size_t>(g)].end());
  std::sort(dev.begin(), dev.end());
  const auto inner = make_inner_split(dev, y, plan, 0);
  const double n = static_cast<double>(dev.size());
  EXPECT_NEAR(static_cast<double>(inner.train.size()), 0.625 * n, 1.0);
  EXPECT_NEAR(static_cast<double>(inner.calibration.size()), 0.125 * n, 1.0);
  EXPECT_NEAR(static_cast<double>(inner.validation.size()), 0.25 * n, 1.0);
  std::vector<NodeId> all = inner.train;
  all.insert(all.end(), inner.calibration.begin(), inner.calibration.end());
  all.insert(all.end(), inner.validation.begin(), inner.validation.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, dev);
  // Each part keeps the class ratio (30% positives) within one node.
  for (const auto* part : {&inner.train, &inner.calibration, &inner.validation}) {
    const auto pool = LabeledPool::from(*part, y);
    EXPECT_NEAR(static_cast<double>(pool.positives.size()), 0.3 * static_cast<double>(part->size()), 1.5);
  }
}

TEST(Splits, PlanValidation) {
  SplitPlan plan;
  plan.train_fraction = 0.7;
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan = {};
  plan.fold_count = 1;
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  plan = {};
  plan.label_fraction = 0.0;
  EXPECT_THROW(plan.validate(), std::invalid_argument);
  APPConfig app;
  app.prevalence_grid = {0.5, 0.2};
  EXPECT_THROW(app.validate(), std::invalid_argument);
  app.prevalence_grid = {0.2, 1.5};
  EXPECT_THROW(app.validate(), std::invalid_argument);
}

TEST(Splits, SubsampleKeepsBothClasses) {
  const auto y = sbm_labels(200, 7);
  const auto all = y.labeled();
  const auto s = subsample_labeled(all, y, 0.01, 3);
  const auto pool = LabeledPool::from(s, y);
  EXPECT_GE(pool.positives.size(), 1u);
  EXPECT_GE(pool.negatives.size(), 1u);
  const auto half = subsample_labeled(all, y, 0.5, 3);
  EXPECT_NEAR(static_cast<double>(half.size()), 100.0, 1.0);
  EXPECT_EQ(half, subsample_labeled(all, y, 0.5, 3));
}

// ------------------------------------------------- cross-validation

Dataset small_dataset(std::uint64_t seed) {
  SbmConfig c;
  c.node_count = 400;
  c.positive_fraction = 0.4;
  c.seed = seed;
  return generate_sbm(c);
}

APPConfig small_app(std::uint64_t seed) {
  APPConfig app;
  app.samples_per_run = 42;
  app.sample_size = 20;
  app.seed = seed;
  return app;
}

// Quantifier that reads the true labels: returns the exact realized prevalence.
Candidate oracle_candidate(const Dataset& data) {
  return {"oracle", [&data](const FitContext&) -> SubsetQuantifier {
            return [&data](std::span<const NodeId> s) {
              double k = 0;
              for (NodeId v : s) k += data.labels[v] == Label::positive;
              return k / static_cast<double>(s.size());
            };
          }};
}

Candidate constant_candidate(double q) {
  return {"const", [q](const FitContext&) -> SubsetQuantifier {
            return [q](std::span<const NodeId>) { return q; };
          }};
}

TEST(CrossValidation, OracleQuantifierHasZeroMae) {
  const auto data = small_dataset(1);
  SplitPlan plan;
  plan.seed = 9;
  const auto rep = run_cross_validation(data, {"oracle", {oracle_candidate(data)}}, plan, small_app(9));
  EXPECT_EQ(rep.records.size(), 5u * 42u);
  EXPECT_TRUE(rep.skipped.empty());
  EXPECT_EQ(rep.mae_mean, 0.0);
  for (double m : rep.mae_per_fold) EXPECT_EQ(m, 0.0);
}

TEST(CrossValidation, ConstantQuantifierMaeIsAnalytic) {
  const auto data = small_dataset(2);
  const double q = 0.37;
  const auto app = small_app(3);
  const auto rep = run_cross_validation(data, {"const", {constant_candidate(q)}}, SplitPlan{}, app);
  // Instance i targets grid point i mod 21; sample size 20 makes every grid
  // point exactly attainable, so realized prevalence equals the grid value.
  const auto grid = APPConfig::default_grid();
  double expected = 0.0;
  for (int i = 0; i < app.samples_per_run; ++i) {
    expected += std::abs(grid[static_cast<std::size_t>(i) % grid.size()] - q);
  }
  expected /= app.samples_per_run;
  for (double m : rep.mae_per_fold) EXPECT_NEAR(m, expected, 1e-15);
  EXPECT_NEAR(rep.mae_std, 0.0, 1e-15);
}

TEST(CrossValidation, SelectsLowestValidationMae) {
  const auto data = small_dataset(3);
  MethodGrid grid{"pick", {constant_candidate(0.9), oracle_candidate(data), constant_candidate(0.5)}};
  const auto rep = run_cross_validation(data, grid, SplitPlan{}, small_app(1));
  for (const auto& s : rep.selected) EXPECT_EQ(s, "oracle");
  EXPECT_EQ(rep.mae_mean, 0.0);
}

TEST(CrossValidation, SameSeedGivesIdenticalReports) {
  const auto data = small_dataset(4);
  SplitPlan plan;
  plan.seed = 5;
  MethodGrid grid{"mix", {constant_candidate(0.3), constant_candidate(0.6)}};
  EXPECT_EQ(run_cross_validation(data, grid, plan, small_app(6)),
            run_cross_validation(data, grid, plan, small_app(6)));
}

// Records every training split and every subset a method is shown.
struct Recorder {
  std::mutex mutex;
  std::vector<std::vector<NodeId>> train, calibration, subsets;

  Candidate candidate(double q) {
    return {"rec", [this, q](const FitContext& ctx) -> SubsetQuantifier {
              {
                std::lock_guard lock(mutex);
                train.emplace_back(ctx.train.begin(), ctx.train.end());
                calibration.emplace_back(ctx.calibration.begin(), ctx.calibration.end());
              }
              return [this, q](std::span<const NodeId> s) {
                std::lock_guard lock(mutex);
                subsets.emplace_back(s.begin(), s.end());
                return q;
              };
            }};
  }
};

TEST(CrossValidation, MethodsSeeIdenticalSplitsAndSubsets) {
  const auto data = small_dataset(5);
  SplitPlan plan;
  plan.seed = 11;
  Recorder a, b;
  run_cross_validation(data, {"a", {a.candidate(0.2)}}, plan, small_app(12));
  run_cross_validation(data, {"b", {b.candidate(0.8)}}, plan, small_app(12));
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.calibration, b.calibration);
  std::sort(a.subsets.begin(), a.subsets.end());
  std::sort(b.subsets.begin(), b.subsets.end());
  EXPECT_EQ(a.subsets, b.subsets);
  EXPECT_EQ(a.subsets.size(), 5u * 2u * 42u);  // validation and test, per fold
}

TEST(CrossValidation, SubsetsNeverTouchTheFoldsFittingNodes) {
  const auto data = small_dataset(6);
  std::atomic<int> violations{0}, calls{0};
  const Candidate c{"guard", [&](const FitContext& ctx) -> SubsetQuantifier {
                      std::set<NodeId> fitted(ctx.train.begin(), ctx.train.end());
                      fitted.insert(ctx.calibration.begin(), ctx.calibration.end());
                      EXPECT_EQ(fitted.size(), ctx.train.size() + ctx.calibration.size());
                      for (NodeId v = 0; v < ctx.visible.size(); ++v) {
                        EXPECT_EQ(ctx.visible.is_labeled(v), fitted.count(v) == 1);
                      }
                      return [fitted, &violations, &calls](std::span<const NodeId> s) {
                        ++calls;
                        for (NodeId v : s) violations += static_cast<int>(fitted.count(v));
                        return 0.5;
                      };
                    }};
  run_cross_validation(data, {"guard", {c}}, SplitPlan{}, small_app(1));
  EXPECT_EQ(calls.load(), 5 * 2 * 42);
  EXPECT_EQ(violations.load(), 0);
}

TEST(CrossValidation, SingleClassTrainingSplitIsAnError) {
  auto data = small_dataset(7);
  std::vector<Label> y(data.labels.size(), Label::positive);
  y[3] = Label::negative;
  data.labels = LabelSet(std::move(y));
  EXPECT_THROW(run_cross_validation(data, {"c", {constant_candidate(0.5)}}, SplitPlan{}, small_app(1)),
               SingleClassError);
}

TEST(CrossValidation, ExtremePrevalencesSkipWhenPoolIsShort) {
  const auto data = small_dataset(8);
  APPConfig app = small_app(2);
  app.sample_size = 60;  // test folds hold about 32 positives and 48 negatives
  const auto rep = run_cross_validation(data, {"c", {constant_candidate(0.5)}}, SplitPlan{}, app);
  EXPECT_FALSE(rep.skipped.empty());
  EXPECT_EQ(rep.records.size() + rep.skipped.size(), 5u * 42u);
  for (const auto& s : rep.skipped) EXPECT_TRUE(s.grid_prevalence < 0.25 || s.grid_prevalence > 0.5);
}

// ------------------------------------------------------------ writers

class WriterTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / "netquant_protocol_writers";
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  static std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  std::filesystem::path dir_;
};

TEST_F(WriterTest, CsvAndJsonLayouts) {
  EvaluationReport r;
  r.records = {{0, "xnq", 0.1, 0.125, 0.1}, {1, "xnq", 0.3, 1.0 / 3.0, 0.3}};
  summarize(r, 2);
  r.selected = {"a", "b"};
  const std::vector<EvaluationReport> reps{r};
  write_report_csv(dir_ / "r.csv", reps);
  EXPECT_EQ(slurp(dir_ / "r.csv"),
            "fold,method,true_prev,est_prev\n0,xnq,0.1,0.125\n1,xnq,0.3,0.3333333333333333\n");
  write_diagonal_csv(dir_ / "d.csv", export_diagonal(r));
  EXPECT_EQ(slurp(dir_ / "d.csv").substr(0, 25), "true_prev,mean_est,std_es");
  const std::vector<std::string> names{"xnq"};
  write_summary_json(dir_ / "s.json", names, reps);
  const auto j = slurp(dir_ / "s.json");
  EXPECT_NE(j.find("\"mae_mean\""), std::string::npos);
  EXPECT_NE(j.find("\"mae_std\""), std::string::npos);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

}  // namespace
}  // namespace netquant
