#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "longcode/metrics.hpp"
#include "support/metric_oracles.hpp"

namespace longcode {
namespace {

using namespace testing;
PredictionSet single_row(std::vector<double> probs, SparseLabels labels) {
  PredictionSet p(probs.size());
  p.add(std::span<const double>(probs), std::move(labels));
  return p;
}

// --- examples ------------------------------------------------------------

TEST(Confusion, ThresholdZeroPredictsEverything) {
  const auto p = single_row({0.2, 0.6, 0.8}, {1, 2});
  const auto c = confusion_at(p, 0.0);
  EXPECT_EQ(c.tp + c.fp, 3u);
  EXPECT_EQ(c.fn, 0u);
}

TEST(Confusion, HandCount) {
  const auto c = confusion_at(single_row({0.2, 0.6, 0.8}, {1, 2}), 0.5);
  EXPECT_EQ(c, (Confusion{2, 0, 0, 1}));
}

TEST(Confusion, AboveMaxPredictsNothing) {
  const auto c = confusion_at(single_row({0.2, 0.6, 0.8}, {1, 2}), std::nextafter(0.8, 1.0));
  EXPECT_EQ(c.tp, 0u);
  EXPECT_EQ(c.fp, 0u);
}

TEST(Confusion, ClosedLowerBound) {
  const auto c = confusion_at(single_row({0.5}, {0}), 0.5);
  EXPECT_EQ(c.tp, 1u);
}

TEST(Confusion, InvariantToNoteOrder) {
  std::mt19937_64 rng(1);
  const auto p = random_set(rng, true);
  PredictionSet reversed(p.num_classes());
  for (std::size_t n = p.num_notes(); n-- > 0;) {
    reversed.add(p.scores().subspan(n * p.num_classes(), p.num_classes()), p.labels()[n]);
  }
  for (const double t : {0.1, 0.35, 0.5, 0.9}) EXPECT_EQ(confusion_at(p, t), confusion_at(reversed, t));
}

TEST(MicroF1, Examples) {
  EXPECT_NEAR(micro_f1(2, 1, 1), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(micro_f1(0, 4, 3), 0.0);
  EXPECT_EQ(micro_f1(0, 0, 0), 0.0);
  EXPECT_EQ(micro_f1(5, 0, 0), 1.0);
  const auto s = micro_scores(2, 1, 1);
  EXPECT_NEAR(s.precision, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.recall, 2.0 / 3.0, 1e-15);
}

TEST(BestThreshold, TenthsGrid) {
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  const auto choice = best_threshold(single_row({0.2, 0.6, 0.8}, {1, 2}), grid);
  EXPECT_DOUBLE_EQ(choice.threshold, 0.3);
  EXPECT_DOUBLE_EQ(choice.f1, 1.0);
}

TEST(BestThreshold, AllPositiveTakesSmallest) {
  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  const auto choice = best_threshold(single_row({0.2, 0.6, 0.8}, {0, 1, 2}), grid);
  EXPECT_DOUBLE_EQ(choice.threshold, 0.1);
}

TEST(BestThreshold, SinglePointGrid) {
  const std::vector<double> grid{0.42};
  EXPECT_DOUBLE_EQ(best_threshold(single_row({0.2, 0.6}, {1}), grid).threshold, 0.42);
}

TEST(BestThreshold, DefaultGrid) {
  const auto grid = default_threshold_grid();
  ASSERT_EQ(grid.size(), 99u);
  EXPECT_DOUBLE_EQ(grid.front(), 0.01);
  EXPECT_DOUBLE_EQ(grid[49], 0.5);
  EXPECT_DOUBLE_EQ(grid.back(), 0.99);
}

TEST(Auc, PerfectSeparation) {
  const auto p = single_row({0.1, 0.2, 0.7, 0.9}, {2, 3});
  EXPECT_DOUBLE_EQ(*roc_auc(p), 1.0);
  EXPECT_DOUBLE_EQ(*pr_auc(p), 1.0);
}

TEST(Auc, ConstantScoresGiveChance) {
  EXPECT_DOUBLE_EQ(*roc_auc(single_row({0.4, 0.4, 0.4, 0.4}, {0, 2})), 0.5);
}

TEST(Auc, UndefinedWithoutBothClasses) {
  EXPECT_FALSE(roc_auc(single_row({0.1, 0.2}, {})).has_value());
  EXPECT_FALSE(pr_auc(single_row({0.1, 0.2}, {0, 1})).has_value());
}

TEST(Auc, RocInvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_set(rng, trial % 2 == 0);
    if (!roc_auc(p)) continue;
    PredictionSet q(p.num_classes());
    for (std::size_t n = 0; n < p.num_notes(); ++n) {
      std::vector<double> row;
      for (std::size_t c = 0; c < p.num_classes(); ++c) {
        row.push_back(std::pow(p.scores()[n * p.num_classes() + c], 3.0) * 0.5);
      }
      q.add(std::span<const double>(row), p.labels()[n]);
    }
    EXPECT_NEAR(*roc_auc(p), *roc_auc(q), 1e-12);
  }
}

TEST(Report, CountsSumAndF1IsHarmonicMean) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_set(rng, false);
    const auto r = evaluate_at(p, 0.5);
    EXPECT_EQ(r.counts.tp + r.counts.fp + r.counts.fn + r.counts.tn, p.num_notes() * p.num_classes());
    const double pr = r.micro_precision, rc = r.micro_recall;
    EXPECT_NEAR(r.micro_f1, pr + rc > 0 ? 2 * pr * rc / (pr + rc) : 0.0, 1e-12);
  }
}

TEST(Report, KeyValueBlockAndTable) {
  const auto r = evaluate_at(single_row({0.2, 0.6, 0.8}, {1, 2}), 0.5);
  const std::string text = format_report(r);
  EXPECT_NE(text.find("micro_f1=1.000000\n"), std::string::npos) << text;
  EXPECT_NE(text.find("tp=2\n"), std::string::npos);
  const auto missing = evaluate_at(single_row({0.2}, {}), 0.5);
  EXPECT_NE(format_report(missing).find("roc_auc=nan\n"), std::string::npos);
  const ComparisonRow row{"cnn", "2500", r};
  const std::string table = format_comparison_table(std::span(&row, 1));
  EXPECT_NE(table.find("Seq. length"), std::string::npos);
  EXPECT_NE(table.find("PR-AUC"), std::string::npos);
  EXPECT_NE(table.find("2500"), std::string::npos);
}

// --- oracle equivalence on random prediction sets ---------------------------

TEST(OracleEquivalence, RandomPredictionSets) {
  std::mt19937_64 rng(4);
  const auto grid = default_threshold_grid();
  int compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_set(rng, trial % 2 == 0);
    ASSERT_LE(p.num_instances(), 500u);
    const auto expected = grid_oracle(p, grid);
    const auto got = best_threshold(p, grid);
    EXPECT_EQ(got.threshold, expected.threshold);
    EXPECT_EQ(got.f1, expected.f1);
    for (const double t : grid) EXPECT_GE(got.f1, f1_of(count_at(p, t)));
    const auto roc = roc_auc(p);
    const auto pr = pr_auc(p);
    ASSERT_EQ(roc.has_value(), pr.has_value());
    if (!roc) continue;
    ++compared;
    EXPECT_NEAR(*roc, roc_oracle(p), 1e-9);
    EXPECT_NEAR(*pr, pr_oracle(p), 1e-9);
  }
  EXPECT_GT(compared, 150);
}

}  // namespace
}  // namespace longcode
