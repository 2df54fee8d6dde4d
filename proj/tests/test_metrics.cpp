#include <gtest/gtest.h>

#include "mmrnn/metrics.hpp"
#include "mmrnn/random.hpp"
#include "support/oracles.hpp"

namespace mmrnn {
namespace {

ConfusionMatrix from_pairs(const std::vector<int>& truth, const std::vector<int>& pred, int classes) {
  ConfusionMatrix cm(classes);
  for (std::size_t k = 0; k < truth.size(); ++k) cm.add(truth[k], pred[k]);
  return cm;
}

TEST(ConfusionMatrix, AccumulateToyAndInvalidCells) {
  const PatchGrid truth(1, 5, 1, 2, std::vector<double>(5, 0.0), {0, 0, 1, 1, kUnlabeled});
  ConfusionMatrix cm(2);
  cm.accumulate({1, 5, {0, 1, 1, 1, 0}}, truth);
  EXPECT_EQ(cm.count(0, 0), 1u);
  EXPECT_EQ(cm.count(0, 1), 1u);
  EXPECT_EQ(cm.count(1, 0), 0u);
  EXPECT_EQ(cm.count(1, 1), 2u);
  EXPECT_EQ(cm.total(), 4u);

  ConfusionMatrix empty(2);
  empty.accumulate({1, 2, {0, 1}}, PatchGrid(1, 2, 1, 2));
  EXPECT_EQ(empty.total(), 0u);
}

TEST(ConfusionMatrix, OutOfRangeIsAnError) {
  ConfusionMatrix cm(3);
  EXPECT_THROW(cm.add(3, 0), std::out_of_range);
  EXPECT_THROW(cm.add(0, -1), std::out_of_range);
}

TEST(Summarize, Examples) {
  const MetricSummary diag = summarize(from_pairs({0, 1, 2, 2}, {0, 1, 2, 2}, 3));
  EXPECT_EQ(diag.pixel_acc, 1.0);
  EXPECT_EQ(diag.class_acc, 1.0);
  EXPECT_EQ(diag.mean_iou, 1.0);

  const MetricSummary toy = summarize(from_pairs({0, 0, 1, 1}, {0, 1, 1, 1}, 2));
  EXPECT_DOUBLE_EQ(toy.pixel_acc, 0.75);
  EXPECT_DOUBLE_EQ(toy.class_acc, 0.75);
  EXPECT_NEAR(toy.mean_iou, (0.5 + 2.0 / 3.0) / 2.0, 1e-15);
}

TEST(Summarize, AbsentClassesExcluded) {
  const MetricSummary s = summarize(from_pairs({0, 0, 1}, {0, 0, 1}, 4));
  EXPECT_EQ(s.mean_iou, 1.0);
  EXPECT_EQ(s.class_acc, 1.0);
  EXPECT_FALSE(s.per_class_iou[2].has_value());
  EXPECT_FALSE(s.per_class_iou[3].has_value());
  EXPECT_THROW(summarize(ConfusionMatrix(3)), std::invalid_argument);
}

TEST(Summarize, AgreesWithBruteForce) {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const int classes = 2 + static_cast<int>(rng.below(6));
    std::vector<int> truth, pred;
    for (int n = 0; n < 1 + static_cast<int>(rng.below(200)); ++n) {
      truth.push_back(static_cast<int>(rng.below(classes)));
      pred.push_back(rng.uniform() < 0.6 ? truth.back() : static_cast<int>(rng.below(classes)));
    }
    const MetricSummary a = summarize(from_pairs(truth, pred, classes));
    const MetricSummary b = oracle::brute_force_metrics(truth, pred, classes);
    EXPECT_EQ(a.pixel_acc, b.pixel_acc);
    EXPECT_EQ(a.class_acc, b.class_acc);
    EXPECT_EQ(a.mean_iou, b.mean_iou);
    EXPECT_EQ(a.per_class_iou, b.per_class_iou);
  }
}

TEST(Summarize, IouBoundedByRecallAndPrecision) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int classes = 4;
    std::vector<int> truth, pred;
    for (int n = 0; n < 100; ++n) {
      truth.push_back(static_cast<int>(rng.below(classes)));
      pred.push_back(static_cast<int>(rng.below(classes)));
    }
    const ConfusionMatrix cm = from_pairs(truth, pred, classes);
    const MetricSummary s = summarize(cm);
    for (int k = 0; k < classes; ++k) {
      if (!s.per_class_iou[k]) continue;
      std::uint64_t row = 0, col = 0;
      for (int l = 0; l < classes; ++l) {
        row += cm.count(k, l);
        col += cm.count(l, k);
      }
      if (row > 0) {
        EXPECT_LE(*s.per_class_iou[k], static_cast<double>(cm.count(k, k)) / row);
      }
      if (col > 0) {
        EXPECT_LE(*s.per_class_iou[k], static_cast<double>(cm.count(k, k)) / col);
      }
    }
  }
}

TEST(Summarize, PermutationEquivariant) {
  Rng rng(6);
  std::vector<int> truth, pred;
  for (int n = 0; n < 300; ++n) {
    truth.push_back(static_cast<int>(rng.below(5)));
    pred.push_back(rng.uniform() < 0.5 ? truth.back() : static_cast<int>(rng.below(5)));
  }
  const int perm[5] = {3, 0, 4, 1, 2};
  std::vector<int> pt, pp;
  for (std::size_t n = 0; n < truth.size(); ++n) {
    pt.push_back(perm[truth[n]]);
    pp.push_back(perm[pred[n]]);
  }
  const MetricSummary a = summarize(from_pairs(truth, pred, 5));
  const MetricSummary b = summarize(from_pairs(pt, pp, 5));
  EXPECT_EQ(a.pixel_acc, b.pixel_acc);
  EXPECT_NEAR(a.class_acc, b.class_acc, 1e-15);
  EXPECT_NEAR(a.mean_iou, b.mean_iou, 1e-15);
  for (int k = 0; k < 5; ++k) EXPECT_EQ(a.per_class_iou[k], b.per_class_iou[perm[k]]);
}

TEST(ConfusionMatrix, MergeIsAddition) {
  ConfusionMatrix a = from_pairs({0, 1}, {1, 1}, 2);
  a.merge(from_pairs({0}, {0}, 2));
  EXPECT_EQ(a, from_pairs({0, 1, 0}, {1, 1, 0}, 2));
  EXPECT_THROW(a.merge(ConfusionMatrix(3)), std::invalid_argument);
}

}  // namespace
}  // namespace mmrnn
