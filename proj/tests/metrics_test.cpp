#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "common.h"
#include "metrics.h"
#include "oracles.h"
#include "test_support.h"

using namespace relevancy;
using testing_support::Gen;

namespace {

struct Scored {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Both classes present; scores drawn from a small grid so ties are common.
Scored random_scored(Gen& gen, bool coarse) {
  Scored s;
  const std::size_t n = 2 + gen.index(120);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i == 0 ? 1 : i == 1 ? 0 : (gen.chance(0.4) ? 1 : 0);
    double v = gen.range(0, 1) + 0.3 * y;
    if (coarse) v = std::round(v * 5) / 5;
    s.scores.push_back(v);
    s.labels.push_back(y);
  }
  return s;
}

}  // namespace

TEST(Auc, HandCases) {
  EXPECT_EQ(auc(std::vector<double>{0.1, 0.9}, std::vector<int>{0, 1}), 1.0);
  EXPECT_EQ(auc(std::vector<double>{0.9, 0.1}, std::vector<int>{0, 1}), 0.0);
  EXPECT_EQ(auc(std::vector<double>{0.5, 0.5}, std::vector<int>{0, 1}), 0.5);
  // Pairs (pos, neg): (0.8, 0.3) win, (0.8, 0.8) tie, (0.4, 0.3) win, (0.4, 0.8) loss.
  EXPECT_EQ(auc(std::vector<double>{0.8, 0.4, 0.3, 0.8}, std::vector<int>{1, 1, 0, 0}), 2.5 / 4.0);
}

TEST(Auc, MatchesPairCountingOracle) {
  Gen gen(1);
  for (int t = 0; t < 200; ++t) {
    const auto s = random_scored(gen, t % 2 == 0);
    EXPECT_NEAR(auc(s.scores, s.labels), oracle::auc_pairs(s.scores, s.labels), 1e-12) << t;
  }
}

TEST(Auc, InvariantUnderIncreasingTransform) {
  Gen gen(2);
  for (int t = 0; t < 50; ++t) {
    const auto s = random_scored(gen, t % 3 == 0);
    std::vector<double> warped;
    for (double v : s.scores) warped.push_back(std::exp(3 * v) - 7);
    EXPECT_NEAR(auc(warped, s.labels), auc(s.scores, s.labels), 1e-12);
  }
}

TEST(Auc, NegatedScoresComplement) {
  Gen gen(3);
  for (int t = 0; t < 50; ++t) {
    const auto s = random_scored(gen, t % 2 == 1);
    std::vector<double> neg;
    for (double v : s.scores) neg.push_back(-v);
    EXPECT_NEAR(auc(s.scores, s.labels) + auc(neg, s.labels), 1.0, 1e-12);
  }
}

TEST(Auc, Errors) {
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), InvalidArgument);
  EXPECT_THROW(auc(std::vector<double>{0.1}, std::vector<int>{1, 0}), InvalidArgument);
  EXPECT_THROW(auc(std::vector<double>{0.1, std::nan("")}, std::vector<int>{1, 0}), InvalidArgument);
  EXPECT_THROW(auc(std::vector<double>{}, std::vector<int>{}), InvalidArgument);
}

TEST(Accuracy, ThresholdIsInclusive) {
  const auto r = accuracy(std::vector<double>{0.5, 0.49, 0.9, 0.1}, std::vector<int>{1, 1, 0, 0});
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_EQ(r.confusion, (Confusion{1, 1, 1, 1}));
  const auto strict = accuracy(std::vector<double>{0.5}, std::vector<int>{0}, 0.6);
  EXPECT_EQ(strict.confusion.tn, 1u);
}

TEST(Accuracy, MatchesCountingOracle) {
  Gen gen(4);
  for (int t = 0; t < 100; ++t) {
    const auto s = random_scored(gen, t % 2 == 0);
    const double threshold = gen.range(0.2, 1.0);
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
      const bool pred = !(s.scores[i] < threshold);
      if (pred && s.labels[i] == 1) ++tp;
      if (pred && s.labels[i] == 0) ++fp;
      if (!pred && s.labels[i] == 0) ++tn;
      if (!pred && s.labels[i] == 1) ++fn;
    }
    const auto r = accuracy(s.scores, s.labels, threshold);
    EXPECT_EQ(r.confusion, (Confusion{tp, fp, tn, fn}));
    EXPECT_EQ(r.confusion.total(), s.scores.size());
    EXPECT_DOUBLE_EQ(r.accuracy, static_cast<double>(tp + tn) / static_cast<double>(s.scores.size()));
  }
}

TEST(Accuracy, Errors) {
  EXPECT_THROW(accuracy(std::vector<double>{0.1}, std::vector<int>{1, 0}), InvalidArgument);
  EXPECT_THROW(accuracy(std::vector<double>{}, std::vector<int>{}), InvalidArgument);
  EXPECT_THROW(accuracy(std::vector<double>{0.1}, std::vector<int>{3}), InvalidArgument);
}
