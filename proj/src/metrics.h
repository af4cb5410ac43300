#pragma once

#include <cstddef>
#include <span>

namespace relevancy {

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const Confusion&) const = default;
};

struct AccuracyResult {
  double accuracy = 0.0;
  Confusion confusion;
};

// A score >= threshold counts as a positive prediction.
AccuracyResult accuracy(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

// Rank statistic with half credit for ties. Needs both classes present.
double auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace relevancy
