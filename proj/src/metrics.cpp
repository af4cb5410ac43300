#include "metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "common.h"

namespace relevancy {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels, const char* what) {
  if (scores.empty()) throw InvalidArgument(std::string(what) + ": empty input");
  if (scores.size() != labels.size()) throw InvalidArgument(std::string(what) + ": scores and labels differ in length");
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidArgument(std::string(what) + ": labels must be 0 or 1");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw InvalidArgument(std::string(what) + ": NaN score");
  }
}

}  // namespace

AccuracyResult accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_inputs(scores, labels, "accuracy");
  AccuracyResult r;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      ++(predicted ? r.confusion.tp : r.confusion.fn);
    } else {
      ++(predicted ? r.confusion.fp : r.confusion.tn);
    }
  }
  r.accuracy = static_cast<double>(r.confusion.tp + r.confusion.tn) / static_cast<double>(scores.size());
  return r;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels, "auc");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of positive ranks, ties sharing their average rank. Ranks are kept
  // doubled so every quantity stays an exact integer.
  std::uint64_t pos = 0;
  std::uint64_t rank_sum2 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::uint64_t group_pos = 0;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      group_pos += static_cast<std::uint64_t>(labels[order[j]]);
      ++j;
    }
    // Ranks i+1..j average to (i+1+j)/2.
    rank_sum2 += group_pos * static_cast<std::uint64_t>(i + 1 + j);
    pos += group_pos;
    i = j;
  }
  const std::uint64_t neg = n - pos;
  if (pos == 0 || neg == 0) throw InvalidArgument("auc: labels contain a single class");
  // U = rank_sum - pos(pos+1)/2; doubled: rank_sum2 - pos(pos+1).
  const std::uint64_t u2 = rank_sum2 - pos * (pos + 1);
  return static_cast<double>(u2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

}  // namespace relevancy
