#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "matrix.h"

namespace relevancy::gbdt {

struct GbdtConfig {
  int n_trees = 200;
  double learning_rate = 0.1;
  int num_leaves = 31;
  int min_data_in_leaf = 20;
  int max_bins = 255;
  // Gradient-based one-side sampling. When disabled every row is used with
  // unit weight and no sampling code runs.
  bool goss_enabled = true;
  double goss_top_rate = 0.2;
  double goss_other_rate = 0.1;
  bool efb_enabled = true;
  double efb_max_conflict_rate = 0.0;
  double lambda_l2 = 1.0;
  double min_sum_hessian_in_leaf = 1e-3;
  std::uint64_t seed = 0;

  // Throws InvalidArgument naming the first violated bound.
  void validate() const;
  bool operator==(const GbdtConfig&) const = default;
};

// Quantile bin boundaries for one feature. A value maps to the first bin whose
// upper bound is >= the value; the last bin is unbounded.
class BinMapper {
 public:
  BinMapper() = default;
  explicit BinMapper(std::vector<double> upper_bounds);

  static BinMapper fit(std::span<const double> values, int max_bins);

  std::uint32_t num_bins() const { return static_cast<std::uint32_t>(upper_bounds_.size() + 1); }
  std::uint32_t bin_of(double value) const;
  // Bin holding 0.0; rows in this bin count as "zero" for bundling.
  std::uint32_t default_bin() const { return default_bin_; }
  bool is_trivial() const { return upper_bounds_.empty(); }
  const std::vector<double>& upper_bounds() const { return upper_bounds_; }

  bool operator==(const BinMapper&) const = default;

 private:
  std::vector<double> upper_bounds_;
  std::uint32_t default_bin_ = 0;
};

// Column-major bin indices for a training matrix.
struct BinnedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<BinMapper> mappers;
  std::vector<std::uint8_t> bins;

  std::uint8_t bin(std::size_t row, std::size_t col) const { return bins[col * rows + row]; }
  std::span<const std::uint8_t> column(std::size_t col) const {
    return std::span<const std::uint8_t>(bins).subspan(col * rows, rows);
  }
};

BinnedMatrix bin_features(const DenseMatrix& x, int max_bins);

// Features sharing one histogram. Slot 0 means "every member at its default
// bin"; member i stores its non-default bins in
// [offsets[i], offsets[i] + num_bins_i - 1).
struct FeatureBundle {
  std::vector<std::uint32_t> features;
  std::vector<std::uint32_t> offsets;
  std::uint32_t num_slots = 1;

  bool operator==(const FeatureBundle&) const = default;
};

// Greedy bundling: features in descending nonzero-count order join the first
// bundle whose conflict rows stay within max_conflict_rate * rows, else open a
// new bundle. Constant features are left out.
std::vector<FeatureBundle> efb_bundle(const BinnedMatrix& binned, double max_conflict_rate);
// One bundle per non-constant feature (bundling disabled).
std::vector<FeatureBundle> singleton_bundles(const BinnedMatrix& binned);

struct GossSample {
  std::vector<std::uint32_t> rows;  // ascending
  std::vector<double> weights;      // aligned with rows
};

// ceil(rate * n) with a guard against representation error in rate * n.
std::size_t ceil_fraction(double rate, std::size_t n);

// Keeps the ceil(a*n) largest |g| rows at weight 1 and a seeded uniform draw of
// ceil(b*n) of the rest at weight (1-a)/b.
GossSample goss_sample(std::span<const double> gradients, double top_rate, double other_rate, std::uint64_t seed);

// Logistic loss derivatives with respect to the raw score.
struct GradPair {
  double grad;
  double hess;
};
GradPair logistic_gradient(double score, int label);
double logistic_loss(double score, int label);
double sigmoid(double x);

struct Tree {
  // Internal nodes. Children >= 0 are nodes; negative children are ~leaf.
  std::vector<std::uint32_t> split_feature;
  std::vector<std::uint32_t> threshold_bin;
  std::vector<double> threshold_value;
  std::vector<double> split_gain;
  std::vector<int> left_child;
  std::vector<int> right_child;
  std::vector<double> leaf_value;
  std::vector<std::uint32_t> leaf_count;

  std::size_t num_leaves() const { return leaf_value.size(); }
  std::size_t num_nodes() const { return split_feature.size(); }
  bool operator==(const Tree&) const = default;
};

struct GbdtModel {
  GbdtConfig config;
  std::size_t num_features = 0;
  double init_score = 0.0;
  std::vector<BinMapper> mappers;
  std::vector<FeatureBundle> bundles;
  std::vector<Tree> trees;

  double predict_raw(std::span<const double> x) const;
  // Probability strictly inside (0, 1).
  double predict(std::span<const double> x) const;
  std::size_t leaf_index(const Tree& tree, std::span<const double> x) const;

  bool operator==(const GbdtModel&) const = default;
};

struct TrainStats {
  bool record_loss = false;
  std::vector<double> train_loss;         // full-data logistic loss after each tree
  std::vector<double> iteration_seconds;
  std::vector<std::size_t> sampled_rows;  // rows used per iteration
  std::size_t histogram_passes = 0;
  std::size_t max_rows_per_histogram_pass = 0;
};

GbdtModel train(const GbdtConfig& config, const DenseMatrix& x, std::span<const int> labels,
                TrainStats* stats = nullptr);

std::string serialize_model(const GbdtModel& model);
GbdtModel parse_model(std::string_view text);

}  // namespace relevancy::gbdt
