#include <algorithm>
#include <cmath>
#include <numeric>

#include "common.h"
#include "gbdt.h"
#include "parallel.h"

namespace relevancy::gbdt {

void GbdtConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw InvalidArgument("gbdt config: " + msg); };
  if (n_trees < 0) fail("n_trees must be >= 0");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (num_leaves < 2) fail("num_leaves must be >= 2");
  if (min_data_in_leaf < 1) fail("min_data_in_leaf must be >= 1");
  if (max_bins < 2 || max_bins > 255) fail("max_bins must lie in [2, 255]");
  if (!(goss_top_rate >= 0.0 && goss_top_rate <= 1.0)) fail("goss_top_rate must lie in [0, 1]");
  if (!(goss_other_rate >= 0.0 && goss_other_rate <= 1.0)) fail("goss_other_rate must lie in [0, 1]");
  if (goss_top_rate + goss_other_rate > 1.0 + 1e-12) fail("goss_top_rate + goss_other_rate must be <= 1");
  if (goss_enabled && goss_top_rate + goss_other_rate <= 0.0) fail("GOSS would sample no rows");
  if (!(efb_max_conflict_rate >= 0.0)) fail("efb_max_conflict_rate must be >= 0");
  if (!(lambda_l2 >= 0.0)) fail("lambda_l2 must be >= 0");
  if (!(min_sum_hessian_in_leaf >= 0.0)) fail("min_sum_hessian_in_leaf must be >= 0");
}

BinMapper::BinMapper(std::vector<double> upper_bounds) : upper_bounds_(std::move(upper_bounds)) {
  for (std::size_t i = 1; i < upper_bounds_.size(); ++i) {
    if (!(upper_bounds_[i] > upper_bounds_[i - 1])) throw InvalidArgument("bin bounds must be strictly increasing");
  }
  default_bin_ = bin_of(0.0);
}

std::uint32_t BinMapper::bin_of(double value) const {
  if (std::isnan(value)) return default_bin_;
  const auto it = std::lower_bound(upper_bounds_.begin(), upper_bounds_.end(), value);
  return static_cast<std::uint32_t>(it - upper_bounds_.begin());
}

namespace {

struct ValueCount {
  double value;
  std::size_t count;
};

// Greedy equal-frequency grouping of sorted distinct values into at most
// `max_groups` runs; returns the index one past the end of each run.
std::vector<std::size_t> quantile_groups(std::span<const ValueCount> distinct, std::size_t max_groups) {
  std::vector<std::size_t> ends;
  if (distinct.empty()) return ends;
  if (distinct.size() <= max_groups) {
    for (std::size_t i = 0; i < distinct.size(); ++i) ends.push_back(i + 1);
    return ends;
  }
  std::size_t total = 0;
  for (const auto& d : distinct) total += d.count;
  std::size_t cum = 0;
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    cum += distinct[i].count;
    const bool last = i + 1 == distinct.size();
    if (last) {
      ends.push_back(i + 1);
      break;
    }
    // Cut once this run reaches its share of the total.
    const double target = static_cast<double>(total) * static_cast<double>(ends.size() + 1) /
                          static_cast<double>(max_groups);
    if (ends.size() + 1 < max_groups && static_cast<double>(cum) >= target) ends.push_back(i + 1);
  }
  return ends;
}

double midpoint(double a, double b) {
  const double m = a + (b - a) / 2.0;
  return (m >= b || m < a) ? a : m;
}

void append_bounds(std::span<const ValueCount> distinct, std::size_t max_groups, std::vector<double>& bounds) {
  const auto ends = quantile_groups(distinct, max_groups);
  for (std::size_t g = 0; g + 1 < ends.size(); ++g) {
    bounds.push_back(midpoint(distinct[ends[g] - 1].value, distinct[ends[g]].value));
  }
}

}  // namespace

BinMapper BinMapper::fit(std::span<const double> values, int max_bins) {
  if (max_bins < 2) throw InvalidArgument("max_bins must be >= 2");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<ValueCount> distinct;
  for (double v : sorted) {
    if (!distinct.empty() && distinct.back().value == v) ++distinct.back().count;
    else distinct.push_back({v == 0.0 ? 0.0 : v, 1});
  }
  std::vector<double> bounds;
  const auto budget = static_cast<std::size_t>(max_bins);
  if (distinct.size() <= budget) {
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i) bounds.push_back(midpoint(distinct[i].value, distinct[i + 1].value));
    return BinMapper(std::move(bounds));
  }

  const auto zero_it = std::find_if(distinct.begin(), distinct.end(), [](const ValueCount& d) { return d.value == 0.0; });
  if (zero_it == distinct.end()) {
    append_bounds(distinct, budget, bounds);
    return BinMapper(std::move(bounds));
  }

  // Zero gets a bin of its own; negative and positive values share the rest in
  // proportion to their counts.
  const std::span<const ValueCount> all(distinct);
  const auto zero_pos = static_cast<std::size_t>(zero_it - distinct.begin());
  const auto neg = all.subspan(0, zero_pos);
  const auto pos = all.subspan(zero_pos + 1);
  std::size_t neg_count = 0, pos_count = 0;
  for (const auto& d : neg) neg_count += d.count;
  for (const auto& d : pos) pos_count += d.count;
  const std::size_t rest = budget - 1;
  std::size_t neg_bins = 0;
  if (!neg.empty()) {
    neg_bins = static_cast<std::size_t>(std::llround(static_cast<double>(rest) * static_cast<double>(neg_count) /
                                                     static_cast<double>(neg_count + pos_count)));
    neg_bins = std::clamp<std::size_t>(neg_bins, 1, pos.empty() ? rest : rest - 1);
  }
  const std::size_t pos_bins = pos.empty() ? 0 : rest - neg_bins;

  append_bounds(neg, neg_bins, bounds);
  if (!neg.empty()) bounds.push_back(midpoint(neg.back().value, 0.0));
  if (!pos.empty()) bounds.push_back(midpoint(0.0, pos.front().value));
  append_bounds(pos, pos_bins, bounds);
  return BinMapper(std::move(bounds));
}

BinnedMatrix bin_features(const DenseMatrix& x, int max_bins) {
  BinnedMatrix out;
  out.rows = x.rows;
  out.cols = x.cols;
  out.mappers.resize(x.cols);
  out.bins.resize(x.rows * x.cols);
  parallel_for(x.cols, [&](std::size_t begin, std::size_t end) {
    std::vector<double> column(x.rows);
    for (std::size_t j = begin; j < end; ++j) {
      for (std::size_t i = 0; i < x.rows; ++i) column[i] = x(i, j);
      out.mappers[j] = BinMapper::fit(column, max_bins);
      std::uint8_t* dst = out.bins.data() + j * x.rows;
      for (std::size_t i = 0; i < x.rows; ++i) dst[i] = static_cast<std::uint8_t>(out.mappers[j].bin_of(column[i]));
    }
  });
  return out;
}

namespace {

constexpr std::uint32_t kMaxBundleSlots = 65535;

}  // namespace

std::vector<FeatureBundle> singleton_bundles(const BinnedMatrix& binned) {
  std::vector<FeatureBundle> bundles;
  for (std::size_t f = 0; f < binned.cols; ++f) {
    const auto& m = binned.mappers[f];
    if (m.is_trivial()) continue;
    FeatureBundle b;
    b.features.push_back(static_cast<std::uint32_t>(f));
    b.offsets.push_back(1);
    b.num_slots = m.num_bins();
    bundles.push_back(std::move(b));
  }
  return bundles;
}

std::vector<FeatureBundle> efb_bundle(const BinnedMatrix& binned, double max_conflict_rate) {
  const std::size_t n = binned.rows;
  std::vector<std::uint32_t> order;
  std::vector<std::size_t> nonzero(binned.cols, 0);
  for (std::size_t f = 0; f < binned.cols; ++f) {
    if (binned.mappers[f].is_trivial()) continue;
    const auto def = binned.mappers[f].default_bin();
    const auto col = binned.column(f);
    nonzero[f] = static_cast<std::size_t>(std::count_if(col.begin(), col.end(), [def](std::uint8_t b) { return b != def; }));
    order.push_back(static_cast<std::uint32_t>(f));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return nonzero[a] > nonzero[b]; });

  const auto limit = static_cast<std::size_t>(std::floor(max_conflict_rate * static_cast<double>(n) + 1e-9));
  std::vector<FeatureBundle> bundles;
  std::vector<std::vector<std::uint8_t>> occupancy;  // per row: 0, 1 or 2+ nonzero members
  std::vector<std::size_t> conflicts;

  for (std::uint32_t f : order) {
    const auto& mapper = binned.mappers[f];
    const auto def = mapper.default_bin();
    const auto col = binned.column(f);
    const std::uint32_t extra_slots = mapper.num_bins() - 1;

    std::size_t chosen = bundles.size();
    for (std::size_t b = 0; b < bundles.size(); ++b) {
      if (bundles[b].num_slots + extra_slots > kMaxBundleSlots) continue;
      std::size_t added = 0;
      bool fits = true;
      for (std::size_t r = 0; r < n; ++r) {
        if (col[r] != def && occupancy[b][r] == 1) {
          if (conflicts[b] + ++added > limit) {
            fits = false;
            break;
          }
        }
      }
      if (fits) {
        chosen = b;
        conflicts[b] += added;
        break;
      }
    }
    if (chosen == bundles.size()) {
      bundles.emplace_back();
      occupancy.emplace_back(n, 0);
      conflicts.push_back(0);
    }
    auto& bundle = bundles[chosen];
    bundle.features.push_back(f);
    bundle.offsets.push_back(bundle.num_slots);
    bundle.num_slots += extra_slots;
    auto& occ = occupancy[chosen];
    for (std::size_t r = 0; r < n; ++r) {
      if (col[r] != def && occ[r] < 2) ++occ[r];
    }
  }
  return bundles;
}

std::size_t ceil_fraction(double rate, std::size_t n) {
  const double exact = rate * static_cast<double>(n);
  const auto c = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
  return std::min(c, n);
}

GossSample goss_sample(std::span<const double> gradients, double top_rate, double other_rate, std::uint64_t seed) {
  if (top_rate < 0.0 || other_rate < 0.0 || top_rate + other_rate > 1.0 + 1e-12) {
    throw InvalidArgument("goss_sample: rates must be >= 0 with top + other <= 1");
  }
  const std::size_t n = gradients.size();
  const std::size_t top = ceil_fraction(top_rate, n);
  const std::size_t other = std::min(ceil_fraction(other_rate, n), n - top);

  GossSample out;
  if (top == n) {
    out.rows.resize(n);
    std::iota(out.rows.begin(), out.rows.end(), 0u);
    out.weights.assign(n, 1.0);
    return out;
  }

  // Largest |g| first; ties resolved by row index so the kept set is unique.
  struct Key {
    double magnitude;
    std::uint32_t row;
  };
  std::vector<Key> keys(n);
  for (std::uint32_t r = 0; r < n; ++r) keys[r] = {std::abs(gradients[r]), r};
  const auto by_magnitude = [](const Key& a, const Key& b) {
    return a.magnitude > b.magnitude || (a.magnitude == b.magnitude && a.row < b.row);
  };
  if (top > 0) {
    std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(top - 1), keys.end(), by_magnitude);
  }

  std::vector<std::uint8_t> keep(n, 0);
  for (std::size_t i = 0; i < top; ++i) keep[keys[i].row] = 1;

  std::vector<std::uint32_t> rest;
  rest.reserve(n - top);
  for (std::uint32_t r = 0; r < n; ++r) {
    if (!keep[r]) rest.push_back(r);
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < other; ++i) {
    const std::size_t j = i + rng.uniform_index(rest.size() - i);
    std::swap(rest[i], rest[j]);
    keep[rest[i]] = 2;
  }

  const double amplify = other > 0 ? (1.0 - top_rate) / other_rate : 1.0;
  out.rows.reserve(top + other);
  out.weights.reserve(top + other);
  for (std::uint32_t r = 0; r < n; ++r) {
    if (keep[r] == 1) {
      out.rows.push_back(r);
      out.weights.push_back(1.0);
    } else if (keep[r] == 2) {
      out.rows.push_back(r);
      out.weights.push_back(amplify);
    }
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

GradPair logistic_gradient(double score, int label) {
  const double p = sigmoid(score);
  return {p - static_cast<double>(label), p * (1.0 - p)};
}

double logistic_loss(double score, int label) {
  // log(1 + exp(-s)) for y = 1, log(1 + exp(s)) for y = 0, computed stably.
  const double z = label ? -score : score;
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace relevancy::gbdt
