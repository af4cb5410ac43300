#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "common.h"
#include "gbdt.h"
#include "parallel.h"

namespace relevancy::gbdt {

namespace {

struct HistEntry {
  double g = 0.0;
  double h = 0.0;
  std::uint32_t n = 0;
};

struct Split {
  bool valid = false;
  double gain = 0.0;
  std::uint32_t feature = 0;
  std::uint32_t threshold = 0;
};

struct Leaf {
  std::vector<std::uint32_t> rows;
  std::vector<HistEntry> hist;
  double sum_g = 0.0;
  double sum_h = 0.0;
  Split best;
  int parent = -1;
  bool is_left = true;
};

// Where a feature's non-default bins live inside the bundled histograms.
struct FeatureSlot {
  std::uint32_t group = 0;
  std::uint32_t offset = 0;
  std::uint32_t num_bins = 0;
  std::uint32_t default_bin = 0;
};

class Trainer {
 public:
  Trainer(const GbdtConfig& config, const DenseMatrix& x, std::span<const int> labels, TrainStats* stats)
      : config_(config), labels_(labels), stats_(stats) {
    binned_ = bin_features(x, config.max_bins);
    bundles_ = config.efb_enabled ? efb_bundle(binned_, config.efb_max_conflict_rate) : singleton_bundles(binned_);
    build_groups();
  }

  GbdtModel run() {
    const std::size_t n = binned_.rows;
    GbdtModel model;
    model.config = config_;
    model.num_features = binned_.cols;
    model.mappers = binned_.mappers;
    model.bundles = bundles_;

    double positives = 0.0;
    for (int y : labels_) positives += y;
    const double base = positives / static_cast<double>(n);
    model.init_score = std::log(base / (1.0 - base));

    scores_.assign(n, model.init_score);
    grad_.assign(n, 0.0);
    hess_.assign(n, 0.0);
    wgrad_.assign(n, 0.0);
    whess_.assign(n, 0.0);

    for (int iter = 0; iter < config_.n_trees; ++iter) {
      const auto start = std::chrono::steady_clock::now();
      compute_gradients();
      std::vector<std::uint32_t> sample = select_rows(static_cast<std::uint64_t>(iter));
      if (stats_ != nullptr) stats_->sampled_rows.push_back(sample.size());
      Tree tree = grow_tree(std::move(sample));
      apply_tree(model, tree);
      model.trees.push_back(std::move(tree));
      if (stats_ != nullptr) {
        stats_->iteration_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        if (stats_->record_loss) {
          double loss = 0.0;
          for (std::size_t i = 0; i < n; ++i) loss += logistic_loss(scores_[i], labels_[i]);
          stats_->train_loss.push_back(loss / static_cast<double>(n));
        }
      }
    }
    return model;
  }

 private:
  void build_groups() {
    const std::size_t n = binned_.rows;
    num_groups_ = bundles_.size();
    slots_.assign(binned_.cols, FeatureSlot{});
    in_group_.assign(binned_.cols, false);
    hist_offset_.resize(num_groups_);
    // Row-major so a sampled row touches only its own bins.
    row_bins_.assign(n * num_groups_, 0);
    total_slots_ = 0;
    for (std::size_t g = 0; g < num_groups_; ++g) {
      const auto& bundle = bundles_[g];
      hist_offset_[g] = total_slots_;
      total_slots_ += bundle.num_slots;
      for (std::size_t m = 0; m < bundle.features.size(); ++m) {
        const std::uint32_t f = bundle.features[m];
        const auto& mapper = binned_.mappers[f];
        FeatureSlot s{static_cast<std::uint32_t>(g), bundle.offsets[m], mapper.num_bins(), mapper.default_bin()};
        slots_[f] = s;
        in_group_[f] = true;
        const auto col = binned_.column(f);
        // A later member overwrites an earlier one on conflicting rows.
        for (std::size_t r = 0; r < n; ++r) {
          const std::uint32_t b = col[r];
          if (b == s.default_bin) continue;
          row_bins_[r * num_groups_ + g] = static_cast<std::uint16_t>(s.offset + (b < s.default_bin ? b : b - 1));
        }
      }
    }
    for (std::size_t f = 0; f < binned_.cols; ++f) {
      if (in_group_[f]) active_features_.push_back(static_cast<std::uint32_t>(f));
    }
  }

  std::uint32_t feature_bin(std::uint32_t feature, std::uint32_t row) const {
    const auto& s = slots_[feature];
    const std::uint32_t slot = row_bins_[static_cast<std::size_t>(row) * num_groups_ + s.group];
    if (slot < s.offset || slot >= s.offset + s.num_bins - 1) return s.default_bin;
    const std::uint32_t local = slot - s.offset;
    return local < s.default_bin ? local : local + 1;
  }

  void compute_gradients() {
    parallel_for(
        scores_.size(),
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t i = begin; i < end; ++i) {
            const auto gp = logistic_gradient(scores_[i], labels_[i]);
            grad_[i] = gp.grad;
            hess_[i] = gp.hess;
          }
        },
        4096);
  }

  std::vector<std::uint32_t> select_rows(std::uint64_t iter) {
    if (!config_.goss_enabled) {
      std::vector<std::uint32_t> rows(scores_.size());
      std::iota(rows.begin(), rows.end(), 0u);
      wgrad_ = grad_;
      whess_ = hess_;
      return rows;
    }
    GossSample s = goss_sample(grad_, config_.goss_top_rate, config_.goss_other_rate, mix_seed(config_.seed, iter));
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
      const std::uint32_t r = s.rows[i];
      wgrad_[r] = grad_[r] * s.weights[i];
      whess_[r] = hess_[r] * s.weights[i];
    }
    return std::move(s.rows);
  }

  void build_histogram(Leaf& leaf) {
    leaf.hist.assign(total_slots_, HistEntry{});
    const auto& rows = leaf.rows;
    if (stats_ != nullptr) {
      ++stats_->histogram_passes;
      stats_->max_rows_per_histogram_pass = std::max(stats_->max_rows_per_histogram_pass, rows.size());
    }
    std::vector<double> g(rows.size()), h(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      g[i] = wgrad_[rows[i]];
      h[i] = whess_[rows[i]];
    }
    // Workers own disjoint group ranges and every entry accumulates in row
    // order, so sums do not depend on the worker count.
    const std::size_t stride = num_groups_;
    parallel_for(num_groups_, [&](std::size_t begin, std::size_t end) {
      HistEntry* hist = leaf.hist.data();
      const std::size_t* offsets = hist_offset_.data();
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::uint16_t* bins = row_bins_.data() + static_cast<std::size_t>(rows[i]) * stride;
        const double gi = g[i];
        const double hi = h[i];
        for (std::size_t grp = begin; grp < end; ++grp) {
          HistEntry& e = hist[offsets[grp] + bins[grp]];
          e.g += gi;
          e.h += hi;
          ++e.n;
        }
      }
    });
  }

  void sum_leaf(Leaf& leaf) const {
    double sg = 0.0, sh = 0.0;
    for (auto r : leaf.rows) {
      sg += wgrad_[r];
      sh += whess_[r];
    }
    leaf.sum_g = sg;
    leaf.sum_h = sh;
  }

  double leaf_objective(double g, double h) const { return g * g / (h + config_.lambda_l2); }

  Split best_split_for_feature(const Leaf& leaf, std::uint32_t f, std::vector<HistEntry>& bins) const {
    const auto& s = slots_[f];
    const HistEntry* hist = leaf.hist.data() + hist_offset_[s.group];
    bins.assign(s.num_bins, HistEntry{});
    double other_g = 0.0, other_h = 0.0;
    std::uint32_t other_n = 0;
    for (std::uint32_t b = 0; b < s.num_bins; ++b) {
      if (b == s.default_bin) continue;
      const HistEntry& e = hist[s.offset + (b < s.default_bin ? b : b - 1)];
      bins[b] = e;
      other_g += e.g;
      other_h += e.h;
      other_n += e.n;
    }
    const auto total_n = static_cast<std::uint32_t>(leaf.rows.size());
    bins[s.default_bin] = {leaf.sum_g - other_g, leaf.sum_h - other_h, total_n - other_n};

    const double parent = leaf_objective(leaf.sum_g, leaf.sum_h);
    const auto min_data = static_cast<std::uint32_t>(config_.min_data_in_leaf);
    Split best;
    double lg = 0.0, lh = 0.0;
    std::uint32_t ln = 0;
    for (std::uint32_t t = 0; t + 1 < s.num_bins; ++t) {
      lg += bins[t].g;
      lh += bins[t].h;
      ln += bins[t].n;
      const std::uint32_t rn = total_n - ln;
      if (ln < min_data) continue;
      if (rn < min_data) break;
      const double rg = leaf.sum_g - lg;
      const double rh = leaf.sum_h - lh;
      if (lh < config_.min_sum_hessian_in_leaf || rh < config_.min_sum_hessian_in_leaf) continue;
      const double gain = leaf_objective(lg, lh) + leaf_objective(rg, rh) - parent;
      if (gain > 0.0 && (!best.valid || gain > best.gain)) {
        best = {true, gain, f, t};
      }
    }
    return best;
  }

  void find_best_split(Leaf& leaf) {
    leaf.best = Split{};
    if (leaf.rows.size() < 2 * static_cast<std::size_t>(config_.min_data_in_leaf)) return;
    std::vector<Split> per_feature(active_features_.size());
    parallel_for(active_features_.size(), [&](std::size_t begin, std::size_t end) {
      std::vector<HistEntry> scratch;
      for (std::size_t i = begin; i < end; ++i) {
        per_feature[i] = best_split_for_feature(leaf, active_features_[i], scratch);
      }
    });
    // Ascending feature order with strict comparison: ties go to the lowest
    // feature, then the lowest bin.
    for (const auto& s : per_feature) {
      if (s.valid && (!leaf.best.valid || s.gain > leaf.best.gain)) leaf.best = s;
    }
  }

  Tree grow_tree(std::vector<std::uint32_t> sample) {
    Tree tree;
    std::vector<Leaf> leaves;
    leaves.reserve(static_cast<std::size_t>(config_.num_leaves));
    leaves.emplace_back();
    leaves[0].rows = std::move(sample);
    sum_leaf(leaves[0]);
    build_histogram(leaves[0]);
    find_best_split(leaves[0]);

    while (static_cast<int>(leaves.size()) < config_.num_leaves) {
      std::size_t pick = leaves.size();
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i].best.valid && (pick == leaves.size() || leaves[i].best.gain > leaves[pick].best.gain)) pick = i;
      }
      if (pick == leaves.size()) break;
      split_leaf(tree, leaves, pick);
    }

    for (const auto& leaf : leaves) {
      tree.leaf_value.push_back(-leaf.sum_g / (leaf.sum_h + config_.lambda_l2) * config_.learning_rate);
      tree.leaf_count.push_back(static_cast<std::uint32_t>(leaf.rows.size()));
    }
    return tree;
  }

  void split_leaf(Tree& tree, std::vector<Leaf>& leaves, std::size_t index) {
    const Split split = leaves[index].best;
    const auto node = static_cast<int>(tree.split_feature.size());
    const auto right_index = static_cast<int>(leaves.size());

    tree.split_feature.push_back(split.feature);
    tree.threshold_bin.push_back(split.threshold);
    tree.threshold_value.push_back(binned_.mappers[split.feature].upper_bounds()[split.threshold]);
    tree.split_gain.push_back(split.gain);
    tree.left_child.push_back(~static_cast<int>(index));
    tree.right_child.push_back(~right_index);
    if (const int p = leaves[index].parent; p >= 0) {
      (leaves[index].is_left ? tree.left_child : tree.right_child)[static_cast<std::size_t>(p)] = node;
    }

    Leaf right;
    {
      Leaf& parent = leaves[index];
      std::vector<std::uint32_t> left_rows;
      left_rows.reserve(parent.rows.size());
      for (auto r : parent.rows) {
        (feature_bin(split.feature, r) <= split.threshold ? left_rows : right.rows).push_back(r);
      }
      parent.rows = std::move(left_rows);
      parent.parent = node;
      parent.is_left = true;
      right.parent = node;
      right.is_left = false;
      sum_leaf(parent);
      sum_leaf(right);

      // Build the smaller child; the larger one is parent minus smaller.
      Leaf& small = parent.rows.size() <= right.rows.size() ? parent : right;
      Leaf& large = (&small == &parent) ? right : parent;
      std::vector<HistEntry> parent_hist = std::move(parent.hist);
      build_histogram(small);
      large.hist = std::move(parent_hist);
      for (std::size_t i = 0; i < total_slots_; ++i) {
        large.hist[i].g -= small.hist[i].g;
        large.hist[i].h -= small.hist[i].h;
        large.hist[i].n -= small.hist[i].n;
      }
    }
    leaves.push_back(std::move(right));
    find_best_split(leaves[index]);
    find_best_split(leaves.back());
  }

  void apply_tree(const GbdtModel&, const Tree& tree) {
    parallel_for(
        scores_.size(),
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t r = begin; r < end; ++r) {
            int node = tree.num_nodes() > 0 ? 0 : ~0;
            while (node >= 0) {
              const auto u = static_cast<std::size_t>(node);
              node = feature_bin(tree.split_feature[u], static_cast<std::uint32_t>(r)) <= tree.threshold_bin[u]
                         ? tree.left_child[u]
                         : tree.right_child[u];
            }
            scores_[r] += tree.leaf_value[static_cast<std::size_t>(~node)];
          }
        },
        4096);
  }

  const GbdtConfig& config_;
  std::span<const int> labels_;
  TrainStats* stats_;

  BinnedMatrix binned_;
  std::vector<FeatureBundle> bundles_;
  std::vector<FeatureSlot> slots_;
  std::vector<bool> in_group_;
  std::vector<std::uint32_t> active_features_;
  std::size_t num_groups_ = 0;
  std::vector<std::uint16_t> row_bins_;
  std::vector<std::size_t> hist_offset_;
  std::size_t total_slots_ = 0;

  std::vector<double> scores_, grad_, hess_, wgrad_, whess_;
};

}  // namespace

GbdtModel train(const GbdtConfig& config, const DenseMatrix& x, std::span<const int> labels, TrainStats* stats) {
  config.validate();
  if (x.rows == 0 || x.cols == 0) throw InvalidArgument("gbdt train: empty feature matrix");
  if (x.data.size() != x.rows * x.cols) throw InvalidArgument("gbdt train: matrix storage does not match its shape");
  if (labels.size() != x.rows) throw InvalidArgument("gbdt train: label count does not match row count");
  if (x.rows < 2 * static_cast<std::size_t>(config.min_data_in_leaf)) {
    throw InvalidArgument("gbdt train: need at least 2 * min_data_in_leaf rows");
  }
  std::size_t positives = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw InvalidArgument("gbdt train: labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  if (positives == 0 || positives == labels.size()) throw InvalidArgument("gbdt train: labels contain a single class");
  for (double v : x.data) {
    if (!std::isfinite(v)) throw InvalidArgument("gbdt train: non-finite feature value");
  }
  Trainer trainer(config, x, labels, stats);
  return trainer.run();
}

}  // namespace relevancy::gbdt
