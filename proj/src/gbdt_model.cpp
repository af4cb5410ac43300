#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "common.h"
#include "gbdt.h"

namespace relevancy::gbdt {

namespace {

constexpr std::string_view kModelFormat = "relevancy.gbdt_model";
constexpr int kModelVersion = 1;

}  // namespace

std::size_t GbdtModel::leaf_index(const Tree& tree, std::span<const double> x) const {
  int node = tree.num_nodes() > 0 ? 0 : ~0;
  while (node >= 0) {
    const auto u = static_cast<std::size_t>(node);
    const std::uint32_t f = tree.split_feature[u];
    node = mappers[f].bin_of(x[f]) <= tree.threshold_bin[u] ? tree.left_child[u] : tree.right_child[u];
  }
  return static_cast<std::size_t>(~node);
}

double GbdtModel::predict_raw(std::span<const double> x) const {
  if (x.size() != num_features) {
    throw InvalidArgument("gbdt predict: input width " + std::to_string(x.size()) + " != model width " +
                          std::to_string(num_features));
  }
  double score = init_score;
  for (const auto& tree : trees) score += tree.leaf_value[leaf_index(tree, x)];
  return score;
}

double GbdtModel::predict(std::span<const double> x) const {
  // Clamp so the probability never rounds to exactly 0 or 1.
  constexpr double kEps = 1e-15;
  const double p = sigmoid(predict_raw(x));
  return std::clamp(p, kEps, 1.0 - kEps);
}

namespace {

nlohmann::json config_to_json(const GbdtConfig& c) {
  return {{"n_trees", c.n_trees},
          {"learning_rate", c.learning_rate},
          {"num_leaves", c.num_leaves},
          {"min_data_in_leaf", c.min_data_in_leaf},
          {"max_bins", c.max_bins},
          {"goss_enabled", c.goss_enabled},
          {"goss_top_rate", c.goss_top_rate},
          {"goss_other_rate", c.goss_other_rate},
          {"efb_enabled", c.efb_enabled},
          {"efb_max_conflict_rate", c.efb_max_conflict_rate},
          {"lambda_l2", c.lambda_l2},
          {"min_sum_hessian_in_leaf", c.min_sum_hessian_in_leaf},
          {"seed", c.seed}};
}

GbdtConfig config_from_json(const nlohmann::json& j) {
  GbdtConfig c;
  c.n_trees = j.at("n_trees").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.num_leaves = j.at("num_leaves").get<int>();
  c.min_data_in_leaf = j.at("min_data_in_leaf").get<int>();
  c.max_bins = j.at("max_bins").get<int>();
  c.goss_enabled = j.at("goss_enabled").get<bool>();
  c.goss_top_rate = j.at("goss_top_rate").get<double>();
  c.goss_other_rate = j.at("goss_other_rate").get<double>();
  c.efb_enabled = j.at("efb_enabled").get<bool>();
  c.efb_max_conflict_rate = j.at("efb_max_conflict_rate").get<double>();
  c.lambda_l2 = j.at("lambda_l2").get<double>();
  c.min_sum_hessian_in_leaf = j.at("min_sum_hessian_in_leaf").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

std::string serialize_model(const GbdtModel& model) {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["config"] = config_to_json(model.config);
  j["num_features"] = model.num_features;
  j["init_score"] = model.init_score;
  auto mappers = nlohmann::json::array();
  for (const auto& m : model.mappers) mappers.push_back(m.upper_bounds());
  j["bin_upper_bounds"] = std::move(mappers);
  auto bundles = nlohmann::json::array();
  for (const auto& b : model.bundles) {
    bundles.push_back({{"features", b.features}, {"offsets", b.offsets}, {"num_slots", b.num_slots}});
  }
  j["bundles"] = std::move(bundles);
  auto trees = nlohmann::json::array();
  for (const auto& t : model.trees) {
    trees.push_back({{"split_feature", t.split_feature},
                     {"threshold_bin", t.threshold_bin},
                     {"threshold_value", t.threshold_value},
                     {"split_gain", t.split_gain},
                     {"left_child", t.left_child},
                     {"right_child", t.right_child},
                     {"leaf_value", t.leaf_value},
                     {"leaf_count", t.leaf_count}});
  }
  j["trees"] = std::move(trees);
  return j.dump() + "\n";
}

GbdtModel parse_model(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kModelFormat) throw ParseError("not a GBDT model file");
    if (j.at("version").get<int>() != kModelVersion) throw ParseError("unsupported GBDT model version");
    GbdtModel m;
    m.config = config_from_json(j.at("config"));
    m.num_features = j.at("num_features").get<std::size_t>();
    m.init_score = j.at("init_score").get<double>();
    for (const auto& b : j.at("bin_upper_bounds")) m.mappers.emplace_back(b.get<std::vector<double>>());
    if (m.mappers.size() != m.num_features) throw ParseError("bin mapper count does not match num_features");
    for (const auto& b : j.at("bundles")) {
      FeatureBundle fb;
      fb.features = b.at("features").get<std::vector<std::uint32_t>>();
      fb.offsets = b.at("offsets").get<std::vector<std::uint32_t>>();
      fb.num_slots = b.at("num_slots").get<std::uint32_t>();
      m.bundles.push_back(std::move(fb));
    }
    for (const auto& t : j.at("trees")) {
      Tree tree;
      tree.split_feature = t.at("split_feature").get<std::vector<std::uint32_t>>();
      tree.threshold_bin = t.at("threshold_bin").get<std::vector<std::uint32_t>>();
      tree.threshold_value = t.at("threshold_value").get<std::vector<double>>();
      tree.split_gain = t.at("split_gain").get<std::vector<double>>();
      tree.left_child = t.at("left_child").get<std::vector<int>>();
      tree.right_child = t.at("right_child").get<std::vector<int>>();
      tree.leaf_value = t.at("leaf_value").get<std::vector<double>>();
      tree.leaf_count = t.at("leaf_count").get<std::vector<std::uint32_t>>();
      const std::size_t nodes = tree.split_feature.size();
      if (tree.leaf_value.empty() || tree.leaf_value.size() != nodes + 1 || tree.threshold_bin.size() != nodes ||
          tree.left_child.size() != nodes || tree.right_child.size() != nodes) {
        throw ParseError("malformed tree node arrays");
      }
      for (std::size_t u = 0; u < nodes; ++u) {
        if (tree.split_feature[u] >= m.num_features) throw ParseError("tree splits on unknown feature");
        for (int child : {tree.left_child[u], tree.right_child[u]}) {
          if (child >= static_cast<int>(nodes) || (child < 0 && ~child >= static_cast<int>(nodes + 1))) {
            throw ParseError("tree child index out of range");
          }
        }
      }
      m.trees.push_back(std::move(tree));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed GBDT model: ") + e.what());
  }
}

}  // namespace relevancy::gbdt
