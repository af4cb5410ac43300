#include "config.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <set>

#include "common.h"
#include "digest.h"

namespace relevancy {

namespace fs = std::filesystem;

namespace {

using KeySet = std::set<std::string, std::less<>>;

[[noreturn]] void fail(const std::string& message) { throw ConfigError("config: " + message); }

void check_keys(const YAML::Node& node, const std::string& where, const KeySet& allowed) {
  if (!node.IsMap()) fail("'" + where + "' must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) fail("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <typename T>
void read(const YAML::Node& parent, const char* key, const std::string& where, T& out) {
  const auto node = parent[key];
  if (!node) return;
  try {
    out = node.as<T>();
  } catch (const YAML::Exception&) {
    fail("bad value for '" + (where.empty() ? std::string(key) : where + "." + key) + "'");
  }
}

void read_double(const YAML::Node& parent, const char* key, const std::string& where, double& out) {
  const auto node = parent[key];
  if (!node) return;
  const auto v = node.IsScalar() ? parse_double(node.Scalar()) : std::nullopt;
  if (!v) fail("bad number for '" + (where.empty() ? std::string(key) : where + "." + key) + "'");
  out = *v;
}

void read_path(const YAML::Node& parent, const char* key, const fs::path& base, fs::path& out) {
  const auto node = parent[key];
  if (!node) return;
  if (node.IsNull()) {
    out.clear();
    return;
  }
  if (!node.IsScalar()) fail("bad path for 'paths." + std::string(key) + "'");
  const std::string text = node.Scalar();
  if (text.empty()) {
    out.clear();
    return;
  }
  const fs::path p(text);
  out = p.is_absolute() ? p.lexically_normal() : (base / p).lexically_normal();
}

void apply_override(YAML::Node& root, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) fail("override '" + text + "' is not key=value");
  const auto key = std::string(trim(std::string_view(text).substr(0, eq)));
  YAML::Node value;
  try {
    value = YAML::Load(text.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    fail("override '" + text + "': " + e.what());
  }
  const auto parts = split_view(key, '.');
  // yaml-cpp nodes are handles; walk with fresh references each level.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const std::string part(parts[i]);
    YAML::Node next = chain.back()[part];
    if (!next.IsDefined() || next.IsNull()) {
      chain.back()[part] = YAML::Node(YAML::NodeType::Map);
      next = chain.back()[part];
    }
    if (!next.IsMap()) fail("override '" + key + "': '" + part + "' is not a section");
    chain.push_back(next);
  }
  chain.back()[std::string(parts.back())] = value;
}

std::string tf_mode_name(TfMode mode) { return mode == TfMode::RawCount ? "raw_count" : "length_normalized"; }

void validate_values(const RunConfig& c) {
  if (!(c.split_ratio > 0.0 && c.split_ratio < 1.0)) fail("split.ratio must be in (0, 1)");
  if (c.schemes.empty()) fail("schemes must not be empty");
  if (c.fusion.k_text == 0 || c.fusion.k_embed == 0 || c.fusion.k_image == 0) fail("fusion ranks must be >= 1");
  if (!(c.fusion.svd_tolerance > 0.0)) fail("fusion.svd_tolerance must be > 0");
  if (c.fusion.svd_max_iterations < 1) fail("fusion.svd_max_iterations must be >= 1");
  if (c.text.log_base < 0.0 || c.text.log_base == 1.0) fail("text.log_base must be 0 (natural) or a positive base != 1");
  if (c.threads < 0) fail("threads must be >= 0");
  if (c.paths.output_dir.empty()) fail("paths.output_dir must be set");
  try {
    c.gbdt.validate();
    c.linear.validate();
  } catch (const InvalidArgument& e) {
    fail(e.what());
  }
}

}  // namespace

std::vector<std::uint64_t> RunConfig::run_seeds() const { return seeds.empty() ? std::vector{seed} : seeds; }

bool RunConfig::needs_embeddings() const {
  return std::any_of(schemes.begin(), schemes.end(), [](const SchemeId& s) { return s.needs_embeddings(); });
}

bool RunConfig::needs_images() const {
  return std::any_of(schemes.begin(), schemes.end(), [](const SchemeId& s) { return s.needs_images(); });
}

RunConfig parse_config(std::string_view yaml, const fs::path& base_dir, std::span<const std::string> overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    fail(std::string("YAML syntax: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(root, o);

  check_keys(root, "",
             {"seed", "seeds", "threads", "save_models", "cache", "paths", "split", "text", "fusion", "gbdt", "linear",
              "schemes", "events"});
  RunConfig c;
  const fs::path base = base_dir.empty() ? fs::current_path() : fs::absolute(base_dir);
  read(root, "seed", "", c.seed);
  read(root, "seeds", "", c.seeds);
  read(root, "threads", "", c.threads);
  read(root, "save_models", "", c.save_models);
  read(root, "cache", "", c.cache);
  read(root, "events", "", c.events);

  if (const auto n = root["paths"]) {
    check_keys(n, "paths", {"corpus", "stopwords", "embeddings", "image_features", "output_dir"});
    read_path(n, "corpus", base, c.paths.corpus);
    read_path(n, "stopwords", base, c.paths.stopwords);
    read_path(n, "embeddings", base, c.paths.embeddings);
    read_path(n, "image_features", base, c.paths.image_features);
    read_path(n, "output_dir", base, c.paths.output_dir);
  }
  if (!c.paths.output_dir.is_absolute()) c.paths.output_dir = (base / c.paths.output_dir).lexically_normal();

  if (const auto n = root["split"]) {
    check_keys(n, "split", {"ratio"});
    read_double(n, "ratio", "split", c.split_ratio);
  }
  if (const auto n = root["text"]) {
    check_keys(n, "text", {"tf_mode", "log_base", "handcrafted"});
    std::string mode = tf_mode_name(c.text.tf_mode);
    read(n, "tf_mode", "text", mode);
    if (mode == "length_normalized") {
      c.text.tf_mode = TfMode::LengthNormalized;
    } else if (mode == "raw_count") {
      c.text.tf_mode = TfMode::RawCount;
    } else {
      fail("text.tf_mode must be length_normalized or raw_count");
    }
    read_double(n, "log_base", "text", c.text.log_base);
    read(n, "handcrafted", "text", c.text.handcrafted);
  }
  if (const auto n = root["fusion"]) {
    check_keys(n, "fusion", {"k_text", "k_embed", "k_image", "normalize", "svd_tolerance", "svd_max_iterations"});
    read(n, "k_text", "fusion", c.fusion.k_text);
    read(n, "k_embed", "fusion", c.fusion.k_embed);
    read(n, "k_image", "fusion", c.fusion.k_image);
    read(n, "normalize", "fusion", c.fusion.normalize);
    read_double(n, "svd_tolerance", "fusion", c.fusion.svd_tolerance);
    read(n, "svd_max_iterations", "fusion", c.fusion.svd_max_iterations);
  }
  if (const auto n = root["gbdt"]) {
    check_keys(n, "gbdt",
               {"n_trees", "learning_rate", "num_leaves", "min_data_in_leaf", "max_bins", "goss", "goss_top_rate",
                "goss_other_rate", "efb", "efb_max_conflict_rate", "lambda_l2", "min_sum_hessian_in_leaf"});
    auto& g = c.gbdt;
    read(n, "n_trees", "gbdt", g.n_trees);
    read_double(n, "learning_rate", "gbdt", g.learning_rate);
    read(n, "num_leaves", "gbdt", g.num_leaves);
    read(n, "min_data_in_leaf", "gbdt", g.min_data_in_leaf);
    read(n, "max_bins", "gbdt", g.max_bins);
    read(n, "goss", "gbdt", g.goss_enabled);
    read_double(n, "goss_top_rate", "gbdt", g.goss_top_rate);
    read_double(n, "goss_other_rate", "gbdt", g.goss_other_rate);
    read(n, "efb", "gbdt", g.efb_enabled);
    read_double(n, "efb_max_conflict_rate", "gbdt", g.efb_max_conflict_rate);
    read_double(n, "lambda_l2", "gbdt", g.lambda_l2);
    read_double(n, "min_sum_hessian_in_leaf", "gbdt", g.min_sum_hessian_in_leaf);
  }
  if (const auto n = root["linear"]) {
    check_keys(n, "linear", {"l2", "epochs", "step_size", "tolerance"});
    read_double(n, "l2", "linear", c.linear.l2);
    read(n, "epochs", "linear", c.linear.epochs);
    read_double(n, "step_size", "linear", c.linear.step_size);
    read_double(n, "tolerance", "linear", c.linear.tolerance);
  }
  if (const auto n = root["schemes"]) {
    std::vector<std::string> names;
    read(root, "schemes", "", names);
    c.schemes.clear();
    for (const auto& name : names) {
      try {
        c.schemes.push_back(parse_scheme(name));
      } catch (const InvalidArgument& e) {
        fail(e.what());
      }
    }
  }
  validate_values(c);
  return c;
}

RunConfig load_config(const fs::path& path, std::span<const std::string> overrides) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const MissingResource&) {
    throw ConfigError("config: cannot read config file " + path.string());
  }
  return parse_config(text, fs::absolute(path).parent_path(), overrides);
}

RunConfig default_config(std::span<const std::string> overrides) { return parse_config("", {}, overrides); }

void check_resources(const RunConfig& c) {
  const auto require = [](const fs::path& p, const char* what) {
    if (p.empty()) throw MissingResource(std::string(what) + " path is not configured");
    if (!fs::exists(p)) throw MissingResource(std::string(what) + " not found: " + p.string());
  };
  require(c.paths.corpus, "corpus");
  if (!c.paths.stopwords.empty()) require(c.paths.stopwords, "stopwords");
  if (c.needs_embeddings()) require(c.paths.embeddings, "embeddings");
  if (c.needs_images()) require(c.paths.image_features, "image features");
}

std::string dump_config(const RunConfig& c) {
  YAML::Emitter e;
  const auto num = [](double v) { return format_double(v); };
  const auto path = [](const fs::path& p) { return p.empty() ? std::string() : fs::absolute(p).string(); };
  e << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "seeds" << YAML::Value << YAML::Flow << c.seeds;
  e << YAML::Key << "threads" << YAML::Value << c.threads;
  e << YAML::Key << "save_models" << YAML::Value << c.save_models;
  e << YAML::Key << "cache" << YAML::Value << c.cache;
  e << YAML::Key << "paths" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "corpus" << YAML::Value << path(c.paths.corpus);
  e << YAML::Key << "stopwords" << YAML::Value << path(c.paths.stopwords);
  e << YAML::Key << "embeddings" << YAML::Value << path(c.paths.embeddings);
  e << YAML::Key << "image_features" << YAML::Value << path(c.paths.image_features);
  e << YAML::Key << "output_dir" << YAML::Value << path(c.paths.output_dir);
  e << YAML::EndMap;
  e << YAML::Key << "split" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "ratio" << YAML::Value << num(c.split_ratio);
  e << YAML::EndMap;
  e << YAML::Key << "text" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "tf_mode" << YAML::Value << tf_mode_name(c.text.tf_mode);
  e << YAML::Key << "log_base" << YAML::Value << num(c.text.log_base);
  e << YAML::Key << "handcrafted" << YAML::Value << c.text.handcrafted;
  e << YAML::EndMap;
  e << YAML::Key << "fusion" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "k_text" << YAML::Value << c.fusion.k_text;
  e << YAML::Key << "k_embed" << YAML::Value << c.fusion.k_embed;
  e << YAML::Key << "k_image" << YAML::Value << c.fusion.k_image;
  e << YAML::Key << "normalize" << YAML::Value << c.fusion.normalize;
  e << YAML::Key << "svd_tolerance" << YAML::Value << num(c.fusion.svd_tolerance);
  e << YAML::Key << "svd_max_iterations" << YAML::Value << c.fusion.svd_max_iterations;
  e << YAML::EndMap;
  const auto& g = c.gbdt;
  e << YAML::Key << "gbdt" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_trees" << YAML::Value << g.n_trees;
  e << YAML::Key << "learning_rate" << YAML::Value << num(g.learning_rate);
  e << YAML::Key << "num_leaves" << YAML::Value << g.num_leaves;
  e << YAML::Key << "min_data_in_leaf" << YAML::Value << g.min_data_in_leaf;
  e << YAML::Key << "max_bins" << YAML::Value << g.max_bins;
  e << YAML::Key << "goss" << YAML::Value << g.goss_enabled;
  e << YAML::Key << "goss_top_rate" << YAML::Value << num(g.goss_top_rate);
  e << YAML::Key << "goss_other_rate" << YAML::Value << num(g.goss_other_rate);
  e << YAML::Key << "efb" << YAML::Value << g.efb_enabled;
  e << YAML::Key << "efb_max_conflict_rate" << YAML::Value << num(g.efb_max_conflict_rate);
  e << YAML::Key << "lambda_l2" << YAML::Value << num(g.lambda_l2);
  e << YAML::Key << "min_sum_hessian_in_leaf" << YAML::Value << num(g.min_sum_hessian_in_leaf);
  e << YAML::EndMap;
  e << YAML::Key << "linear" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "l2" << YAML::Value << num(c.linear.l2);
  e << YAML::Key << "epochs" << YAML::Value << c.linear.epochs;
  e << YAML::Key << "step_size" << YAML::Value << num(c.linear.step_size);
  e << YAML::Key << "tolerance" << YAML::Value << num(c.linear.tolerance);
  e << YAML::EndMap;
  std::vector<std::string> schemes;
  for (const auto& s : c.schemes) schemes.push_back(s.name());
  e << YAML::Key << "schemes" << YAML::Value << YAML::Flow << schemes;
  e << YAML::Key << "events" << YAML::Value << YAML::Flow << c.events;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

std::string config_digest(const RunConfig& c) {
  RunConfig canonical = c;
  canonical.threads = 0;
  canonical.save_models = true;
  canonical.cache = true;
  canonical.paths.output_dir = "/";
  return sha256_hex(dump_config(canonical));
}

std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream, std::uint64_t index) {
  return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(stream)), index);
}

}  // namespace relevancy
