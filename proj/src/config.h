#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gbdt.h"
#include "linear.h"
#include "scheme.h"
#include "text_features.h"

namespace relevancy {

struct PathsConfig {
  std::filesystem::path corpus;
  // Empty means the built-in English list.
  std::filesystem::path stopwords;
  std::filesystem::path embeddings;
  std::filesystem::path image_features;
  std::filesystem::path output_dir = "out";

  bool operator==(const PathsConfig&) const = default;
};

struct TextConfig {
  TfMode tf_mode = TfMode::LengthNormalized;
  double log_base = 0.0;
  bool handcrafted = true;

  bool operator==(const TextConfig&) const = default;
};

struct FusionConfig {
  std::size_t k_text = 100;
  std::size_t k_embed = 100;
  std::size_t k_image = 100;
  bool normalize = true;
  double svd_tolerance = 1e-10;
  // Subspace iterations per projector; a few passes suffice for feature use.
  int svd_max_iterations = 20;

  bool operator==(const FusionConfig&) const = default;
};

struct RunConfig {
  PathsConfig paths;
  double split_ratio = 0.8;
  std::uint64_t seed = 42;
  // Nonempty: evaluate every scheme once per listed seed.
  std::vector<std::uint64_t> seeds;
  TextConfig text;
  FusionConfig fusion;
  gbdt::GbdtConfig gbdt;
  linear::LinearConfig linear;
  std::vector<SchemeId> schemes = all_schemes();
  // Empty: every event in the corpus.
  std::vector<std::string> events;
  // 0: hardware concurrency.
  int threads = 0;
  bool save_models = true;
  bool cache = true;

  std::vector<std::uint64_t> run_seeds() const;
  bool needs_embeddings() const;
  bool needs_images() const;
  bool operator==(const RunConfig&) const = default;
};

// Parses YAML text. Relative paths resolve against base_dir. Each override is
// "dotted.key=value" with a YAML value, applied before validation. Unknown
// keys and out-of-range values throw ConfigError.
RunConfig parse_config(std::string_view yaml, const std::filesystem::path& base_dir,
                       std::span<const std::string> overrides = {});
RunConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});
RunConfig default_config(std::span<const std::string> overrides = {});

// Throws MissingResource naming the first referenced path that does not exist.
void check_resources(const RunConfig& config);

// Effective configuration as YAML with absolute paths; parsing it back gives
// an equal RunConfig.
std::string dump_config(const RunConfig& config);

// Digest of every setting that can change results (not threads, output
// location, or model saving).
std::string config_digest(const RunConfig& config);

// Seed streams derived from the run seed.
enum class SeedStream : std::uint64_t { Split = 1, Svd = 2, Gbdt = 3, Linear = 4 };
std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream, std::uint64_t index = 0);

}  // namespace relevancy
