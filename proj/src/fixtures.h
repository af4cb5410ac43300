#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

namespace relevancy {

// Synthetic multimodal corpus. Text carries a partial label signal through a
// few frequent cue words and many rare ones whose embeddings cluster by class;
// image vectors carry an independent signal; some posts have no usable image.
struct FixtureOptions {
  std::size_t posts = 2000;
  std::uint64_t seed = 7;
  double informative_rate = 0.63;
  std::size_t embedding_dim = 25;
  std::size_t image_dim = 32;
  // Fraction of posts whose images have feature vectors.
  double image_coverage = 0.85;
  std::string event = "synthetic_storm";
};

struct FixturePaths {
  std::filesystem::path corpus;
  std::filesystem::path stopwords;
  std::filesystem::path embeddings;
  std::filesystem::path image_features;
  std::filesystem::path config;
};

// Writes posts.tsv, stopwords.txt, embeddings.txt, image_features.txt and
// config.yaml into out_dir. Output depends only on the options.
FixturePaths make_fixtures(const std::filesystem::path& out_dir, const FixtureOptions& options = {});

}  // namespace relevancy
