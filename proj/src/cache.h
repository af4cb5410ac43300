#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "pipeline.h"

namespace relevancy {

struct CacheCounters {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t corrupt = 0;
};

// Content-addressed store for featurization artifacts under one directory.
// Files end in a SHA-256 of their body; a mismatch is reported as a warning
// and treated as a miss so the caller regenerates the entry.
class FeatureCache {
 public:
  FeatureCache(std::filesystem::path dir, bool enabled);

  std::optional<EventFeatures> load_features(const std::string& key);
  void store_features(const std::string& key, const EventFeatures& features);
  std::optional<FusionArtifacts> load_fusion(const std::string& key);
  void store_fusion(const std::string& key, const FusionArtifacts& fusion);

  const CacheCounters& features_counters() const { return features_; }
  const CacheCounters& fusion_counters() const { return fusion_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  bool enabled_;
  CacheCounters features_;
  CacheCounters fusion_;
};

// Key over the inputs and the settings that shape raw feature blocks.
std::string features_cache_key(const Resources& resources, const std::string& event, const RunConfig& config,
                               std::uint64_t seed);
// Extends a features key with the settings that shape fitted projections.
std::string fusion_cache_key(const std::string& features_key, const RunConfig& config);

std::string encode_features(const EventFeatures& features);
EventFeatures decode_features(std::string_view bytes);
std::string encode_fusion(const FusionArtifacts& fusion);
FusionArtifacts decode_fusion(std::string_view bytes);

}  // namespace relevancy
