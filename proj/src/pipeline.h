#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "config.h"
#include "corpus.h"
#include "fusion.h"
#include "gbdt.h"
#include "image_features.h"
#include "linear.h"
#include "matrix.h"
#include "report.h"
#include "text_features.h"

namespace relevancy {

// Everything read from disk for a run.
struct Resources {
  Corpus corpus;
  StopwordSet stopwords;
  std::optional<EmbeddingTable> embeddings;
  std::optional<ImageFeatureTable> images;
  // Content digest of every input file the run depends on.
  std::string input_digest;
};

// Loads the corpus, stopwords and whichever of the embedding and image tables
// the configured schemes need. Embeddings are filtered to corpus tokens.
Resources load_resources(const RunConfig& config);

// Per-post feature blocks for one event, before any fitted transform.
struct EventFeatures {
  std::string event;
  std::vector<std::string> post_ids;
  std::vector<int> labels;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  Vocabulary vocab;
  std::vector<FeatureBlock> blocks;
  ImageCoverage coverage;

  const FeatureBlock* find(BlockName name) const;
};

// Splits the event's posts, fits the vocabulary on training posts and builds
// bow, tf-idf, and (when available) embedding, image and handcrafted blocks.
EventFeatures featurize_event(const Resources& resources, const std::string& event, const RunConfig& config,
                              std::uint64_t seed);

// Projectors and the standardizer fitted on training rows, plus every post's
// reduced block rows.
struct FusionArtifacts {
  std::vector<SvdProjector> projectors;
  std::optional<Standardizer> standardizer;
  std::vector<FeatureBlock> reduced;

  const FeatureBlock* find(BlockName name) const;
  const SvdProjector* projector(BlockName name) const;
};

FusionArtifacts fit_fusion(const EventFeatures& features, const RunConfig& config, std::uint64_t seed);

// Applies a fitted projector (or the standardizer) to one raw block row.
DenseVector reduce_row(const FusionArtifacts& fusion, BlockName name, const SparseVector& row);
DenseVector reduce_row(const FusionArtifacts& fusion, BlockName name, std::span<const double> row);

// Scheme layout restricted to the blocks this run produces.
std::vector<BlockName> effective_layout(const SchemeId& scheme, const RunConfig& config);

DenseMatrix fused_matrix(const FusionArtifacts& fusion, std::span<const BlockName> layout,
                         std::span<const std::size_t> rows, bool normalize);

struct TrainedModel {
  SchemeId scheme;
  std::vector<BlockName> layout;
  std::variant<gbdt::GbdtModel, linear::LogRegModel> model;

  std::size_t width() const;
  double predict(std::span<const double> x) const;
};

gbdt::GbdtConfig gbdt_config_for(const SchemeId& scheme, const RunConfig& config, std::uint64_t seed);

struct SchemeResult {
  EvalReport report;
  TrainedModel model;
  std::vector<double> test_scores;  // aligned with EventFeatures::test_rows
};

// Trains on the training rows only and scores the test rows.
SchemeResult run_scheme(const EventFeatures& features, const FusionArtifacts& fusion, const SchemeId& scheme,
                        const RunConfig& config, std::uint64_t seed);

// Full path from loaded resources for a single scheme, without caching.
EvalReport run_scheme(const Resources& resources, const std::string& event, const SchemeId& scheme,
                      const RunConfig& config, std::uint64_t seed);

// Fitted text and fusion state for scoring new posts.
struct FeaturePipeline {
  std::string event;
  TextConfig text;
  bool normalize = true;
  std::vector<std::string> stopwords;
  Vocabulary vocab;
  std::vector<SvdProjector> projectors;
  std::optional<Standardizer> standardizer;
  std::filesystem::path embeddings_path;
  std::filesystem::path image_features_path;
};

FeaturePipeline make_feature_pipeline(const EventFeatures& features, const FusionArtifacts& fusion,
                                      const RunConfig& config, const StopwordSet& stopwords);
std::string serialize_feature_pipeline(const FeaturePipeline& pipeline);
FeaturePipeline parse_feature_pipeline(std::string_view text);

std::string serialize_trained_model(const TrainedModel& model, const std::string& event,
                                    const std::string& features_file);
struct SavedModel {
  TrainedModel model;
  std::string event;
  std::string features_file;
};
SavedModel parse_trained_model(std::string_view text);

// Fused vectors for arbitrary posts through a saved pipeline.
std::vector<FusedVector> fuse_posts(const FeaturePipeline& pipeline, std::span<const Post> posts,
                                    std::span<const BlockName> layout, const EmbeddingTable* embeddings,
                                    const ImageFeatureTable* images);

}  // namespace relevancy
