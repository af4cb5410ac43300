#include "pipeline.h"

#include <algorithm>
#include <json.hpp>
#include <set>

#include "common.h"
#include "digest.h"
#include "parallel.h"

namespace relevancy {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kPipelineFormat = "relevancy.feature_pipeline";
constexpr std::string_view kSchemeModelFormat = "relevancy.scheme_model";
constexpr int kFormatVersion = 1;

std::set<BlockName> needed_blocks(const RunConfig& config) {
  std::set<BlockName> out;
  for (const auto& s : config.schemes) {
    for (auto b : effective_layout(s, config)) out.insert(b);
  }
  return out;
}

std::size_t rank_for(BlockName name, const FusionConfig& fusion) {
  switch (name) {
    case BlockName::Embed: return fusion.k_embed;
    case BlockName::Image: return fusion.k_image;
    default: return fusion.k_text;
  }
}

struct RawRowContext {
  const Vocabulary* vocab = nullptr;
  TfidfOptions tfidf;
  const EmbeddingTable* embeddings = nullptr;
  const ImageFeatureTable* images = nullptr;
};

// The one place a post's raw block rows are computed, shared by training
// and by scoring saved models.
void append_raw_rows(BlockName name, const Post& post, const TokenizedDoc& doc, const RawRowContext& ctx,
                     FeatureBlock& block, ImageCoverage* coverage) {
  switch (name) {
    case BlockName::Bow:
      std::get<SparseRows>(block.rows).push_back(bow_vector(doc, *ctx.vocab));
      break;
    case BlockName::Tfidf:
      std::get<SparseRows>(block.rows).push_back(tfidf_vector(doc, *ctx.vocab, ctx.tfidf));
      break;
    case BlockName::Embed:
      std::get<DenseRows>(block.rows).push_back(pool_embeddings(doc, *ctx.embeddings));
      break;
    case BlockName::Image:
      std::get<DenseRows>(block.rows).push_back(post_image_vector(post, *ctx.images, coverage));
      break;
    case BlockName::Handcrafted:
      std::get<DenseRows>(block.rows).push_back(handcrafted_features(doc));
      break;
  }
}

FeatureBlock empty_block(BlockName name, const RawRowContext& ctx) {
  FeatureBlock b;
  b.name = name;
  switch (name) {
    case BlockName::Bow:
    case BlockName::Tfidf:
      b.width = ctx.vocab->size();
      b.rows = SparseRows{};
      break;
    case BlockName::Embed:
      b.width = ctx.embeddings->dim();
      b.rows = DenseRows{};
      break;
    case BlockName::Image:
      b.width = ctx.images->dim();
      b.rows = DenseRows{};
      break;
    case BlockName::Handcrafted:
      b.width = 2;
      b.rows = DenseRows{};
      break;
  }
  return b;
}

DenseVector reduce(const std::vector<SvdProjector>& projectors, const std::optional<Standardizer>& standardizer,
                   BlockName name, const auto& row) {
  if (name == BlockName::Handcrafted) {
    if (!standardizer) throw InvalidArgument("no standardizer fitted for handcrafted features");
    if constexpr (std::is_same_v<std::decay_t<decltype(row)>, SparseVector>) {
      return standardizer->apply(row.to_dense());
    } else {
      return standardizer->apply(row);
    }
  }
  const auto it = std::find_if(projectors.begin(), projectors.end(), [&](const SvdProjector& p) { return p.block == name; });
  if (it == projectors.end()) throw InvalidArgument("no projector fitted for block '" + std::string(block_name(name)) + "'");
  return svd_project(*it, row);
}

bool has_nonzero(const FeatureBlock& block, std::span<const std::size_t> rows) {
  return std::visit(
      [&](const auto& all) {
        for (std::size_t r : rows) {
          for (double v : [&]() -> const std::vector<double>& {
                 if constexpr (std::is_same_v<std::decay_t<decltype(all)>, SparseRows>) {
                   return all[r].values;
                 } else {
                   return all[r];
                 }
               }()) {
            if (v != 0.0) return true;
          }
        }
        return false;
      },
      block.rows);
}

FeatureBlock select_rows(const FeatureBlock& block, std::span<const std::size_t> rows) {
  FeatureBlock out;
  out.name = block.name;
  out.width = block.width;
  std::visit(
      [&](const auto& all) {
        std::decay_t<decltype(all)> picked;
        picked.reserve(rows.size());
        for (std::size_t r : rows) picked.push_back(all[r]);
        out.rows = std::move(picked);
      },
      block.rows);
  return out;
}

json vocab_to_json(const Vocabulary& v) {
  return {{"words", v.words()}, {"doc_freq", v.doc_freqs()}, {"n_docs", v.n_docs()}};
}

Vocabulary vocab_from_json(const json& j) {
  return Vocabulary(j.at("words").get<std::vector<std::string>>(), j.at("doc_freq").get<std::vector<std::uint32_t>>(),
                    j.at("n_docs").get<std::size_t>());
}

}  // namespace

Resources load_resources(const RunConfig& config) {
  check_resources(config);
  Resources r;
  Digest digest;
  digest.field("corpus").file(config.paths.corpus);
  r.corpus = load_corpus(config.paths.corpus);
  if (config.paths.stopwords.empty()) {
    r.stopwords = builtin_stopwords();
    digest.field("stopwords:builtin").field(builtin_stopwords_text());
  } else {
    r.stopwords = load_stopwords(config.paths.stopwords);
    digest.field("stopwords").file(config.paths.stopwords);
  }
  if (config.needs_embeddings()) {
    std::unordered_set<std::string> keep;
    for (const auto& post : r.corpus.posts()) {
      for (auto& t : preprocess(post, r.stopwords).tokens) keep.insert(std::move(t));
    }
    r.embeddings = load_embeddings(config.paths.embeddings, &keep);
    digest.field("embeddings").file(config.paths.embeddings);
  }
  if (config.needs_images()) {
    r.images = load_image_features(config.paths.image_features);
    digest.field("images").file(config.paths.image_features);
  }
  r.input_digest = digest.hex();
  return r;
}

const FeatureBlock* EventFeatures::find(BlockName name) const {
  for (const auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const FeatureBlock* FusionArtifacts::find(BlockName name) const {
  for (const auto& b : reduced) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

const SvdProjector* FusionArtifacts::projector(BlockName name) const {
  for (const auto& p : projectors) {
    if (p.block == name) return &p;
  }
  return nullptr;
}

std::vector<BlockName> effective_layout(const SchemeId& scheme, const RunConfig& config) {
  auto layout = scheme.layout();
  if (!config.text.handcrafted) std::erase(layout, BlockName::Handcrafted);
  return layout;
}

EventFeatures featurize_event(const Resources& resources, const std::string& event, const RunConfig& config,
                              std::uint64_t seed) {
  const Corpus corpus = resources.corpus.filter_event(event);
  if (corpus.empty()) throw ConfigError("config: event '" + event + "' has no posts in the corpus");
  EventFeatures out;
  out.event = event;
  const auto parts = split(corpus, config.split_ratio, derive_seed(seed, SeedStream::Split));
  out.train_rows = parts.train_rows;
  out.test_rows = parts.test_rows;
  for (const auto& post : corpus.posts()) {
    out.post_ids.push_back(post.post_id);
    out.labels.push_back(label_value(post.label));
  }

  std::vector<TokenizedDoc> docs(corpus.size());
  parallel_for(corpus.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) docs[i] = preprocess(corpus.posts()[i], resources.stopwords);
  });
  std::vector<TokenizedDoc> train_docs;
  train_docs.reserve(out.train_rows.size());
  for (std::size_t r : out.train_rows) train_docs.push_back(docs[r]);
  out.vocab = build_vocab(train_docs);

  RawRowContext ctx;
  ctx.vocab = &out.vocab;
  ctx.tfidf = TfidfOptions{config.text.tf_mode, config.text.log_base};
  const auto needed = needed_blocks(config);
  if (needed.contains(BlockName::Embed)) {
    if (!resources.embeddings) throw MissingResource("embeddings are required but were not loaded");
    ctx.embeddings = &*resources.embeddings;
  }
  if (needed.contains(BlockName::Image)) {
    if (!resources.images) throw MissingResource("image features are required but were not loaded");
    ctx.images = &*resources.images;
  }
  for (BlockName name : needed) {
    FeatureBlock block = empty_block(name, ctx);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      append_raw_rows(name, corpus.posts()[i], docs[i], ctx, block, name == BlockName::Image ? &out.coverage : nullptr);
    }
    out.blocks.push_back(std::move(block));
  }
  return out;
}

DenseVector reduce_row(const FusionArtifacts& fusion, BlockName name, const SparseVector& row) {
  return reduce(fusion.projectors, fusion.standardizer, name, row);
}

DenseVector reduce_row(const FusionArtifacts& fusion, BlockName name, std::span<const double> row) {
  return reduce(fusion.projectors, fusion.standardizer, name, row);
}

FusionArtifacts fit_fusion(const EventFeatures& features, const RunConfig& config, std::uint64_t seed) {
  FusionArtifacts out;
  for (const auto& block : features.blocks) {
    if (block.name == BlockName::Handcrafted) {
      out.standardizer = Standardizer::fit(std::get<DenseRows>(select_rows(block, features.train_rows).rows));
      continue;
    }
    const std::size_t k =
        std::min({rank_for(block.name, config.fusion), features.train_rows.size(), block.width});
    if (k == 0 || !has_nonzero(block, features.train_rows)) {
      log_warning("event '" + features.event + "': block '" + std::string(block_name(block.name)) +
                  "' is all zero on training posts; it contributes no columns");
      SvdProjector empty;
      empty.block = block.name;
      empty.width = block.width;
      out.projectors.push_back(std::move(empty));
      continue;
    }
    SvdOptions options;
    options.seed = derive_seed(seed, SeedStream::Svd, static_cast<std::uint64_t>(block_rank(block.name)));
    options.tolerance = config.fusion.svd_tolerance;
    options.max_iterations = config.fusion.svd_max_iterations;
    out.projectors.push_back(svd_fit(select_rows(block, features.train_rows), k, options));
  }
  for (const auto& block : features.blocks) {
    FeatureBlock reduced;
    reduced.name = block.name;
    DenseRows rows(block.row_count());
    std::visit(
        [&](const auto& all) {
          parallel_for(all.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) rows[i] = reduce(out.projectors, out.standardizer, block.name, all[i]);
          });
        },
        block.rows);
    reduced.width = block.name == BlockName::Handcrafted ? block.width : out.projector(block.name)->rank;
    reduced.rows = std::move(rows);
    out.reduced.push_back(std::move(reduced));
  }
  return out;
}

DenseMatrix fused_matrix(const FusionArtifacts& fusion, std::span<const BlockName> layout,
                         std::span<const std::size_t> rows, bool normalize) {
  std::vector<const DenseRows*> sources;
  std::size_t width = 0;
  for (BlockName name : layout) {
    const auto* block = fusion.find(name);
    if (block == nullptr) throw MissingResource("feature block '" + std::string(block_name(name)) + "' is not available");
    sources.push_back(&std::get<DenseRows>(block->rows));
    width += block->width;
  }
  DenseMatrix m(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<BlockVector> parts;
    for (std::size_t b = 0; b < layout.size(); ++b) parts.push_back({layout[b], (*sources[b])[rows[i]]});
    const auto fused = fuse(layout, parts, normalize);
    std::copy(fused.values.begin(), fused.values.end(), m.row(i).begin());
  }
  return m;
}

std::size_t TrainedModel::width() const {
  return std::visit(
      [](const auto& m) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, gbdt::GbdtModel>) {
          return m.num_features;
        } else {
          return m.weights.size();
        }
      },
      model);
}

double TrainedModel::predict(std::span<const double> x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

gbdt::GbdtConfig gbdt_config_for(const SchemeId& scheme, const RunConfig& config, std::uint64_t seed) {
  gbdt::GbdtConfig g = config.gbdt;
  g.seed = derive_seed(seed, SeedStream::Gbdt);
  if (scheme.model == ModelChoice::GbdtPlain) {
    g.goss_enabled = false;
    g.efb_enabled = false;
  }
  return g;
}

SchemeResult run_scheme(const EventFeatures& features, const FusionArtifacts& fusion, const SchemeId& scheme,
                        const RunConfig& config, std::uint64_t seed) {
  SchemeResult out;
  out.model.scheme = scheme;
  out.model.layout = effective_layout(scheme, config);
  const auto x_train = fused_matrix(fusion, out.model.layout, features.train_rows, config.fusion.normalize);
  const auto x_test = fused_matrix(fusion, out.model.layout, features.test_rows, config.fusion.normalize);
  std::vector<int> y_train;
  std::vector<int> y_test;
  for (std::size_t r : features.train_rows) y_train.push_back(features.labels[r]);
  for (std::size_t r : features.test_rows) y_test.push_back(features.labels[r]);

  if (scheme.model == ModelChoice::LogReg) {
    auto lc = config.linear;
    lc.seed = derive_seed(seed, SeedStream::Linear);
    out.model.model = linear::lr_train(x_train, y_train, lc);
  } else {
    out.model.model = gbdt::train(gbdt_config_for(scheme, config, seed), x_train, y_train);
  }
  out.test_scores.resize(x_test.rows);
  for (std::size_t i = 0; i < x_test.rows; ++i) out.test_scores[i] = out.model.predict(x_test.row(i));

  const auto acc = accuracy(out.test_scores, y_test);
  out.report.event = features.event;
  out.report.scheme = scheme;
  out.report.accuracy = acc.accuracy;
  out.report.confusion = acc.confusion;
  out.report.auc = auc(out.test_scores, y_test);
  out.report.seed = seed;
  out.report.config_digest = config_digest(config);
  return out;
}

EvalReport run_scheme(const Resources& resources, const std::string& event, const SchemeId& scheme,
                      const RunConfig& config, std::uint64_t seed) {
  RunConfig single = config;
  single.schemes = {scheme};
  if (scheme.needs_embeddings() && !resources.embeddings) {
    throw MissingResource("scheme " + scheme.name() + " needs word embeddings, which are not loaded");
  }
  if (scheme.needs_images() && !resources.images) {
    throw MissingResource("scheme " + scheme.name() + " needs image features, which are not loaded");
  }
  const auto features = featurize_event(resources, event, single, seed);
  const auto fusion = fit_fusion(features, single, seed);
  auto report = run_scheme(features, fusion, scheme, single, seed).report;
  report.config_digest = config_digest(config);
  return report;
}

FeaturePipeline make_feature_pipeline(const EventFeatures& features, const FusionArtifacts& fusion,
                                      const RunConfig& config, const StopwordSet& stopwords) {
  FeaturePipeline p;
  p.event = features.event;
  p.text = config.text;
  p.normalize = config.fusion.normalize;
  p.stopwords.assign(stopwords.begin(), stopwords.end());
  std::sort(p.stopwords.begin(), p.stopwords.end());
  p.vocab = features.vocab;
  p.projectors = fusion.projectors;
  p.standardizer = fusion.standardizer;
  if (config.needs_embeddings()) p.embeddings_path = fs::absolute(config.paths.embeddings);
  if (config.needs_images()) p.image_features_path = fs::absolute(config.paths.image_features);
  return p;
}

std::string serialize_feature_pipeline(const FeaturePipeline& p) {
  json j;
  j["format"] = kPipelineFormat;
  j["version"] = kFormatVersion;
  j["event"] = p.event;
  j["tf_mode"] = p.text.tf_mode == TfMode::RawCount ? "raw_count" : "length_normalized";
  j["log_base"] = p.text.log_base;
  j["handcrafted"] = p.text.handcrafted;
  j["normalize"] = p.normalize;
  j["stopwords"] = p.stopwords;
  j["vocabulary"] = vocab_to_json(p.vocab);
  auto projectors = json::array();
  for (const auto& proj : p.projectors) projectors.push_back(json::parse(serialize_projector(proj)));
  j["projectors"] = std::move(projectors);
  if (p.standardizer) {
    j["standardizer"] = {{"mean", p.standardizer->mean}, {"scale", p.standardizer->scale}};
  } else {
    j["standardizer"] = nullptr;
  }
  j["embeddings_path"] = p.embeddings_path.string();
  j["image_features_path"] = p.image_features_path.string();
  return j.dump() + "\n";
}

FeaturePipeline parse_feature_pipeline(std::string_view text) {
  try {
    const auto j = json::parse(text);
    if (j.at("format").get<std::string>() != kPipelineFormat) throw ParseError("not a feature pipeline file");
    if (j.at("version").get<int>() != kFormatVersion) throw ParseError("unsupported feature pipeline version");
    FeaturePipeline p;
    p.event = j.at("event").get<std::string>();
    const auto mode = j.at("tf_mode").get<std::string>();
    if (mode != "raw_count" && mode != "length_normalized") throw ParseError("unknown tf_mode '" + mode + "'");
    p.text.tf_mode = mode == "raw_count" ? TfMode::RawCount : TfMode::LengthNormalized;
    p.text.log_base = j.at("log_base").get<double>();
    p.text.handcrafted = j.at("handcrafted").get<bool>();
    p.normalize = j.at("normalize").get<bool>();
    p.stopwords = j.at("stopwords").get<std::vector<std::string>>();
    p.vocab = vocab_from_json(j.at("vocabulary"));
    for (const auto& proj : j.at("projectors")) p.projectors.push_back(parse_projector(proj.dump()));
    if (!j.at("standardizer").is_null()) {
      Standardizer s;
      s.mean = j["standardizer"].at("mean").get<std::vector<double>>();
      s.scale = j["standardizer"].at("scale").get<std::vector<double>>();
      if (s.mean.size() != s.scale.size()) throw ParseError("standardizer mean/scale length mismatch");
      p.standardizer = std::move(s);
    }
    p.embeddings_path = j.at("embeddings_path").get<std::string>();
    p.image_features_path = j.at("image_features_path").get<std::string>();
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed feature pipeline: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("malformed feature pipeline: ") + e.what());
  }
}

std::string serialize_trained_model(const TrainedModel& model, const std::string& event,
                                    const std::string& features_file) {
  json j;
  j["format"] = kSchemeModelFormat;
  j["version"] = kFormatVersion;
  j["event"] = event;
  j["scheme"] = model.scheme.name();
  j["features"] = features_file;
  auto layout = json::array();
  for (auto b : model.layout) layout.push_back(block_name(b));
  j["layout"] = std::move(layout);
  j["model"] = std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, gbdt::GbdtModel>) {
          return json::parse(gbdt::serialize_model(m));
        } else {
          return json::parse(linear::serialize_model(m));
        }
      },
      model.model);
  return j.dump() + "\n";
}

SavedModel parse_trained_model(std::string_view text) {
  try {
    const auto j = json::parse(text);
    if (j.at("format").get<std::string>() != kSchemeModelFormat) throw ParseError("not a scheme model file");
    if (j.at("version").get<int>() != kFormatVersion) throw ParseError("unsupported scheme model version");
    SavedModel s;
    s.event = j.at("event").get<std::string>();
    s.features_file = j.at("features").get<std::string>();
    try {
      s.model.scheme = parse_scheme(j.at("scheme").get<std::string>());
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what());
    }
    for (const auto& b : j.at("layout")) {
      const auto name = parse_block_name(b.get<std::string>());
      if (!name) throw ParseError("unknown block '" + b.get<std::string>() + "'");
      s.model.layout.push_back(*name);
    }
    const auto model_text = j.at("model").dump();
    if (s.model.scheme.model == ModelChoice::LogReg) {
      s.model.model = linear::parse_model(model_text);
    } else {
      s.model.model = gbdt::parse_model(model_text);
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed scheme model: ") + e.what());
  }
}

std::vector<FusedVector> fuse_posts(const FeaturePipeline& pipeline, std::span<const Post> posts,
                                    std::span<const BlockName> layout, const EmbeddingTable* embeddings,
                                    const ImageFeatureTable* images) {
  const StopwordSet stopwords(pipeline.stopwords.begin(), pipeline.stopwords.end());
  RawRowContext ctx;
  ctx.vocab = &pipeline.vocab;
  ctx.tfidf = TfidfOptions{pipeline.text.tf_mode, pipeline.text.log_base};
  ctx.embeddings = embeddings;
  ctx.images = images;
  for (BlockName name : layout) {
    if (name == BlockName::Embed && embeddings == nullptr) throw MissingResource("model needs word embeddings");
    if (name == BlockName::Image && images == nullptr) throw MissingResource("model needs image features");
  }
  std::vector<FusedVector> out;
  out.reserve(posts.size());
  for (const auto& post : posts) {
    const auto doc = preprocess(post, stopwords);
    std::vector<BlockVector> parts;
    for (BlockName name : layout) {
      FeatureBlock block = empty_block(name, ctx);
      append_raw_rows(name, post, doc, ctx, block, nullptr);
      const auto values = std::visit(
          [&](const auto& rows) { return reduce(pipeline.projectors, pipeline.standardizer, name, rows.front()); },
          block.rows);
      parts.push_back({name, values});
    }
    out.push_back(fuse(layout, parts, pipeline.normalize));
  }
  return out;
}

}  // namespace relevancy
