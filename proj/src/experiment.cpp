#include "experiment.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "common.h"
#include "pipeline.h"

namespace relevancy {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> selected_events(const RunConfig& config, const Corpus& corpus) {
  const auto present = corpus.events();
  if (config.events.empty()) return present;
  for (const auto& e : config.events) {
    if (std::find(present.begin(), present.end(), e) == present.end()) {
      throw ConfigError("config: event '" + e + "' does not occur in " + config.paths.corpus.string());
    }
  }
  return config.events;
}

struct EventArtifacts {
  EventFeatures features;
  FusionArtifacts fusion;
};

EventArtifacts prepare_event(const Resources& resources, const std::string& event, const RunConfig& config,
                             std::uint64_t seed, FeatureCache& cache) {
  const auto fkey = features_cache_key(resources, event, config, seed);
  const auto ukey = fusion_cache_key(fkey, config);
  EventArtifacts a;
  if (auto cached = cache.load_features(fkey)) {
    a.features = std::move(*cached);
  } else {
    a.features = featurize_event(resources, event, config, seed);
    cache.store_features(fkey, a.features);
  }
  if (auto cached = cache.load_fusion(ukey)) {
    a.fusion = std::move(*cached);
  } else {
    a.fusion = fit_fusion(a.features, config, seed);
    cache.store_fusion(ukey, a.fusion);
  }
  return a;
}

fs::path model_dir(const RunConfig& config, const std::string& event, std::uint64_t seed) {
  fs::path dir = config.paths.output_dir / "models";
  if (config.run_seeds().size() > 1) dir /= "seed-" + std::to_string(seed);
  return dir / path_component(event);
}

}  // namespace

std::string path_component(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                      c == '_' || c == '.' || c == '+';
    out += keep ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

RunOutcome run_experiment(const RunConfig& config) {
  const Resources resources = load_resources(config);
  const auto events = selected_events(config, resources.corpus);
  FeatureCache cache(config.paths.output_dir / "cache", config.cache);
  RunOutcome out;
  std::string scores = "event\tscheme\tseed\tpost_id\tlabel\tscore\n";

  for (std::uint64_t seed : config.run_seeds()) {
    for (const auto& event : events) {
      EventArtifacts a;
      try {
        a = prepare_event(resources, event, config, seed, cache);
      } catch (const ConfigError&) {
        throw;
      } catch (const MissingResource&) {
        throw;
      } catch (const Error& e) {
        for (const auto& s : config.schemes) {
          out.failures.push_back(event + " " + s.name() + " seed " + std::to_string(seed) + ": " + e.what());
        }
        continue;
      }
      const fs::path dir = model_dir(config, event, seed);
      if (config.save_models) {
        write_file(dir / "features.json",
                   serialize_feature_pipeline(make_feature_pipeline(a.features, a.fusion, config, resources.stopwords)));
      }
      for (const auto& scheme : config.schemes) {
        try {
          auto result = run_scheme(a.features, a.fusion, scheme, config, seed);
          for (std::size_t i = 0; i < a.features.test_rows.size(); ++i) {
            const auto r = a.features.test_rows[i];
            scores += event + '\t' + scheme.name() + '\t' + std::to_string(seed) + '\t' + a.features.post_ids[r] +
                      '\t' + std::to_string(a.features.labels[r]) + '\t' + format_double(result.test_scores[i]) + '\n';
          }
          if (config.save_models) {
            write_file(dir / (scheme.name() + ".json"), serialize_trained_model(result.model, event, "features.json"));
          }
          out.reports.push_back(std::move(result.report));
        } catch (const MissingResource&) {
          throw;
        } catch (const Error& e) {
          out.failures.push_back(event + " " + scheme.name() + " seed " + std::to_string(seed) + ": " + e.what());
        }
      }
    }
  }

  const fs::path reports = config.paths.output_dir / "reports";
  out.report_tsv = reports / "report.tsv";
  out.report_txt = reports / "report.txt";
  out.scores_tsv = reports / "scores.tsv";
  write_file(out.report_tsv, report_tsv(out.reports));
  std::string table = report_table(out.reports);
  if (!out.failures.empty()) {
    table += "\nFailed:\n";
    for (const auto& f : out.failures) table += "  " + f + "\n";
  }
  write_file(out.report_txt, table);
  write_file(out.scores_tsv, scores);
  write_file(reports / "config.yaml", dump_config(config));
  out.features_cache = cache.features_counters();
  out.fusion_cache = cache.fusion_counters();
  return out;
}

FeaturizeOutcome featurize_experiment(const RunConfig& config) {
  const Resources resources = load_resources(config);
  FeaturizeOutcome out;
  out.events = selected_events(config, resources.corpus);
  out.cache_dir = config.paths.output_dir / "cache";
  FeatureCache cache(out.cache_dir, true);
  for (std::uint64_t seed : config.run_seeds()) {
    for (const auto& event : out.events) prepare_event(resources, event, config, seed, cache);
  }
  out.features_cache = cache.features_counters();
  out.fusion_cache = cache.fusion_counters();
  return out;
}

std::vector<InspectRow> inspect_model(const fs::path& model_path, const fs::path& posts_path, const RunConfig* config) {
  const auto saved = parse_trained_model(read_file(model_path));
  const auto pipeline = parse_feature_pipeline(read_file(model_path.parent_path() / saved.features_file));
  const Corpus posts = load_corpus(posts_path);

  const auto& layout = saved.model.layout;
  const bool wants_embed = std::find(layout.begin(), layout.end(), BlockName::Embed) != layout.end();
  const bool wants_image = std::find(layout.begin(), layout.end(), BlockName::Image) != layout.end();
  std::optional<EmbeddingTable> embeddings;
  std::optional<ImageFeatureTable> images;
  if (wants_embed) {
    fs::path p = config != nullptr && !config->paths.embeddings.empty() ? config->paths.embeddings : pipeline.embeddings_path;
    if (p.empty() || !fs::exists(p)) throw MissingResource("embeddings not found: " + p.string());
    const StopwordSet stopwords(pipeline.stopwords.begin(), pipeline.stopwords.end());
    std::unordered_set<std::string> keep;
    for (const auto& post : posts.posts()) {
      for (auto& t : preprocess(post, stopwords).tokens) keep.insert(std::move(t));
    }
    embeddings = load_embeddings(p, &keep);
  }
  if (wants_image) {
    fs::path p = config != nullptr && !config->paths.image_features.empty() ? config->paths.image_features
                                                                             : pipeline.image_features_path;
    if (p.empty() || !fs::exists(p)) throw MissingResource("image features not found: " + p.string());
    images = load_image_features(p);
  }

  const auto fused = fuse_posts(pipeline, posts.posts(), layout, embeddings ? &*embeddings : nullptr,
                                images ? &*images : nullptr);
  std::vector<InspectRow> rows;
  for (std::size_t i = 0; i < fused.size(); ++i) {
    if (fused[i].values.size() != saved.model.width()) {
      throw InvalidArgument("inspect: features have width " + std::to_string(fused[i].values.size()) +
                            " but the model expects " + std::to_string(saved.model.width()));
    }
    InspectRow row;
    row.post_id = posts.posts()[i].post_id;
    row.score = saved.model.predict(fused[i].values);
    for (const auto& span : fused[i].layout) {
      double ss = 0.0;
      for (double v : fused[i].block(span.name)) ss += v * v;
      row.block_norms.emplace_back(span.name, std::sqrt(ss));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_inspection(std::span<const InspectRow> rows) {
  std::string out = "post_id\tscore";
  if (!rows.empty()) {
    for (const auto& [name, norm] : rows.front().block_norms) out += "\t" + std::string(block_name(name)) + "_l2";
  }
  out += '\n';
  for (const auto& r : rows) {
    out += r.post_id + '\t' + format_double(r.score);
    for (const auto& [name, norm] : r.block_norms) out += '\t' + format_double(norm);
    out += '\n';
  }
  return out;
}

}  // namespace relevancy
