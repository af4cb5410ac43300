#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cache.h"
#include "config.h"
#include "report.h"

namespace relevancy {

struct RunOutcome {
  std::vector<EvalReport> reports;
  // One entry per scheme that could not be evaluated.
  std::vector<std::string> failures;
  CacheCounters features_cache;
  CacheCounters fusion_cache;
  std::filesystem::path report_tsv;
  std::filesystem::path report_txt;
  std::filesystem::path scores_tsv;
};

// Evaluates every configured scheme for every event and seed, then writes
// reports/report.tsv, report.txt, scores.tsv and the effective config.yaml
// (plus models/ when enabled) under the output directory. Missing inputs
// throw before any file is written; a failing scheme is recorded and the
// rest still run.
RunOutcome run_experiment(const RunConfig& config);

struct FeaturizeOutcome {
  std::vector<std::string> events;
  CacheCounters features_cache;
  CacheCounters fusion_cache;
  std::filesystem::path cache_dir;
};

// Builds (or validates) the cached feature blocks and fitted projections.
FeaturizeOutcome featurize_experiment(const RunConfig& config);

struct InspectRow {
  std::string post_id;
  double score = 0.0;
  std::vector<std::pair<BlockName, double>> block_norms;
};

// Scores the posts in `posts_path` with a saved scheme model. Resource paths
// come from the saved pipeline unless `config` supplies them.
std::vector<InspectRow> inspect_model(const std::filesystem::path& model_path, const std::filesystem::path& posts_path,
                                      const RunConfig* config = nullptr);
std::string format_inspection(std::span<const InspectRow> rows);

// Directory-safe form of an event name.
std::string path_component(std::string_view name);

}  // namespace relevancy
