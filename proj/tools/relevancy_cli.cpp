// Command-line front end over the C interface.
//
//   relevancy-cli run [--config FILE] [--threads N] [--seed S] [--seeds A,B]
//                     [--out DIR] [--set key=value]... [--dump-config]
//   relevancy-cli featurize [same options]
//   relevancy-cli inspect --model FILE --posts FILE [--config FILE]
//   relevancy-cli make-fixtures --out DIR [--seed S] [--posts N]
//
// Exit codes: 0 success, 1 runtime failure, 2 invalid config or usage,
// 3 missing resource.

#include <relevancy/relevancy.h>

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitMissing = 3;

int exit_code(rlv_status status) {
  switch (status) {
    case RLV_OK: return 0;
    case RLV_ERR_INVALID_CONFIG: return kExitConfig;
    case RLV_ERR_MISSING_RESOURCE: return kExitMissing;
    default: return kExitRuntime;
  }
}

int report_failure(rlv_status status) {
  std::cerr << "error: " << rlv_last_error() << '\n';
  return exit_code(status);
}

// YAML single-quoted scalar.
std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

struct CommonOptions {
  std::string config;
  std::optional<int> threads;
  std::optional<unsigned long long> seed;
  std::vector<unsigned long long> seeds;
  std::string out;
  std::vector<std::string> sets;
  bool dump = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Experiment config (default: $RELEVANCY_CONFIG)");
  cmd->add_option("--threads", o.threads, "Worker threads; 0 uses every core")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--seeds", o.seeds, "Evaluate once per seed and report mean ± sd")->delimiter(',');
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--set", o.sets, "Override a config value, e.g. gbdt.n_trees=50");
  cmd->add_flag("--dump-config", o.dump, "Print the effective config and exit");
}

struct ConfigHandle {
  rlv_config* ptr = nullptr;
  ~ConfigHandle() { rlv_config_free(ptr); }
};

rlv_status load(const CommonOptions& o, ConfigHandle& handle) {
  std::vector<std::string> overrides = o.sets;
  if (o.seed) overrides.push_back("seed=" + std::to_string(*o.seed));
  if (!o.seeds.empty()) {
    std::string list = "seeds=[";
    for (std::size_t i = 0; i < o.seeds.size(); ++i) list += (i ? "," : "") + std::to_string(o.seeds[i]);
    overrides.push_back(list + "]");
  }
  if (!o.out.empty()) {
    overrides.push_back("paths.output_dir=" + quote(std::filesystem::absolute(o.out).string()));
  }
  if (o.threads) overrides.push_back("threads=" + std::to_string(*o.threads));
  std::vector<const char*> raw;
  for (const auto& s : overrides) raw.push_back(s.c_str());

  std::string path = o.config;
  if (path.empty()) {
    if (const char* env = std::getenv("RELEVANCY_CONFIG")) path = env;
  }
  if (path.empty()) return rlv_config_default(raw.data(), raw.size(), &handle.ptr);
  return rlv_config_load(path.c_str(), raw.data(), raw.size(), &handle.ptr);
}

int apply_threads(const ConfigHandle& handle) {
  int threads = 0;
  rlv_status s = rlv_config_threads(handle.ptr, &threads);
  if (s == RLV_OK) s = rlv_set_threads(threads);
  return s == RLV_OK ? 0 : report_failure(s);
}

int dump(const ConfigHandle& handle) {
  char* yaml = nullptr;
  const rlv_status s = rlv_config_dump(handle.ptr, &yaml);
  if (s != RLV_OK) return report_failure(s);
  std::cout << yaml;
  rlv_string_free(yaml);
  return 0;
}

void print_cache(const char* label, const rlv_cache_stats& s, std::ostream& out) {
  out << label << ": " << s.hits << " hit, " << s.misses << " miss";
  if (s.corrupt > 0) out << ", " << s.corrupt << " corrupted (regenerated)";
  out << '\n';
}

int cmd_run(const CommonOptions& o) {
  ConfigHandle handle;
  if (const auto s = load(o, handle); s != RLV_OK) return report_failure(s);
  if (o.dump) return dump(handle);
  if (const int rc = apply_threads(handle)) return rc;
  rlv_run_result* result = nullptr;
  if (const auto s = rlv_run(handle.ptr, &result); s != RLV_OK) return report_failure(s);
  std::cout << rlv_run_table(result);
  std::cout << "\nreport: " << rlv_run_report_path(result) << '\n';
  rlv_cache_stats features{};
  rlv_cache_stats fusion{};
  rlv_run_cache_stats(result, &features, &fusion);
  print_cache("feature cache", features, std::cerr);
  print_cache("fusion cache", fusion, std::cerr);
  const std::size_t failures = rlv_run_failure_count(result);
  for (std::size_t i = 0; i < failures; ++i) std::cerr << "error: " << rlv_run_failure(result, i) << '\n';
  rlv_run_result_free(result);
  return failures == 0 ? 0 : kExitRuntime;
}

int cmd_featurize(const CommonOptions& o) {
  ConfigHandle handle;
  if (const auto s = load(o, handle); s != RLV_OK) return report_failure(s);
  if (o.dump) return dump(handle);
  if (const int rc = apply_threads(handle)) return rc;
  rlv_cache_stats features{};
  rlv_cache_stats fusion{};
  if (const auto s = rlv_featurize(handle.ptr, &features, &fusion); s != RLV_OK) return report_failure(s);
  print_cache("feature cache", features, std::cout);
  print_cache("fusion cache", fusion, std::cout);
  return 0;
}

int cmd_inspect(const std::string& model, const std::string& posts, const CommonOptions& o) {
  ConfigHandle handle;
  if (!o.config.empty() || !o.sets.empty()) {
    if (const auto s = load(o, handle); s != RLV_OK) return report_failure(s);
  }
  if (o.threads) rlv_set_threads(*o.threads);
  char* tsv = nullptr;
  if (const auto s = rlv_inspect(model.c_str(), posts.c_str(), handle.ptr, &tsv); s != RLV_OK) {
    return report_failure(s);
  }
  std::cout << tsv;
  rlv_string_free(tsv);
  return 0;
}

int cmd_make_fixtures(const std::string& out, unsigned long long seed, std::size_t posts) {
  char* config = nullptr;
  if (const auto s = rlv_make_fixtures(out.c_str(), seed, posts, &config); s != RLV_OK) return report_failure(s);
  std::cout << "wrote fixtures; config: " << config << '\n';
  rlv_string_free(config);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal relevancy classification experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rlv_version());

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Evaluate the configured schemes and write reports");
  add_common(run, run_opts);

  CommonOptions feat_opts;
  auto* featurize = app.add_subcommand("featurize", "Build cached feature blocks and projections");
  add_common(featurize, feat_opts);

  CommonOptions inspect_opts;
  std::string model;
  std::string posts;
  auto* inspect = app.add_subcommand("inspect", "Score posts with a saved model");
  inspect->add_option("--model", model, "Saved scheme model (models/<event>/<scheme>.json)")->required();
  inspect->add_option("--posts", posts, "Posts file in corpus format")->required();
  inspect->add_option("--config", inspect_opts.config, "Config supplying resource paths");
  inspect->add_option("--set", inspect_opts.sets, "Override a config value");
  inspect->add_option("--threads", inspect_opts.threads, "Worker threads")->check(CLI::NonNegativeNumber);

  std::string fixture_out;
  unsigned long long fixture_seed = 7;
  std::size_t fixture_posts = 2000;
  auto* fixtures = app.add_subcommand("make-fixtures", "Write the synthetic multimodal dataset");
  fixtures->add_option("--out", fixture_out, "Output directory")->required();
  fixtures->add_option("--seed", fixture_seed, "Generator seed");
  fixtures->add_option("--posts", fixture_posts, "Number of posts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (*run) return cmd_run(run_opts);
  if (*featurize) return cmd_featurize(feat_opts);
  if (*inspect) return cmd_inspect(model, posts, inspect_opts);
  if (*fixtures) return cmd_make_fixtures(fixture_out, fixture_seed, fixture_posts);
  return kExitConfig;
}
