#include "relevancy/relevancy.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "common.h"
#include "config.h"
#include "experiment.h"
#include "fixtures.h"
#include "gbdt.h"
#include "metrics.h"
#include "parallel.h"

struct rlv_config {
  relevancy::RunConfig config;
};

struct rlv_run_result {
  relevancy::RunOutcome outcome;
  std::vector<std::string> scheme_names;
  std::string table;
  std::string report_path;
  std::string table_path;
};

struct rlv_gbdt_model {
  relevancy::gbdt::GbdtModel model;
};

namespace {

thread_local std::string last_error;

template <typename F>
rlv_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return RLV_OK;
  } catch (const relevancy::ConfigError& e) {
    last_error = e.what();
    return RLV_ERR_INVALID_CONFIG;
  } catch (const relevancy::MissingResource& e) {
    last_error = e.what();
    return RLV_ERR_MISSING_RESOURCE;
  } catch (const relevancy::InvalidArgument& e) {
    last_error = e.what();
    return RLV_ERR_INVALID_ARGUMENT;
  } catch (const relevancy::ParseError& e) {
    last_error = e.what();
    return RLV_ERR_PARSE;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RLV_ERR_RUNTIME;
  } catch (...) {
    last_error = "unknown error";
    return RLV_ERR_RUNTIME;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw relevancy::InvalidArgument(std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> collect(const char* const* items, std::size_t n) {
  if (n > 0) require(items, "overrides");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    require(items[i], "override");
    out.emplace_back(items[i]);
  }
  return out;
}

void copy_counters(const relevancy::CacheCounters& from, rlv_cache_stats* to) {
  if (to == nullptr) return;
  to->hits = from.hits;
  to->misses = from.misses;
  to->corrupt = from.corrupt;
}

relevancy::DenseMatrix to_matrix(const double* x, std::size_t rows, std::size_t cols) {
  if (rows > 0 && cols > 0) require(x, "x");
  relevancy::DenseMatrix m(rows, cols);
  if (rows > 0 && cols > 0) std::memcpy(m.data.data(), x, rows * cols * sizeof(double));
  return m;
}

}  // namespace

extern "C" {

const char* rlv_version(void) { return "1.0.0"; }

const char* rlv_last_error(void) { return last_error.c_str(); }

void rlv_string_free(char* s) { std::free(s); }

rlv_status rlv_set_threads(int n) {
  return guarded([&] {
    if (n < 0) throw relevancy::InvalidArgument("thread count must be >= 0");
    relevancy::set_num_threads(n);
  });
}

rlv_status rlv_config_load(const char* path, const char* const* overrides, size_t n_overrides, rlv_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    const auto o = collect(overrides, n_overrides);
    *out = new rlv_config{relevancy::load_config(path, o)};
  });
}

rlv_status rlv_config_default(const char* const* overrides, size_t n_overrides, rlv_config** out) {
  return guarded([&] {
    require(out, "out");
    const auto o = collect(overrides, n_overrides);
    *out = new rlv_config{relevancy::default_config(o)};
  });
}

rlv_status rlv_config_dump(const rlv_config* config, char** yaml_out) {
  return guarded([&] {
    require(config, "config");
    require(yaml_out, "yaml_out");
    *yaml_out = dup_string(relevancy::dump_config(config->config));
  });
}

rlv_status rlv_config_threads(const rlv_config* config, int* out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = config->config.threads;
  });
}

void rlv_config_free(rlv_config* config) { delete config; }

rlv_status rlv_run(const rlv_config* config, rlv_run_result** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    auto result = std::make_unique<rlv_run_result>();
    result->outcome = relevancy::run_experiment(config->config);
    for (const auto& r : result->outcome.reports) result->scheme_names.push_back(r.scheme.name());
    result->table = relevancy::read_file(result->outcome.report_txt);
    result->report_path = result->outcome.report_tsv.string();
    result->table_path = result->outcome.report_txt.string();
    *out = result.release();
  });
}

size_t rlv_run_report_count(const rlv_run_result* result) {
  return result == nullptr ? 0 : result->outcome.reports.size();
}

rlv_status rlv_run_report(const rlv_run_result* result, size_t index, rlv_report* out) {
  return guarded([&] {
    require(result, "result");
    require(out, "out");
    if (index >= result->outcome.reports.size()) throw relevancy::InvalidArgument("report index out of range");
    const auto& r = result->outcome.reports[index];
    out->event = r.event.c_str();
    out->scheme = result->scheme_names[index].c_str();
    out->accuracy = r.accuracy;
    out->auc = r.auc;
    out->confusion = {r.confusion.tp, r.confusion.fp, r.confusion.tn, r.confusion.fn};
    out->seed = r.seed;
  });
}

size_t rlv_run_failure_count(const rlv_run_result* result) {
  return result == nullptr ? 0 : result->outcome.failures.size();
}

const char* rlv_run_failure(const rlv_run_result* result, size_t index) {
  if (result == nullptr || index >= result->outcome.failures.size()) return nullptr;
  return result->outcome.failures[index].c_str();
}

const char* rlv_run_table(const rlv_run_result* result) { return result == nullptr ? nullptr : result->table.c_str(); }

const char* rlv_run_report_path(const rlv_run_result* result) {
  return result == nullptr ? nullptr : result->report_path.c_str();
}

const char* rlv_run_table_path(const rlv_run_result* result) {
  return result == nullptr ? nullptr : result->table_path.c_str();
}

void rlv_run_cache_stats(const rlv_run_result* result, rlv_cache_stats* features, rlv_cache_stats* fusion) {
  if (result == nullptr) return;
  copy_counters(result->outcome.features_cache, features);
  copy_counters(result->outcome.fusion_cache, fusion);
}

void rlv_run_result_free(rlv_run_result* result) { delete result; }

rlv_status rlv_featurize(const rlv_config* config, rlv_cache_stats* features, rlv_cache_stats* fusion) {
  return guarded([&] {
    require(config, "config");
    const auto outcome = relevancy::featurize_experiment(config->config);
    copy_counters(outcome.features_cache, features);
    copy_counters(outcome.fusion_cache, fusion);
  });
}

rlv_status rlv_inspect(const char* model_path, const char* posts_path, const rlv_config* config, char** tsv_out) {
  return guarded([&] {
    require(model_path, "model_path");
    require(posts_path, "posts_path");
    require(tsv_out, "tsv_out");
    const auto rows = relevancy::inspect_model(model_path, posts_path, config == nullptr ? nullptr : &config->config);
    *tsv_out = dup_string(relevancy::format_inspection(rows));
  });
}

rlv_status rlv_make_fixtures(const char* out_dir, uint64_t seed, size_t posts, char** config_path_out) {
  return guarded([&] {
    require(out_dir, "out_dir");
    relevancy::FixtureOptions options;
    options.seed = seed;
    options.posts = posts;
    const auto paths = relevancy::make_fixtures(out_dir, options);
    if (config_path_out != nullptr) *config_path_out = dup_string(paths.config.string());
  });
}

rlv_status rlv_auc(const double* scores, const int* labels, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) {
      require(scores, "scores");
      require(labels, "labels");
    }
    *out = relevancy::auc({scores, n}, {labels, n});
  });
}

rlv_status rlv_accuracy(const double* scores, const int* labels, size_t n, double threshold, double* out,
                        rlv_confusion* counts) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) {
      require(scores, "scores");
      require(labels, "labels");
    }
    const auto r = relevancy::accuracy({scores, n}, {labels, n}, threshold);
    *out = r.accuracy;
    if (counts != nullptr) *counts = {r.confusion.tp, r.confusion.fp, r.confusion.tn, r.confusion.fn};
  });
}

void rlv_gbdt_params_default(rlv_gbdt_params* params) {
  if (params == nullptr) return;
  const relevancy::gbdt::GbdtConfig c;
  *params = {c.n_trees,          c.learning_rate,         c.num_leaves,        c.min_data_in_leaf,
             c.max_bins,         c.goss_enabled ? 1 : 0,  c.goss_top_rate,     c.goss_other_rate,
             c.efb_enabled ? 1 : 0, c.efb_max_conflict_rate, c.lambda_l2, c.min_sum_hessian_in_leaf,
             c.seed};
}

rlv_status rlv_gbdt_train(const rlv_gbdt_params* params, const double* x, size_t rows, size_t cols,
                          const int* labels, rlv_gbdt_model** out) {
  return guarded([&] {
    require(params, "params");
    require(out, "out");
    if (rows > 0) require(labels, "labels");
    relevancy::gbdt::GbdtConfig c;
    c.n_trees = params->n_trees;
    c.learning_rate = params->learning_rate;
    c.num_leaves = params->num_leaves;
    c.min_data_in_leaf = params->min_data_in_leaf;
    c.max_bins = params->max_bins;
    c.goss_enabled = params->goss_enabled != 0;
    c.goss_top_rate = params->goss_top_rate;
    c.goss_other_rate = params->goss_other_rate;
    c.efb_enabled = params->efb_enabled != 0;
    c.efb_max_conflict_rate = params->efb_max_conflict_rate;
    c.lambda_l2 = params->lambda_l2;
    c.min_sum_hessian_in_leaf = params->min_sum_hessian_in_leaf;
    c.seed = params->seed;
    const auto m = to_matrix(x, rows, cols);
    *out = new rlv_gbdt_model{relevancy::gbdt::train(c, m, {labels, rows})};
  });
}

rlv_status rlv_gbdt_predict(const rlv_gbdt_model* model, const double* x, size_t rows, size_t cols, double* out) {
  return guarded([&] {
    require(model, "model");
    if (rows > 0) require(out, "out");
    const auto m = to_matrix(x, rows, cols);
    for (std::size_t i = 0; i < rows; ++i) out[i] = model->model.predict(m.row(i));
  });
}

rlv_status rlv_gbdt_save(const rlv_gbdt_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    relevancy::write_file(path, relevancy::gbdt::serialize_model(model->model));
  });
}

rlv_status rlv_gbdt_load(const char* path, rlv_gbdt_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new rlv_gbdt_model{relevancy::gbdt::parse_model(relevancy::read_file(path))};
  });
}

void rlv_gbdt_free(rlv_gbdt_model* model) { delete model; }

}  // extern "C"
