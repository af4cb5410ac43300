/* C interface to the relevancy classification library.
 *
 * Every function that can fail returns an rlv_status; on failure
 * rlv_last_error() describes the problem (thread-local, valid until the next
 * call on the same thread). Objects are opaque handles released with their
 * matching _free function. Strings returned through char** out-parameters are
 * owned by the caller and released with rlv_string_free.
 */
#ifndef RELEVANCY_RELEVANCY_H
#define RELEVANCY_RELEVANCY_H

#include <stddef.h>
#include <stdint.h>

#if defined(RELEVANCY_BUILDING_LIBRARY)
#define RLV_API __attribute__((visibility("default")))
#else
#define RLV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rlv_status {
  RLV_OK = 0,
  RLV_ERR_RUNTIME = 1,
  RLV_ERR_INVALID_CONFIG = 2,
  RLV_ERR_MISSING_RESOURCE = 3,
  RLV_ERR_INVALID_ARGUMENT = 4,
  RLV_ERR_PARSE = 5
} rlv_status;

typedef struct rlv_config rlv_config;
typedef struct rlv_run_result rlv_run_result;
typedef struct rlv_gbdt_model rlv_gbdt_model;

typedef struct rlv_confusion {
  size_t tp;
  size_t fp;
  size_t tn;
  size_t fn;
} rlv_confusion;

typedef struct rlv_report {
  const char* event;  /* owned by the run result */
  const char* scheme; /* owned by the run result */
  double accuracy;
  double auc;
  rlv_confusion confusion;
  uint64_t seed;
} rlv_report;

typedef struct rlv_cache_stats {
  size_t hits;
  size_t misses;
  size_t corrupt;
} rlv_cache_stats;

typedef struct rlv_gbdt_params {
  int n_trees;
  double learning_rate;
  int num_leaves;
  int min_data_in_leaf;
  int max_bins;
  int goss_enabled;
  double goss_top_rate;
  double goss_other_rate;
  int efb_enabled;
  double efb_max_conflict_rate;
  double lambda_l2;
  double min_sum_hessian_in_leaf;
  uint64_t seed;
} rlv_gbdt_params;

RLV_API const char* rlv_version(void);
RLV_API const char* rlv_last_error(void);
RLV_API void rlv_string_free(char* s);

/* Worker threads for data-parallel loops; 0 selects hardware concurrency.
 * Results do not depend on this value. */
RLV_API rlv_status rlv_set_threads(int n);

/* Configuration. Overrides are "dotted.key=value" strings. */
RLV_API rlv_status rlv_config_load(const char* path, const char* const* overrides, size_t n_overrides,
                                   rlv_config** out);
RLV_API rlv_status rlv_config_default(const char* const* overrides, size_t n_overrides, rlv_config** out);
RLV_API rlv_status rlv_config_dump(const rlv_config* config, char** yaml_out);
RLV_API rlv_status rlv_config_threads(const rlv_config* config, int* out);
RLV_API void rlv_config_free(rlv_config* config);

/* Runs every configured scheme and writes the report files. A run in which
 * some schemes failed still returns RLV_OK with the failures listed. */
RLV_API rlv_status rlv_run(const rlv_config* config, rlv_run_result** out);
RLV_API size_t rlv_run_report_count(const rlv_run_result* result);
RLV_API rlv_status rlv_run_report(const rlv_run_result* result, size_t index, rlv_report* out);
RLV_API size_t rlv_run_failure_count(const rlv_run_result* result);
RLV_API const char* rlv_run_failure(const rlv_run_result* result, size_t index);
RLV_API const char* rlv_run_table(const rlv_run_result* result);
RLV_API const char* rlv_run_report_path(const rlv_run_result* result);
RLV_API const char* rlv_run_table_path(const rlv_run_result* result);
RLV_API void rlv_run_cache_stats(const rlv_run_result* result, rlv_cache_stats* features, rlv_cache_stats* fusion);
RLV_API void rlv_run_result_free(rlv_run_result* result);

/* Builds or validates cached features; either stats pointer may be NULL. */
RLV_API rlv_status rlv_featurize(const rlv_config* config, rlv_cache_stats* features, rlv_cache_stats* fusion);

/* Scores posts with a saved scheme model; tsv_out receives one row per post
 * with the probability and per-block L2 magnitudes. config may be NULL. */
RLV_API rlv_status rlv_inspect(const char* model_path, const char* posts_path, const rlv_config* config,
                               char** tsv_out);

/* Writes the synthetic corpus, resources and config.yaml into out_dir. */
RLV_API rlv_status rlv_make_fixtures(const char* out_dir, uint64_t seed, size_t posts, char** config_path_out);

RLV_API rlv_status rlv_auc(const double* scores, const int* labels, size_t n, double* out);
RLV_API rlv_status rlv_accuracy(const double* scores, const int* labels, size_t n, double threshold, double* out,
                                rlv_confusion* counts);

/* Gradient-boosted trees on a row-major rows x cols matrix. */
RLV_API void rlv_gbdt_params_default(rlv_gbdt_params* params);
RLV_API rlv_status rlv_gbdt_train(const rlv_gbdt_params* params, const double* x, size_t rows, size_t cols,
                                  const int* labels, rlv_gbdt_model** out);
RLV_API rlv_status rlv_gbdt_predict(const rlv_gbdt_model* model, const double* x, size_t rows, size_t cols,
                                    double* out);
RLV_API rlv_status rlv_gbdt_save(const rlv_gbdt_model* model, const char* path);
RLV_API rlv_status rlv_gbdt_load(const char* path, rlv_gbdt_model** out);
RLV_API void rlv_gbdt_free(rlv_gbdt_model* model);

#ifdef __cplusplus
}
#endif

#endif /* RELEVANCY_RELEVANCY_H */
