#include <gtest/gtest.h>

#include <relevancy/relevancy.h>

#include <filesystem>
#include <string>
#include <vector>

#include "test_support.h"

using testing_support::Gen;
using testing_support::TempDir;

TEST(CApi, VersionAndThreads) {
  EXPECT_NE(std::string(rlv_version()), "");
  EXPECT_EQ(rlv_set_threads(2), RLV_OK);
  EXPECT_EQ(rlv_set_threads(-1), RLV_ERR_INVALID_ARGUMENT);
  EXPECT_NE(std::string(rlv_last_error()), "");
  EXPECT_EQ(rlv_set_threads(0), RLV_OK);
}

TEST(CApi, ConfigStatusCodes) {
  rlv_config* config = nullptr;
  const char* bad[] = {"gbdt.bogus=1"};
  EXPECT_EQ(rlv_config_default(bad, 1, &config), RLV_ERR_INVALID_CONFIG);
  EXPECT_EQ(config, nullptr);
  EXPECT_NE(std::string(rlv_last_error()).find("gbdt.bogus"), std::string::npos);

  const char* ok[] = {"threads=3"};
  ASSERT_EQ(rlv_config_default(ok, 1, &config), RLV_OK);
  int threads = 0;
  EXPECT_EQ(rlv_config_threads(config, &threads), RLV_OK);
  EXPECT_EQ(threads, 3);
  char* yaml = nullptr;
  ASSERT_EQ(rlv_config_dump(config, &yaml), RLV_OK);
  EXPECT_NE(std::string(yaml).find("threads: 3"), std::string::npos);
  rlv_string_free(yaml);
  rlv_config_free(config);

  EXPECT_EQ(rlv_config_load("/nonexistent/config.yaml", nullptr, 0, &config), RLV_ERR_INVALID_CONFIG);
  EXPECT_EQ(rlv_config_default(nullptr, 0, nullptr), RLV_ERR_INVALID_ARGUMENT);
}

TEST(CApi, Metrics) {
  const double scores[] = {0.8, 0.4, 0.3, 0.8};
  const int labels[] = {1, 1, 0, 0};
  double value = 0.0;
  ASSERT_EQ(rlv_auc(scores, labels, 4, &value), RLV_OK);
  EXPECT_EQ(value, 0.625);
  rlv_confusion counts{};
  ASSERT_EQ(rlv_accuracy(scores, labels, 4, 0.5, &value, &counts), RLV_OK);
  EXPECT_EQ(value, 0.5);
  EXPECT_EQ(counts.tp, 1u);
  EXPECT_EQ(counts.fp, 1u);
  const int same[] = {1, 1, 1, 1};
  EXPECT_EQ(rlv_auc(scores, same, 4, &value), RLV_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(rlv_auc(nullptr, labels, 4, &value), RLV_ERR_INVALID_ARGUMENT);
}

TEST(CApi, GbdtTrainPredictSaveLoad) {
  Gen gen(1);
  const std::size_t rows = 300, cols = 4;
  std::vector<double> x(rows * cols);
  std::vector<int> y(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) x[i * cols + j] = gen.range(-1, 1);
    y[i] = x[i * cols] + x[i * cols + 1] > 0 ? 1 : 0;
  }
  rlv_gbdt_params params;
  rlv_gbdt_params_default(&params);
  EXPECT_EQ(params.goss_top_rate, 0.2);
  params.n_trees = 40;
  rlv_gbdt_model* model = nullptr;
  ASSERT_EQ(rlv_gbdt_train(&params, x.data(), rows, cols, y.data(), &model), RLV_OK);
  std::vector<double> p(rows);
  ASSERT_EQ(rlv_gbdt_predict(model, x.data(), rows, cols, p.data()), RLV_OK);
  double auc = 0.0;
  ASSERT_EQ(rlv_auc(p.data(), y.data(), rows, &auc), RLV_OK);
  EXPECT_GT(auc, 0.95);
  EXPECT_EQ(rlv_gbdt_predict(model, x.data(), rows, cols + 1, p.data()), RLV_ERR_INVALID_ARGUMENT);

  TempDir dir;
  const auto path = (dir / "m.json").string();
  ASSERT_EQ(rlv_gbdt_save(model, path.c_str()), RLV_OK);
  rlv_gbdt_model* loaded = nullptr;
  ASSERT_EQ(rlv_gbdt_load(path.c_str(), &loaded), RLV_OK);
  std::vector<double> q(rows);
  ASSERT_EQ(rlv_gbdt_predict(loaded, x.data(), rows, cols, q.data()), RLV_OK);
  EXPECT_EQ(p, q);
  rlv_gbdt_free(loaded);
  rlv_gbdt_free(model);

  EXPECT_EQ(rlv_gbdt_load((dir / "missing.json").string().c_str(), &loaded), RLV_ERR_MISSING_RESOURCE);
  params.num_leaves = 1;
  EXPECT_EQ(rlv_gbdt_train(&params, x.data(), rows, cols, y.data(), &model), RLV_ERR_INVALID_ARGUMENT);
}

TEST(CApi, FixturesRunAndInspect) {
  TempDir dir;
  char* config_path = nullptr;
  ASSERT_EQ(rlv_make_fixtures(dir.path().string().c_str(), 7, 300, &config_path), RLV_OK);
  const std::string out = "paths.output_dir=" + (dir / "out").string();
  const char* overrides[] = {"schemes=[T2+M1, T3+I1+M3]", "gbdt.n_trees=10", "fusion.k_text=10", "fusion.k_embed=5",
                             "fusion.k_image=5", out.c_str()};
  rlv_config* config = nullptr;
  ASSERT_EQ(rlv_config_load(config_path, overrides, 6, &config), RLV_OK);
  rlv_string_free(config_path);

  rlv_cache_stats features{}, fusion{};
  ASSERT_EQ(rlv_featurize(config, &features, &fusion), RLV_OK);
  EXPECT_EQ(features.misses, 1u);

  rlv_run_result* result = nullptr;
  ASSERT_EQ(rlv_run(config, &result), RLV_OK);
  ASSERT_EQ(rlv_run_report_count(result), 2u);
  EXPECT_EQ(rlv_run_failure_count(result), 0u);
  rlv_report report{};
  ASSERT_EQ(rlv_run_report(result, 1, &report), RLV_OK);
  EXPECT_EQ(std::string(report.scheme), "T3+I1+M3");
  EXPECT_GT(report.auc, 0.5);
  EXPECT_EQ(report.confusion.tp + report.confusion.fp + report.confusion.tn + report.confusion.fn, 60u);
  EXPECT_EQ(rlv_run_report(result, 2, &report), RLV_ERR_INVALID_ARGUMENT);
  EXPECT_TRUE(std::filesystem::exists(rlv_run_report_path(result)));
  EXPECT_NE(std::string(rlv_run_table(result)).find("T3+I1"), std::string::npos);
  rlv_run_cache_stats(result, &features, &fusion);
  EXPECT_EQ(features.hits, 1u);
  rlv_run_result_free(result);

  char* tsv = nullptr;
  const auto model = (dir / "out" / "models" / "synthetic_storm" / "T3+I1+M3.json").string();
  ASSERT_EQ(rlv_inspect(model.c_str(), (dir / "posts.tsv").string().c_str(), nullptr, &tsv), RLV_OK) << rlv_last_error();
  EXPECT_EQ(std::string(tsv).substr(0, 14), "post_id\tscore\t");
  rlv_string_free(tsv);
  EXPECT_EQ(rlv_inspect(model.c_str(), "/nonexistent.tsv", nullptr, &tsv), RLV_ERR_MISSING_RESOURCE);
  rlv_config_free(config);
}

TEST(CApi, MissingResourceStatus) {
  const char* overrides[] = {"paths.corpus=/nonexistent/posts.tsv"};
  rlv_config* config = nullptr;
  ASSERT_EQ(rlv_config_default(overrides, 1, &config), RLV_OK);
  rlv_run_result* result = nullptr;
  EXPECT_EQ(rlv_run(config, &result), RLV_ERR_MISSING_RESOURCE);
  EXPECT_EQ(result, nullptr);
  EXPECT_NE(std::string(rlv_last_error()).find("/nonexistent/posts.tsv"), std::string::npos);
  rlv_config_free(config);
}
