#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "test_support.h"

using testing_support::TempDir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome cli(const std::string& args) {
  const std::string cmd = std::string("'") + RELEVANCY_CLI_PATH + "' " + args + " 2>/dev/null";
  Outcome o;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return o;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) o.out.append(buf, n);
  const int status = ::pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const std::string kSmall =
    "--set gbdt.n_trees=10 --set fusion.k_text=10 --set fusion.k_embed=5 --set fusion.k_image=5 "
    "--set 'schemes=[T2+M1, T3+I1+M3]'";

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("relevancy-cli");
    const auto o = cli("make-fixtures --out '" + dir_->path().string() + "' --posts 300");
    ASSERT_EQ(o.code, 0) << o.out;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string config() { return "--config '" + (dir_->path() / "config.yaml").string() + "'"; }
  static std::string out(const std::string& name) { return "--out '" + (dir_->path() / name).string() + "'"; }
  static TempDir* dir_;
};

TempDir* CliTest::dir_ = nullptr;

}  // namespace

TEST_F(CliTest, RunSucceedsAndWritesReports) {
  const auto o = cli("run " + config() + " " + out("run") + " " + kSmall);
  ASSERT_EQ(o.code, 0) << o.out;
  EXPECT_NE(o.out.find("T3+I1"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_->path() / "run" / "reports" / "report.tsv"));
  EXPECT_TRUE(fs::exists(dir_->path() / "run" / "reports" / "config.yaml"));
  EXPECT_TRUE(fs::exists(dir_->path() / "run" / "models" / "synthetic_storm" / "T3+I1+M3.json"));
}

TEST_F(CliTest, ThreadCountDoesNotChangeResults) {
  ASSERT_EQ(cli("run " + config() + " " + out("t1") + " --threads 1 --set cache=false " + kSmall).code, 0);
  ASSERT_EQ(cli("run " + config() + " " + out("t8") + " --threads 8 --set cache=false " + kSmall).code, 0);
  for (const char* f : {"report.tsv", "scores.tsv"}) {
    EXPECT_EQ(slurp(dir_->path() / "t1" / "reports" / f), slurp(dir_->path() / "t8" / "reports" / f)) << f;
  }
}

TEST_F(CliTest, FeaturizeReportsCacheHits) {
  const auto first = cli("featurize " + config() + " " + out("feat") + " " + kSmall);
  ASSERT_EQ(first.code, 0);
  EXPECT_NE(first.out.find("feature cache: 0 hit, 1 miss"), std::string::npos) << first.out;
  const auto second = cli("featurize " + config() + " " + out("feat") + " " + kSmall);
  EXPECT_NE(second.out.find("feature cache: 1 hit, 0 miss"), std::string::npos) << second.out;
  EXPECT_NE(second.out.find("fusion cache: 1 hit, 0 miss"), std::string::npos) << second.out;
}

TEST_F(CliTest, DumpConfigShowsOverrides) {
  const auto o = cli("run " + config() + " --seed 11 --set gbdt.n_trees=33 --dump-config");
  ASSERT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("seed: 11"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find("n_trees: 33"), std::string::npos) << o.out;
  EXPECT_NE(o.out.find((dir_->path() / "posts.tsv").string()), std::string::npos) << o.out;
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(cli("run " + config() + " --set gbdt.bogus=1").code, 2);
  EXPECT_EQ(cli("run --config /nonexistent/config.yaml").code, 2);
  EXPECT_EQ(cli("run --frobnicate").code, 2);
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("run " + config() + " " + out("miss") + " --set paths.embeddings=/nonexistent/emb.txt " + kSmall).code,
            3);
  EXPECT_FALSE(fs::exists(dir_->path() / "miss" / "reports"));
  EXPECT_EQ(cli("inspect --model /nonexistent/m.json --posts /nonexistent/p.tsv").code, 3);
  EXPECT_EQ(cli("--version").code, 0);
}

TEST_F(CliTest, InspectPrintsScores) {
  ASSERT_EQ(cli("run " + config() + " " + out("insp") + " " + kSmall).code, 0);
  const auto model = dir_->path() / "insp" / "models" / "synthetic_storm" / "T3+I1+M3.json";
  const auto o = cli("inspect --model '" + model.string() + "' --posts '" + (dir_->path() / "posts.tsv").string() + "'");
  ASSERT_EQ(o.code, 0);
  EXPECT_EQ(o.out.substr(0, o.out.find('\n')), "post_id\tscore\ttfidf_l2\tembed_l2\timage_l2\thandcrafted_l2");
  EXPECT_EQ(std::count(o.out.begin(), o.out.end(), '\n'), 301);
}
