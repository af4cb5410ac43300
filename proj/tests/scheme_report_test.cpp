#include <gtest/gtest.h>

#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "common.h"
#include "report.h"
#include "scheme.h"

using namespace relevancy;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

EvalReport report_for(const std::string& scheme, double acc, double auc_value, std::uint64_t seed = 42,
                      const std::string& event = "storm") {
  EvalReport r;
  r.event = event;
  r.scheme = parse_scheme(scheme);
  r.accuracy = acc;
  r.auc = auc_value;
  r.seed = seed;
  return r;
}

}  // namespace

TEST(Scheme, ParseNamesAndLayouts) {
  const auto s = parse_scheme("T3+I1+M3");
  EXPECT_EQ(s.text, TextChoice::TfidfEmbed);
  EXPECT_TRUE(s.image);
  EXPECT_EQ(s.model, ModelChoice::Gbdt);
  EXPECT_EQ(s.name(), "T3+I1+M3");
  EXPECT_EQ(s.layout(), (std::vector<BlockName>{BlockName::Tfidf, BlockName::Embed, BlockName::Image,
                                                BlockName::Handcrafted}));
  EXPECT_EQ(parse_scheme(" t1 + m1 ").name(), "T1+M1");
  EXPECT_EQ(parse_scheme("T1+M2").layout(), (std::vector<BlockName>{BlockName::Bow, BlockName::Handcrafted}));
}

TEST(Scheme, RejectsOutsideGrid) {
  for (const char* bad : {"T1+I1+M3", "T4+M1", "T2+M4", "T2", "T2+I2+M1", "", "T2+I1+M1+M2"}) {
    EXPECT_THROW(parse_scheme(bad), InvalidArgument) << bad;
  }
}

TEST(Scheme, FifteenInTableOrder) {
  const auto all = all_schemes();
  ASSERT_EQ(all.size(), 15u);
  std::set<std::string> names;
  for (const auto& s : all) {
    names.insert(s.name());
    EXPECT_EQ(parse_scheme(s.name()), s);
  }
  EXPECT_EQ(names.size(), 15u);
  EXPECT_EQ(all.front().name(), "T1+M1");
  EXPECT_EQ(all.back().name(), "T3+I1+M3");
  for (std::size_t i = 1; i < all.size(); ++i) {
    EXPECT_LE(all[i - 1].feature_set_rank(), all[i].feature_set_rank());
  }
}

TEST(Report, FormatPercent) {
  EXPECT_EQ(format_percent(0.8818), "88.18%");
  EXPECT_EQ(format_percent(1.0), "100.00%");
  EXPECT_EQ(format_percent(0.0), "0.00%");
}

TEST(Report, TsvHeaderAndRows) {
  std::vector<EvalReport> reports{report_for("T2+M3", 0.75, 0.8), report_for("T1+M1", 0.5, 0.625)};
  reports[1].confusion = {1, 2, 3, 4};
  const auto lines = lines_of(report_tsv(reports));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "event\tscheme\taccuracy\tauc\ttp\tfp\ttn\tfn\tseed");
  EXPECT_EQ(lines[1], "storm\tT1+M1\t0.5\t0.625\t1\t2\t3\t4\t42");
  EXPECT_EQ(lines[2], "storm\tT2+M3\t0.75\t0.8\t0\t0\t0\t0\t42");
}

TEST(Report, TableFiveRowsSixValueColumns) {
  std::vector<EvalReport> reports;
  for (const auto& s : all_schemes()) reports.push_back(report_for(s.name(), 0.7, 0.8));
  const auto lines = lines_of(report_table(reports));
  ASSERT_GE(lines.size(), 7u);
  EXPECT_NE(lines[0].find("M1 LogReg Acc"), std::string::npos);
  EXPECT_NE(lines[0].find("M3 GBDT AUC"), std::string::npos);
  EXPECT_EQ(lines[1].find_first_not_of('-'), std::string::npos);
  const char* sets[] = {"T1", "T2", "T3", "T2+I1", "T3+I1"};
  for (int r = 0; r < 5; ++r) {
    std::istringstream in(lines[2 + r]);
    std::vector<std::string> cells;
    for (std::string c; in >> c;) cells.push_back(c);
    ASSERT_EQ(cells.size(), 8u) << lines[2 + r];
    EXPECT_EQ(cells[1], sets[r]);
    for (int c = 2; c < 8; ++c) EXPECT_EQ(cells[c], c % 2 == 0 ? "70.00%" : "80.00%");
  }
}

TEST(Report, SeveralSeedsRenderMeanAndSd) {
  std::vector<EvalReport> reports{report_for("T2+M3", 0.7, 0.8, 1), report_for("T2+M3", 0.9, 0.8, 2)};
  const auto table = report_table(reports);
  // sd of {70, 90} with n - 1 in the denominator is 14.14.
  EXPECT_NE(table.find("80.00% ± 14.14"), std::string::npos) << table;
  EXPECT_NE(table.find("80.00% ± 0.00"), std::string::npos) << table;
}

TEST(Report, MissingCellsAndEmpty) {
  std::vector<EvalReport> reports{report_for("T2+M1", 0.7, 0.8), report_for("T3+M3", 0.6, 0.65)};
  const auto table = report_table(reports);
  EXPECT_NE(table.find(" - "), std::string::npos);
  EXPECT_EQ(table.find("M2"), std::string::npos);
  EXPECT_EQ(report_table({}), "(no results)\n");
}
