#include "report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "common.h"

namespace relevancy {

namespace {

struct Cell {
  std::vector<double> accuracy;
  std::vector<double> auc;
};

std::string render_values(const std::vector<double>& values) {
  if (values.empty()) return "-";
  if (values.size() == 1) return format_percent(values.front());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s ± %.2f", format_percent(mean).c_str(), 100.0 * sd);
  return buf;
}

// Display width in code points, so "±" pads like one column.
std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

}  // namespace

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * fraction);
  return buf;
}

std::vector<EvalReport> sorted_reports(std::span<const EvalReport> reports) {
  std::vector<std::string> events;
  for (const auto& r : reports) {
    if (std::find(events.begin(), events.end(), r.event) == events.end()) events.push_back(r.event);
  }
  const auto event_rank = [&](const std::string& e) { return std::find(events.begin(), events.end(), e) - events.begin(); };
  std::vector<EvalReport> out(reports.begin(), reports.end());
  std::stable_sort(out.begin(), out.end(), [&](const EvalReport& a, const EvalReport& b) {
    const auto ka = std::tuple(event_rank(a.event), a.scheme.feature_set_rank(), static_cast<int>(a.scheme.model), a.seed);
    const auto kb = std::tuple(event_rank(b.event), b.scheme.feature_set_rank(), static_cast<int>(b.scheme.model), b.seed);
    return ka < kb;
  });
  return out;
}

std::string report_tsv(std::span<const EvalReport> reports) {
  std::string out = "event\tscheme\taccuracy\tauc\ttp\tfp\ttn\tfn\tseed\n";
  for (const auto& r : sorted_reports(reports)) {
    out += r.event + '\t' + r.scheme.name() + '\t' + format_double(r.accuracy) + '\t' + format_double(r.auc) + '\t' +
           std::to_string(r.confusion.tp) + '\t' + std::to_string(r.confusion.fp) + '\t' +
           std::to_string(r.confusion.tn) + '\t' + std::to_string(r.confusion.fn) + '\t' + std::to_string(r.seed) +
           '\n';
  }
  return out;
}

std::string report_table(std::span<const EvalReport> reports) {
  if (reports.empty()) return "(no results)\n";
  const auto sorted = sorted_reports(reports);

  std::vector<ModelChoice> models;
  for (auto m : {ModelChoice::LogReg, ModelChoice::GbdtPlain, ModelChoice::Gbdt}) {
    if (std::any_of(sorted.begin(), sorted.end(), [&](const EvalReport& r) { return r.scheme.model == m; })) {
      models.push_back(m);
    }
  }

  // (event, feature set) rows in sorted order; cells keyed by model.
  std::vector<std::pair<std::string, std::string>> rows;
  std::map<std::tuple<std::string, std::string, int>, Cell> cells;
  for (const auto& r : sorted) {
    std::pair<std::string, std::string> key{r.event, r.scheme.feature_set()};
    if (rows.empty() || rows.back() != key) rows.push_back(key);
    auto& cell = cells[{r.event, r.scheme.feature_set(), static_cast<int>(r.scheme.model)}];
    cell.accuracy.push_back(r.accuracy);
    cell.auc.push_back(r.auc);
  }

  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"Event", "Features"};
  for (auto m : models) {
    const std::string prefix = std::string(SchemeId{TextChoice::Bow, false, m}.model_code()) + " " +
                               std::string(model_label(m));
    header.push_back(prefix + " Acc");
    header.push_back(prefix + " AUC");
  }
  grid.push_back(header);
  for (const auto& [event, features] : rows) {
    std::vector<std::string> line{event, features};
    for (auto m : models) {
      const auto it = cells.find({event, features, static_cast<int>(m)});
      line.push_back(it == cells.end() ? "-" : render_values(it->second.accuracy));
      line.push_back(it == cells.end() ? "-" : render_values(it->second.auc));
    }
    grid.push_back(std::move(line));
  }

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], display_width(line[c]));
  }
  std::ostringstream out;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    std::string text;
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      if (c > 0) text += "  ";
      text += pad(grid[r][c], widths[c]);
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out << text << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
    }
  }
  if (std::find(models.begin(), models.end(), ModelChoice::GbdtPlain) != models.end()) {
    out << "\nM2 GBDT-plain: the boosting engine with one-side sampling and feature bundling disabled.\n";
  }
  return out.str();
}

}  // namespace relevancy
