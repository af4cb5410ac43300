#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metrics.h"
#include "scheme.h"

namespace relevancy {

struct EvalReport {
  std::string event;
  SchemeId scheme;
  double accuracy = 0.0;
  double auc = 0.0;
  Confusion confusion;
  std::uint64_t seed = 0;
  std::string config_digest;

  bool operator==(const EvalReport&) const = default;
};

// 0.8818 -> "88.18%"
std::string format_percent(double fraction);

// Reports ordered by event (first appearance), feature-set row, model, seed.
std::vector<EvalReport> sorted_reports(std::span<const EvalReport> reports);

// Tab-separated `event scheme accuracy auc tp fp tn fn seed`, one line per
// report, values printed with round-trip precision.
std::string report_tsv(std::span<const EvalReport> reports);

// Human-readable table: rows are event x feature set, columns are the models
// present x {Accuracy, AUC}. Several seeds for one cell render as mean ± sd.
std::string report_table(std::span<const EvalReport> reports);

}  // namespace relevancy
