#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "fusion.h"

namespace relevancy {

enum class TextChoice { Bow, Tfidf, TfidfEmbed };  // T1, T2, T3
// M2 is the boosting engine with sampling and bundling switched off.
enum class ModelChoice { LogReg, GbdtPlain, Gbdt };  // M1, M2, M3

struct SchemeId {
  TextChoice text = TextChoice::Tfidf;
  bool image = false;
  ModelChoice model = ModelChoice::Gbdt;

  // "T3+I1+M3"
  std::string name() const;
  // "T3+I1"
  std::string feature_set() const;
  std::string_view model_code() const;
  // Row position among T1, T2, T3, T2+I1, T3+I1.
  int feature_set_rank() const;

  bool needs_embeddings() const { return text == TextChoice::TfidfEmbed; }
  bool needs_images() const { return image; }
  // Fused block order for this scheme; always ends with handcrafted counts.
  std::vector<BlockName> layout() const;

  auto operator<=>(const SchemeId&) const = default;
};

// Accepts "T2+I1+M3" with optional spaces. Throws InvalidArgument for any
// combination outside the grid (T1 never pairs with I1).
SchemeId parse_scheme(std::string_view text);
// All 15 schemes in table order (feature set major, model minor).
std::vector<SchemeId> all_schemes();
std::string_view model_label(ModelChoice model);

}  // namespace relevancy
