#include "scheme.h"

#include <cctype>

#include "common.h"

namespace relevancy {

std::string SchemeId::feature_set() const {
  std::string s = text == TextChoice::Bow ? "T1" : text == TextChoice::Tfidf ? "T2" : "T3";
  if (image) s += "+I1";
  return s;
}

std::string_view SchemeId::model_code() const {
  switch (model) {
    case ModelChoice::LogReg: return "M1";
    case ModelChoice::GbdtPlain: return "M2";
    case ModelChoice::Gbdt: return "M3";
  }
  return "M?";
}

std::string SchemeId::name() const { return feature_set() + "+" + std::string(model_code()); }

int SchemeId::feature_set_rank() const {
  if (!image) return static_cast<int>(text);
  return text == TextChoice::Tfidf ? 3 : 4;
}

std::vector<BlockName> SchemeId::layout() const {
  std::vector<BlockName> out;
  out.push_back(text == TextChoice::Bow ? BlockName::Bow : BlockName::Tfidf);
  if (text == TextChoice::TfidfEmbed) out.push_back(BlockName::Embed);
  if (image) out.push_back(BlockName::Image);
  out.push_back(BlockName::Handcrafted);
  return out;
}

std::string_view model_label(ModelChoice model) {
  switch (model) {
    case ModelChoice::LogReg: return "LogReg";
    case ModelChoice::GbdtPlain: return "GBDT-plain";
    case ModelChoice::Gbdt: return "GBDT";
  }
  return "?";
}

SchemeId parse_scheme(std::string_view text) {
  std::string compact;
  for (char c : text) {
    if (c != ' ' && c != '\t') compact += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  const auto parts = split_view(compact, '+');
  const auto fail = [&]() -> SchemeId {
    throw InvalidArgument("unknown scheme '" + std::string(text) +
                          "'; expected one of T1|T2|T3 or T2+I1|T3+I1, followed by +M1|+M2|+M3");
  };
  if (parts.size() != 2 && parts.size() != 3) return fail();
  SchemeId id;
  if (parts[0] == "T1") {
    id.text = TextChoice::Bow;
  } else if (parts[0] == "T2") {
    id.text = TextChoice::Tfidf;
  } else if (parts[0] == "T3") {
    id.text = TextChoice::TfidfEmbed;
  } else {
    return fail();
  }
  if (parts.size() == 3) {
    if (parts[1] != "I1" || id.text == TextChoice::Bow) return fail();
    id.image = true;
  }
  const auto m = parts.back();
  if (m == "M1") {
    id.model = ModelChoice::LogReg;
  } else if (m == "M2") {
    id.model = ModelChoice::GbdtPlain;
  } else if (m == "M3") {
    id.model = ModelChoice::Gbdt;
  } else {
    return fail();
  }
  return id;
}

std::vector<SchemeId> all_schemes() {
  std::vector<SchemeId> out;
  const std::pair<TextChoice, bool> sets[] = {{TextChoice::Bow, false},
                                              {TextChoice::Tfidf, false},
                                              {TextChoice::TfidfEmbed, false},
                                              {TextChoice::Tfidf, true},
                                              {TextChoice::TfidfEmbed, true}};
  for (const auto& [text, image] : sets) {
    for (auto model : {ModelChoice::LogReg, ModelChoice::GbdtPlain, ModelChoice::Gbdt}) {
      out.push_back(SchemeId{text, image, model});
    }
  }
  return out;
}

}  // namespace relevancy
