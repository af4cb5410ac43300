#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace relevancy {

enum class Label : std::uint8_t { NotInformative = 0, Informative = 1 };

std::string_view label_name(Label label);
inline int label_value(Label label) { return label == Label::Informative ? 1 : 0; }

struct Post {
  std::string post_id;
  std::string raw_text;
  std::vector<std::string> image_ids;
  Label label = Label::NotInformative;
  std::string event;

  bool operator==(const Post&) const = default;
};

struct LabelCounts {
  std::size_t informative = 0;
  std::size_t not_informative = 0;

  std::size_t total() const { return informative + not_informative; }
  bool operator==(const LabelCounts&) const = default;
};

// Posts in load order. Construction enforces unique, nonempty ids.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Post> posts);

  const std::vector<Post>& posts() const { return posts_; }
  const LabelCounts& counts() const { return counts_; }
  std::size_t size() const { return posts_.size(); }
  bool empty() const { return posts_.empty(); }

  // Distinct event tags in order of first appearance.
  std::vector<std::string> events() const;
  Corpus filter_event(std::string_view event) const;

  bool operator==(const Corpus&) const = default;

 private:
  std::vector<Post> posts_;
  LabelCounts counts_;
};

// Tab-separated posts file with header `post_id text image_ids label event`.
// Tabs, newlines and backslashes inside text are backslash-escaped.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view contents, std::string_view source = "<memory>");
std::string serialize_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

using StopwordSet = std::unordered_set<std::string>;

StopwordSet parse_stopwords(std::string_view contents);
StopwordSet load_stopwords(const std::filesystem::path& path);
// The list shipped in data/stopwords_en_v1.txt.
std::string_view builtin_stopwords_text();
const StopwordSet& builtin_stopwords();

struct TokenizedDoc {
  std::string post_id;
  std::vector<std::string> tokens;
  std::size_t raw_word_count = 0;
  std::size_t raw_char_count = 0;

  bool operator==(const TokenizedDoc&) const = default;
};

// Counts raw length, then strips URLs, the leading RT marker and @-mentions,
// replaces symbols with spaces, lowercases, splits on whitespace and drops
// stopwords. Latin-1 letters survive; other non-ASCII code points are symbols.
TokenizedDoc preprocess(std::string_view raw_text, const StopwordSet& stopwords);
TokenizedDoc preprocess(const Post& post, const StopwordSet& stopwords);

std::size_t count_whitespace_tokens(std::string_view text);
std::size_t count_code_points(std::string_view utf8);

struct SplitIndices {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  // Positions into Corpus::posts(), aligned with the id lists.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::uint64_t seed = 0;
  double ratio = 0.0;
};

// Seeded shuffle of load order; the first round(ratio * N) posts train.
SplitIndices split(const Corpus& corpus, double ratio, std::uint64_t seed);

}  // namespace relevancy
