#include "text_features.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "common.h"

namespace relevancy {

DenseVector SparseVector::to_dense() const {
  DenseVector out(dim, 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) out[indices[i]] = values[i];
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::uint32_t> doc_freq, std::size_t n_docs)
    : words_(std::move(words)), doc_freq_(std::move(doc_freq)), n_docs_(n_docs) {
  if (words_.size() != doc_freq_.size()) throw InvalidArgument("vocabulary: words/doc_freq length mismatch");
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (doc_freq_[i] < 1 || doc_freq_[i] > n_docs_) {
      throw InvalidArgument("vocabulary: doc_freq of '" + words_[i] + "' outside [1, N]");
    }
    if (!index_.emplace(words_[i], static_cast<std::uint32_t>(i)).second) {
      throw InvalidArgument("vocabulary: duplicate word '" + words_[i] + "'");
    }
  }
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view word) const {
  // Heterogeneous lookup on unordered_map needs C++20 transparent hashing,
  // which libstdc++ 11 lacks.
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocab(std::span<const TokenizedDoc> train_docs) {
  if (train_docs.empty()) throw InvalidArgument("build_vocab: no training documents");
  std::vector<std::string> words;
  std::vector<std::uint32_t> df;
  std::unordered_map<std::string, std::uint32_t> index;
  // last_doc[i] is the last document (1-based) that counted word i.
  std::vector<std::size_t> last_doc;
  for (std::size_t d = 0; d < train_docs.size(); ++d) {
    for (const auto& token : train_docs[d].tokens) {
      auto [it, inserted] = index.emplace(token, static_cast<std::uint32_t>(words.size()));
      if (inserted) {
        words.push_back(token);
        df.push_back(0);
        last_doc.push_back(0);
      }
      const std::uint32_t i = it->second;
      if (last_doc[i] != d + 1) {
        last_doc[i] = d + 1;
        ++df[i];
      }
    }
  }
  return Vocabulary(std::move(words), std::move(df), train_docs.size());
}

namespace {

// In-vocabulary term counts, sorted by index.
std::vector<std::pair<std::uint32_t, std::uint32_t>> term_counts(const TokenizedDoc& doc, const Vocabulary& vocab) {
  std::vector<std::uint32_t> ids;
  ids.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) {
    if (auto idx = vocab.index_of(t)) ids.push_back(*idx);
  }
  std::sort(ids.begin(), ids.end());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> counts;
  for (std::size_t i = 0; i < ids.size();) {
    std::size_t j = i;
    while (j < ids.size() && ids[j] == ids[i]) ++j;
    counts.emplace_back(ids[i], static_cast<std::uint32_t>(j - i));
    i = j;
  }
  return counts;
}

}  // namespace

SparseVector bow_vector(const TokenizedDoc& doc, const Vocabulary& vocab) {
  SparseVector out;
  out.dim = vocab.size();
  for (auto [idx, count] : term_counts(doc, vocab)) {
    out.indices.push_back(idx);
    out.values.push_back(static_cast<double>(count));
  }
  return out;
}

SparseVector tfidf_vector(const TokenizedDoc& doc, const Vocabulary& vocab, const TfidfOptions& options) {
  SparseVector out;
  out.dim = vocab.size();
  if (doc.tokens.empty()) return out;
  if (options.log_base < 0.0 || options.log_base == 1.0) {
    throw InvalidArgument("tfidf: log base must be > 0 and != 1");
  }
  const double log_scale = options.log_base > 0.0 ? std::log(options.log_base) : 1.0;
  const auto n = static_cast<double>(vocab.n_docs());
  const auto len = static_cast<double>(doc.tokens.size());
  for (auto [idx, count] : term_counts(doc, vocab)) {
    const double tf = options.tf_mode == TfMode::LengthNormalized ? static_cast<double>(count) / len
                                                                   : static_cast<double>(count);
    const double idf = std::log(n / static_cast<double>(vocab.doc_freq(idx))) / log_scale;
    const double w = tf * idf;
    if (w != 0.0) {
      out.indices.push_back(idx);
      out.values.push_back(w);
    }
  }
  return out;
}

bool EmbeddingTable::add(std::string word, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw InvalidArgument("embedding for '" + word + "' has length " + std::to_string(vector.size()) +
                          ", table dim is " + std::to_string(dim_));
  }
  auto [it, inserted] = index_.emplace(word, words_.size());
  if (!inserted) return false;
  words_.push_back(std::move(word));
  data_.insert(data_.end(), vector.begin(), vector.end());
  return true;
}

std::optional<std::span<const double>> EmbeddingTable::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return std::span<const double>(data_.data() + it->second * dim_, dim_);
}

namespace {

class EmbeddingParser {
 public:
  EmbeddingParser(std::string_view source, const std::unordered_set<std::string>* keep)
      : source_(source), keep_(keep) {}

  void line(std::string_view text, std::size_t line_no) {
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (trim(text).empty()) return;
    fields_.clear();
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
      const std::size_t start = i;
      while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
      if (i > start) fields_.push_back(text.substr(start, i - start));
    }
    const std::size_t n_values = fields_.size() - 1;
    const auto where = [&] { return std::string(source_) + ": line " + std::to_string(line_no); };
    if (n_values == 0) throw ParseError(where() + ": word without vector values");
    if (!table_) {
      table_.emplace(n_values);
    } else if (n_values != table_->dim()) {
      throw ParseError(where() + ": expected " + std::to_string(table_->dim()) + " values, found " +
                       std::to_string(n_values));
    }
    std::string word(fields_[0]);
    if (keep_ != nullptr && !keep_->contains(word)) return;
    values_.resize(n_values);
    for (std::size_t k = 0; k < n_values; ++k) {
      auto v = parse_double(fields_[k + 1]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError(where() + ": non-numeric value '" + std::string(fields_[k + 1]) + "'");
      }
      values_[k] = *v;
    }
    table_->add(std::move(word), values_);
  }

  EmbeddingTable finish() {
    if (!table_) throw ParseError(std::string(source_) + ": no embedding vectors found");
    return std::move(*table_);
  }

 private:
  std::string_view source_;
  const std::unordered_set<std::string>* keep_;
  std::optional<EmbeddingTable> table_;
  std::vector<std::string_view> fields_;
  std::vector<double> values_;
};

}  // namespace

EmbeddingTable parse_embeddings(std::string_view contents, std::string_view source,
                                const std::unordered_set<std::string>* keep) {
  EmbeddingParser parser(source, keep);
  std::size_t line_no = 0;
  for (auto line : split_view(contents, '\n')) parser.line(line, ++line_no);
  return parser.finish();
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const std::unordered_set<std::string>* keep) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingResource("embedding file not found: " + path.string());
  const std::string source = path.string();
  EmbeddingParser parser(source, keep);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) parser.line(line, ++line_no);
  return parser.finish();
}

std::string serialize_embeddings(const EmbeddingTable& table) {
  std::string out;
  for (const auto& word : table.words()) {
    out += word;
    const auto vec = *table.find(word);
    for (double v : vec) {
      out.push_back(' ');
      out += format_double(v);
    }
    out.push_back('\n');
  }
  return out;
}

DenseVector pool_embeddings(const TokenizedDoc& doc, const EmbeddingTable& table) {
  DenseVector sum(table.dim(), 0.0);
  std::size_t n = 0;
  for (const auto& token : doc.tokens) {
    if (auto vec = table.find(token)) {
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += (*vec)[k];
      ++n;
    }
  }
  if (n > 0) {
    for (auto& v : sum) v /= static_cast<double>(n);
  }
  return sum;
}

DenseVector handcrafted_features(const TokenizedDoc& doc) {
  return {static_cast<double>(doc.raw_word_count), static_cast<double>(doc.raw_char_count)};
}

}  // namespace relevancy
