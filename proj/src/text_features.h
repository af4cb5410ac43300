#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpus.h"

namespace relevancy {

using DenseVector = std::vector<double>;

// Sorted (index, value) pairs without explicit zeros.
struct SparseVector {
  std::size_t dim = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  DenseVector to_dense() const;
  bool operator==(const SparseVector&) const = default;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  // Rebuilds a vocabulary from its serialized parts; validates the invariants.
  Vocabulary(std::vector<std::string> words, std::vector<std::uint32_t> doc_freq, std::size_t n_docs);

  std::size_t size() const { return words_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint32_t>& doc_freqs() const { return doc_freq_; }
  std::uint32_t doc_freq(std::size_t index) const { return doc_freq_[index]; }
  std::optional<std::uint32_t> index_of(std::string_view word) const;

 private:
  std::vector<std::string> words_;
  std::vector<std::uint32_t> doc_freq_;
  std::size_t n_docs_ = 0;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Indices follow first appearance; doc_freq counts documents, not occurrences.
Vocabulary build_vocab(std::span<const TokenizedDoc> train_docs);

SparseVector bow_vector(const TokenizedDoc& doc, const Vocabulary& vocab);

enum class TfMode {
  LengthNormalized,  // count(w) / number of tokens in the doc
  RawCount,          // count(w)
};

struct TfidfOptions {
  TfMode tf_mode = TfMode::LengthNormalized;
  // Base of the idf logarithm; 0 selects the natural log.
  double log_base = 0.0;
};

// weight(w) = tf(w) * log(N / df(w)); out-of-vocabulary tokens are skipped and
// words present in every training doc get weight 0 (omitted).
SparseVector tfidf_vector(const TokenizedDoc& doc, const Vocabulary& vocab, const TfidfOptions& options = {});

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  // Returns false (and keeps the first vector) when the word already exists.
  bool add(std::string word, std::span<const double> vector);
  std::optional<std::span<const double>> find(std::string_view word) const;

  bool operator==(const EmbeddingTable& other) const {
    return dim_ == other.dim_ && words_ == other.words_ && data_ == other.data_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// `word v1 ... vD` per line. When `keep` is given, only those words are stored
// (every line is still shape-checked).
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               const std::unordered_set<std::string>* keep = nullptr);
EmbeddingTable parse_embeddings(std::string_view contents, std::string_view source = "<memory>",
                                const std::unordered_set<std::string>* keep = nullptr);
std::string serialize_embeddings(const EmbeddingTable& table);

// Mean of the vectors of in-table tokens, counting repeats; zeros when none.
DenseVector pool_embeddings(const TokenizedDoc& doc, const EmbeddingTable& table);

// (raw word count, raw character count).
DenseVector handcrafted_features(const TokenizedDoc& doc);

}  // namespace relevancy
