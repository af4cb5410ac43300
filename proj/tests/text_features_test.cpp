#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "common.h"
#include "corpus.h"
#include "oracles.h"
#include "test_support.h"
#include "text_features.h"

using namespace relevancy;
using testing_support::Gen;
using testing_support::TempDir;

namespace {

TokenizedDoc doc_of(std::vector<std::string> tokens) {
  TokenizedDoc d;
  d.tokens = std::move(tokens);
  return d;
}

std::vector<TokenizedDoc> docs_of(const std::vector<std::vector<std::string>>& lists) {
  std::vector<TokenizedDoc> out;
  for (const auto& l : lists) out.push_back(doc_of(l));
  return out;
}

std::vector<std::vector<std::string>> random_docs(Gen& gen, std::size_t n, std::size_t vocab, std::size_t max_len) {
  std::vector<std::vector<std::string>> docs(n);
  for (auto& d : docs) {
    for (std::size_t k = 0, len = gen.index(max_len + 1); k < len; ++k) {
      // Skewed draw so some words appear in many documents.
      const double u = gen.uniform();
      d.push_back("w" + std::to_string(static_cast<std::size_t>(u * u * static_cast<double>(vocab))));
    }
  }
  return docs;
}

}  // namespace

TEST(BuildVocab, DocumentFrequencies) {
  const auto v = build_vocab(docs_of({{"a", "b"}, {"b", "c"}}));
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v.n_docs(), 2u);
  EXPECT_EQ(v.words(), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(v.doc_freq(*v.index_of("a")), 1u);
  EXPECT_EQ(v.doc_freq(*v.index_of("b")), 2u);
  EXPECT_EQ(v.doc_freq(*v.index_of("c")), 1u);
  EXPECT_FALSE(v.index_of("d").has_value());
}

TEST(BuildVocab, RepeatsCountOnce) {
  const auto v = build_vocab(docs_of({{"x", "x", "x"}}));
  EXPECT_EQ(v.size(), 1u);
  EXPECT_EQ(v.doc_freq(0), 1u);
}

TEST(BuildVocab, EmptyInputRejected) {
  EXPECT_THROW(build_vocab(std::vector<TokenizedDoc>{}), InvalidArgument);
}

TEST(BuildVocab, MatchesMembershipCountOracle) {
  Gen gen(5);
  const auto lists = random_docs(gen, 50, 120, 15);
  const auto v = build_vocab(docs_of(lists));
  std::set<std::string> all;
  for (const auto& d : lists) all.insert(d.begin(), d.end());
  ASSERT_EQ(v.size(), all.size());
  for (const auto& w : all) {
    std::uint32_t members = 0;
    for (const auto& d : lists) members += std::find(d.begin(), d.end(), w) != d.end() ? 1 : 0;
    EXPECT_EQ(v.doc_freq(*v.index_of(w)), members) << w;
  }
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(*v.index_of(v.words()[i]), i);
}

TEST(BowVector, CountsAndOov) {
  const auto v = build_vocab(docs_of({{"a", "b"}}));
  const auto bow = bow_vector(doc_of({"a", "a", "b"}), v);
  EXPECT_EQ(bow.dim, 2u);
  EXPECT_EQ(bow.indices, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(bow.values, (std::vector<double>{2.0, 1.0}));
  EXPECT_EQ(bow_vector(doc_of({"zz", "yy"}), v).nnz(), 0u);
}

TEST(BowVector, MatchesDenseCountOracle) {
  Gen gen(8);
  const auto train = random_docs(gen, 40, 60, 12);
  const auto v = build_vocab(docs_of(train));
  const auto test = random_docs(gen, 40, 80, 12);
  for (const auto& d : test) {
    std::vector<double> dense(v.size(), 0.0);
    for (const auto& w : d) {
      if (auto i = v.index_of(w)) dense[*i] += 1.0;
    }
    EXPECT_EQ(bow_vector(doc_of(d), v).to_dense(), dense);
  }
  EXPECT_EQ(v.size(), build_vocab(docs_of(train)).size());
}

TEST(TfidfVector, HandEvaluatedExample) {
  const auto v = build_vocab(docs_of({{"a", "b"}, {"a", "c"}}));
  const auto t = tfidf_vector(doc_of({"a", "b"}), v);
  // a occurs in every training doc, so its weight is exactly zero and omitted.
  ASSERT_EQ(t.nnz(), 1u);
  EXPECT_EQ(t.indices[0], *v.index_of("b"));
  EXPECT_NEAR(t.values[0], 0.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(t.values[0], 0.3466, 1e-4);
}

TEST(TfidfVector, EmptyDocAndLogBase) {
  const auto v = build_vocab(docs_of({{"a"}, {"b"}}));
  EXPECT_EQ(tfidf_vector(doc_of({}), v).nnz(), 0u);
  TfidfOptions base2;
  base2.log_base = 2.0;
  EXPECT_NEAR(tfidf_vector(doc_of({"a"}), v, base2).values[0], 1.0, 1e-15);
  TfidfOptions bad;
  bad.log_base = 1.0;
  EXPECT_THROW(tfidf_vector(doc_of({"a"}), v, bad), InvalidArgument);
}

TEST(TfidfVector, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Gen gen(100 + seed);
    const auto train = random_docs(gen, 50, 200, 20);
    const auto v = build_vocab(docs_of(train));
    ASSERT_LE(v.size(), 200u);
    const auto probes = random_docs(gen, 20, 260, 20);
    for (const auto* set : {&train, &probes}) {
      for (const auto& d : *set) {
        for (const bool normalized : {true, false}) {
          TfidfOptions o;
          o.tf_mode = normalized ? TfMode::LengthNormalized : TfMode::RawCount;
          const auto got = tfidf_vector(doc_of(d), v, o);
          const auto want = oracle::tfidf(train, d, normalized);
          ASSERT_EQ(got.nnz(), want.size());
          for (std::size_t k = 0; k < got.nnz(); ++k) {
            const auto& w = v.words()[got.indices[k]];
            ASSERT_TRUE(want.contains(w)) << w;
            EXPECT_NEAR(got.values[k], want.at(w), 1e-9);
          }
        }
      }
    }
  }
}

TEST(TfidfProperty, SupportAndTfMass) {
  Gen gen(21);
  const auto train = random_docs(gen, 30, 40, 10);
  const auto v = build_vocab(docs_of(train));
  for (const auto& d : random_docs(gen, 100, 60, 10)) {
    const auto doc = doc_of(d);
    const auto bow = bow_vector(doc, v);
    const auto tf = tfidf_vector(doc, v);
    // Identical support except where idf vanishes.
    std::set<std::uint32_t> expected;
    std::size_t in_vocab = 0;
    for (std::size_t k = 0; k < bow.nnz(); ++k) {
      in_vocab += static_cast<std::size_t>(bow.values[k]);
      if (v.doc_freq(bow.indices[k]) != v.n_docs()) expected.insert(bow.indices[k]);
    }
    EXPECT_EQ(std::set<std::uint32_t>(tf.indices.begin(), tf.indices.end()), expected);
    for (std::size_t k = 1; k < tf.nnz(); ++k) EXPECT_LT(tf.indices[k - 1], tf.indices[k]);
    // Sum of term frequencies over in-vocabulary tokens.
    if (!d.empty()) {
      EXPECT_LE(static_cast<double>(in_vocab) / static_cast<double>(d.size()), 1.0);
    }
    for (double w : tf.values) EXPECT_NE(w, 0.0);
  }
}

TEST(Embeddings, ParseFixture) {
  const auto t = parse_embeddings("a 1 2 3 4\nb 0.5 0 0 0\nc -1 -2 -3 -4\n");
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.dim(), 4u);
  const auto b = *t.find("b");
  EXPECT_EQ(std::vector<double>(b.begin(), b.end()), (std::vector<double>{0.5, 0, 0, 0}));
}

TEST(Embeddings, RaggedLineNamed) {
  try {
    parse_embeddings("a 1 2 3 4\nb 1 2 3\n", "vec.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_embeddings("a 1 x\n"), ParseError);
  EXPECT_THROW(parse_embeddings("a\n"), ParseError);
  EXPECT_THROW(load_embeddings("/nonexistent/vec.txt"), MissingResource);
}

TEST(Embeddings, KeepFilterStillChecksShape) {
  const std::unordered_set<std::string> keep{"b"};
  const auto t = parse_embeddings("a 1 2\nb 3 4\n", "<m>", &keep);
  EXPECT_EQ(t.size(), 1u);
  EXPECT_THROW(parse_embeddings("a 1 2\nb 3 4 5\n", "<m>", &keep), ParseError);
}

TEST(Embeddings, RoundTrip) {
  Gen gen(2);
  EmbeddingTable t(7);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(7);
    for (auto& x : v) x = gen.range(-3, 3);
    t.add("w" + std::to_string(i), v);
  }
  TempDir dir;
  write_file(dir / "e.txt", serialize_embeddings(t));
  EXPECT_EQ(load_embeddings(dir / "e.txt"), t);
}

TEST(PoolEmbeddings, Cases) {
  EmbeddingTable t(2);
  t.add("a", std::vector<double>{1, 0});
  t.add("b", std::vector<double>{0, 1});
  EXPECT_EQ(pool_embeddings(doc_of({"zz"}), t), (DenseVector{0, 0}));
  EXPECT_EQ(pool_embeddings(doc_of({"a"}), t), (DenseVector{1, 0}));
  EXPECT_EQ(pool_embeddings(doc_of({"a", "b"}), t), (DenseVector{0.5, 0.5}));
  // Repeats count once per occurrence; unknown tokens do not dilute.
  const auto v = pool_embeddings(doc_of({"a", "a", "b", "zz"}), t);
  EXPECT_NEAR(v[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(v[1], 1.0 / 3.0, 1e-15);
}

TEST(PoolEmbeddingsProperty, ConvexCombination) {
  Gen gen(9);
  EmbeddingTable t(5);
  for (int i = 0; i < 30; ++i) {
    std::vector<double> v(5);
    for (auto& x : v) x = gen.range(-2, 2);
    t.add("w" + std::to_string(i), v);
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> tokens;
    for (std::size_t k = 0, n = 1 + gen.index(8); k < n; ++k) tokens.push_back("w" + std::to_string(gen.index(40)));
    const auto pooled = pool_embeddings(doc_of(tokens), t);
    for (std::size_t j = 0; j < 5; ++j) {
      double lo = 0.0, hi = 0.0;
      bool any = false;
      for (const auto& w : tokens) {
        if (auto v = t.find(w)) {
          lo = any ? std::min(lo, (*v)[j]) : (*v)[j];
          hi = any ? std::max(hi, (*v)[j]) : (*v)[j];
          any = true;
        }
      }
      if (!any) {
        EXPECT_EQ(pooled[j], 0.0);
        continue;
      }
      EXPECT_GE(pooled[j], lo - 1e-12);
      EXPECT_LE(pooled[j], hi + 1e-12);
    }
  }
}

TEST(Handcrafted, Counts) {
  const StopwordSet none;
  EXPECT_EQ(handcrafted_features(preprocess("flood in houston", none)), (DenseVector{3, 16}));
  EXPECT_EQ(handcrafted_features(preprocess("", none)), (DenseVector{0, 0}));
}

TEST(HandcraftedProperty, MatchesCountingOracle) {
  Gen gen(4);
  const std::string pieces[] = {"a", "bc", " ", "  ", "\t", "é", "€", "\n", "#x", "http://u.rl"};
  for (int trial = 0; trial < 100; ++trial) {
    std::string text;
    for (std::size_t k = 0, n = gen.index(20); k < n; ++k) text += pieces[gen.index(std::size(pieces))];
    std::size_t chars = 0;
    for (unsigned char c : text) chars += (c & 0xC0) != 0x80 ? 1 : 0;
    std::size_t words = 0;
    bool in_word = false;
    for (char c : text) {
      const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
      if (!space && !in_word) ++words;
      in_word = !space;
    }
    EXPECT_EQ(handcrafted_features(preprocess(text, StopwordSet{})),
              (DenseVector{static_cast<double>(words), static_cast<double>(chars)}))
        << text;
  }
}
