#include "fixtures.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <vector>

#include "common.h"
#include "corpus.h"
#include "image_features.h"
#include "text_features.h"

namespace relevancy {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kNeutralWords = 400;
// Frequent cues are visible to every text family; rare cues occur too seldom
// to learn from counts and mostly help through their embeddings.
constexpr std::size_t kFrequentCuesPerClass = 6;
constexpr std::size_t kRareCuesPerClass = 300;
constexpr std::size_t kUnusedWords = 200;
constexpr double kFrequentCueRate = 0.45;
constexpr double kRareCueRate = 0.5;
constexpr double kCueFlipRate = 0.25;
constexpr double kImageShift = 0.05;

const char* const kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr", "gl"};
const char* const kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
const char* const kCodas[] = {"", "", "n", "r", "s", "k", "m", "th"};

template <std::size_t N>
const char* pick(Rng& rng, const char* const (&options)[N]) {
  return options[rng.uniform_index(N)];
}

// Pronounceable, distinct, non-stopword tokens.
std::vector<std::string> make_words(Rng& rng, std::size_t count, std::set<std::string>& taken) {
  std::vector<std::string> out;
  while (out.size() < count) {
    std::string w;
    const auto syllables = 2 + rng.uniform_index(2);
    for (std::uint64_t s = 0; s < syllables; ++s) {
      w += pick(rng, kOnsets);
      w += pick(rng, kVowels);
    }
    w += pick(rng, kCodas);
    if (builtin_stopwords().contains(w) || !taken.insert(w).second) continue;
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<double> random_normal(Rng& rng, std::size_t dim, double scale) {
  std::vector<double> v(dim);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

// Six decimal places, like typical text-exported vectors.
double tidy(double v) { return std::round(v * 1e6) / 1e6; }

std::string decorate(Rng& rng, std::string text, std::size_t index) {
  if (rng.uniform01() < 0.25) text = "RT @user" + std::to_string(rng.uniform_index(500)) + ": " + text;
  if (rng.uniform01() < 0.2) text += " @responder" + std::to_string(rng.uniform_index(50));
  if (rng.uniform01() < 0.3) text += " https://t.co/x" + std::to_string(index * 7919 % 100000);
  if (rng.uniform01() < 0.2) text += " #storm";
  if (rng.uniform01() < 0.15) text += "!!";
  if (rng.uniform01() < 0.1) text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  return text;
}

}  // namespace

FixturePaths make_fixtures(const fs::path& out_dir, const FixtureOptions& options) {
  if (options.posts < 20) throw InvalidArgument("make_fixtures: need at least 20 posts");
  if (options.embedding_dim == 0 || options.image_dim == 0) throw InvalidArgument("make_fixtures: zero dimension");
  Rng rng(mix_seed(options.seed, 0xF1));

  std::set<std::string> taken;
  const auto neutral = make_words(rng, kNeutralWords, taken);
  const std::vector<std::string> frequent[2] = {make_words(rng, kFrequentCuesPerClass, taken),
                                                make_words(rng, kFrequentCuesPerClass, taken)};
  const std::vector<std::string> rare[2] = {make_words(rng, kRareCuesPerClass, taken),
                                            make_words(rng, kRareCuesPerClass, taken)};
  const auto unused = make_words(rng, kUnusedWords, taken);

  // Word vectors: neutral and unused words are isotropic noise; cue words sit
  // around one centroid per class.
  EmbeddingTable embeddings(options.embedding_dim);
  const std::vector<double> centroid[2] = {random_normal(rng, options.embedding_dim, 1.0),
                                           random_normal(rng, options.embedding_dim, 1.0)};
  const auto add_word = [&](const std::string& word, std::vector<double> v) {
    for (auto& x : v) x = tidy(x);
    embeddings.add(word, v);
  };
  for (const auto& w : neutral) add_word(w, random_normal(rng, options.embedding_dim, 1.0));
  for (int c = 0; c < 2; ++c) {
    for (const auto* list : {&frequent[c], &rare[c]}) {
      for (const auto& w : *list) {
        auto v = random_normal(rng, options.embedding_dim, 0.6);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += centroid[c][j];
        add_word(w, std::move(v));
      }
    }
  }
  for (const auto& w : unused) add_word(w, random_normal(rng, options.embedding_dim, 1.0));

  std::vector<double> image_direction = random_normal(rng, options.image_dim, 1.0);
  ImageFeatureTable images(options.image_dim);
  std::vector<Post> posts;
  const char* const fillers[] = {"the", "is", "and", "in", "of", "to", "a", "for", "on", "we"};
  for (std::size_t i = 0; i < options.posts; ++i) {
    Post p;
    p.post_id = std::to_string(900000000000 + i * 37);
    p.event = options.event;
    const bool informative = rng.uniform01() < options.informative_rate;
    p.label = informative ? Label::Informative : Label::NotInformative;

    std::vector<std::string> words;
    const auto n_neutral = 4 + rng.uniform_index(7);
    for (std::uint64_t k = 0; k < n_neutral; ++k) {
      words.push_back(neutral[rng.uniform_index(kNeutralWords)]);
    }
    const auto cue_class = [&] { return (rng.uniform01() < kCueFlipRate) != informative ? 1 : 0; };
    if (rng.uniform01() < kFrequentCueRate) {
      words.push_back(frequent[cue_class()][rng.uniform_index(kFrequentCuesPerClass)]);
    }
    if (rng.uniform01() < kRareCueRate) words.push_back(rare[cue_class()][rng.uniform_index(kRareCuesPerClass)]);
    const auto n_fill = rng.uniform_index(3);
    for (std::uint64_t k = 0; k < n_fill; ++k) words.push_back(pick(rng, fillers));
    for (std::size_t k = words.size(); k > 1; --k) std::swap(words[k - 1], words[rng.uniform_index(k)]);
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    p.raw_text = decorate(rng, text, i);

    const bool covered = rng.uniform01() < options.image_coverage;
    const auto n_images = covered ? 1 + rng.uniform_index(2) : rng.uniform_index(2);
    for (std::uint64_t k = 0; k < n_images; ++k) {
      const std::string id = "img_" + p.post_id + "_" + std::to_string(k);
      p.image_ids.push_back(id);
      // Uncovered posts may still reference images that have no features.
      if (!covered) continue;
      std::vector<double> v(options.image_dim);
      const double sign = informative ? 1.0 : -1.0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] = tidy(std::max(0.0, 1.0 + sign * kImageShift * image_direction[j] + 0.5 * rng.normal()));
      }
      images.add(id, v);
    }
    posts.push_back(std::move(p));
  }

  fs::create_directories(out_dir);
  FixturePaths paths;
  paths.corpus = out_dir / "posts.tsv";
  paths.stopwords = out_dir / "stopwords.txt";
  paths.embeddings = out_dir / "embeddings.txt";
  paths.image_features = out_dir / "image_features.txt";
  paths.config = out_dir / "config.yaml";
  save_corpus(Corpus(std::move(posts)), paths.corpus);
  write_file(paths.stopwords, builtin_stopwords_text());
  write_file(paths.embeddings, serialize_embeddings(embeddings));
  save_image_features(images, paths.image_features);
  write_file(paths.config,
             "# Synthetic fixture experiment. Paths are relative to this file.\n"
             "seed: " + std::to_string(options.seed) + "\n"
             "paths:\n"
             "  corpus: posts.tsv\n"
             "  stopwords: stopwords.txt\n"
             "  embeddings: embeddings.txt\n"
             "  image_features: image_features.txt\n"
             "  output_dir: out\n"
             "split:\n"
             "  ratio: 0.8\n"
             "schemes: [T1+M1, T1+M2, T1+M3, T2+M1, T2+M2, T2+M3, T3+M1, T3+M2, T3+M3,\n"
             "          T2+I1+M1, T2+I1+M2, T2+I1+M3, T3+I1+M1, T3+I1+M2, T3+I1+M3]\n");
  return paths;
}

}  // namespace relevancy
