#include "corpus.h"

#include <cmath>
#include <unordered_map>

#include "common.h"

namespace relevancy {

namespace {

constexpr std::string_view kHeader = "post_id\ttext\timage_ids\tlabel\tevent";

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_word_char(unsigned char c) { return is_ascii_alnum(c) || c == '_'; }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool starts_with_nocase(std::string_view text, std::size_t pos, std::string_view prefix) {
  if (text.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (ascii_lower(text[pos + i]) != prefix[i]) return false;
  }
  return true;
}

std::string unescape_field(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] == '\\' && i + 1 < field.size()) {
      const char next = field[i + 1];
      if (next == 't') { out.push_back('\t'); ++i; continue; }
      if (next == 'n') { out.push_back('\n'); ++i; continue; }
      if (next == 'r') { out.push_back('\r'); ++i; continue; }
      if (next == '\\') { out.push_back('\\'); ++i; continue; }
    }
    out.push_back(field[i]);
  }
  return out;
}

std::string escape_field(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (char c : field) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Decodes one UTF-8 sequence at pos. Returns the code point (or -1 when the
// sequence is malformed) and advances pos past it.
long decode_utf8(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  int len = 0;
  long cp = 0;
  if (b0 < 0x80) { ++pos; return b0; }
  if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
  else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
  else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
  else { ++pos; return -1; }
  if (pos + static_cast<std::size_t>(len) > s.size()) { ++pos; return -1; }
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + static_cast<std::size_t>(i)]);
    if ((b & 0xC0) != 0x80) { ++pos; return -1; }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += static_cast<std::size_t>(len);
  return cp;
}

void append_utf8(std::string& out, long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    // Only Latin-1 letters are ever re-encoded.
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_latin1_letter(long cp) { return cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7; }

std::string strip_urls(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (starts_with_nocase(text, i, "http://") || starts_with_nocase(text, i, "https://") ||
        starts_with_nocase(text, i, "www.")) {
      while (i < text.size() && !is_ascii_space(static_cast<unsigned char>(text[i]))) ++i;
      out.push_back(' ');
      continue;
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string strip_retweet_and_mentions(std::string_view text) {
  // Leading RT markers, possibly repeated ("RT RT: ...").
  std::size_t start = 0;
  while (true) {
    std::size_t p = start;
    while (p < text.size() && is_ascii_space(static_cast<unsigned char>(text[p]))) ++p;
    if (!starts_with_nocase(text, p, "rt")) break;
    std::size_t q = p + 2;
    if (q < text.size() && text[q] == ':') ++q;
    if (q < text.size() && !is_ascii_space(static_cast<unsigned char>(text[q]))) break;
    start = q;
  }
  std::string out;
  out.reserve(text.size() - start);
  for (std::size_t i = start; i < text.size();) {
    if (text[i] == '@' && i + 1 < text.size() && is_word_char(static_cast<unsigned char>(text[i + 1]))) {
      ++i;
      while (i < text.size() && is_word_char(static_cast<unsigned char>(text[i]))) ++i;
      out.push_back(' ');
      continue;
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string strip_symbols_and_lowercase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const long cp = decode_utf8(text, pos);
    if (cp >= 0 && cp < 0x80) {
      const auto c = static_cast<unsigned char>(cp);
      out.push_back(is_ascii_alnum(c) ? ascii_lower(static_cast<char>(c)) : ' ');
    } else if (is_latin1_letter(cp)) {
      const long lower = (cp <= 0xDE && cp != 0xD7) ? cp + 0x20 : cp;
      append_utf8(out, lower);
    } else {
      out.push_back(' ');
    }
  }
  return out;
}

}  // namespace

std::string_view label_name(Label label) {
  return label == Label::Informative ? "informative" : "not_informative";
}

Corpus::Corpus(std::vector<Post> posts) : posts_(std::move(posts)) {
  std::unordered_map<std::string_view, std::size_t> seen;
  seen.reserve(posts_.size());
  for (std::size_t i = 0; i < posts_.size(); ++i) {
    const Post& p = posts_[i];
    if (p.post_id.empty()) throw InvalidArgument("post at index " + std::to_string(i) + " has empty post_id");
    if (!seen.emplace(p.post_id, i).second) throw InvalidArgument("duplicate post_id '" + p.post_id + "'");
    if (p.label == Label::Informative) ++counts_.informative;
    else ++counts_.not_informative;
  }
}

std::vector<std::string> Corpus::events() const {
  std::vector<std::string> out;
  std::unordered_set<std::string_view> seen;
  for (const auto& p : posts_) {
    if (seen.insert(p.event).second) out.push_back(p.event);
  }
  return out;
}

Corpus Corpus::filter_event(std::string_view event) const {
  std::vector<Post> kept;
  for (const auto& p : posts_) {
    if (p.event == event) kept.push_back(p);
  }
  return Corpus(std::move(kept));
}

Corpus parse_corpus(std::string_view contents, std::string_view source) {
  const auto where = [&](std::size_t row) {
    return std::string(source) + ": row " + std::to_string(row);
  };
  std::vector<std::string_view> lines = split_view(contents, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(std::string(source) + ": empty file, expected header");

  std::string_view header = lines[0];
  if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  if (header != kHeader) {
    throw ParseError(std::string(source) + ": header must be 'post_id<TAB>text<TAB>image_ids<TAB>label<TAB>event'");
  }

  std::vector<Post> posts;
  posts.reserve(lines.size() - 1);
  std::unordered_map<std::string, std::size_t> id_rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t row = i + 1;  // 1-based file line
    std::string_view line = lines[i];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split_view(line, '\t');
    if (fields.size() != 5) {
      throw ParseError(where(row) + ": expected 5 tab-separated fields, found " + std::to_string(fields.size()));
    }
    Post post;
    post.post_id = std::string(trim(fields[0]));
    if (post.post_id.empty()) throw ParseError(where(row) + ": empty post_id");
    post.raw_text = unescape_field(fields[1]);
    const std::string_view images = trim(fields[2]);
    if (!images.empty()) {
      for (auto id : split_view(images, ',')) {
        id = trim(id);
        if (!id.empty()) post.image_ids.emplace_back(id);
      }
    }
    const std::string_view label = trim(fields[3]);
    if (label == "informative") post.label = Label::Informative;
    else if (label == "not_informative") post.label = Label::NotInformative;
    else if (label.empty()) throw ParseError(where(row) + ": missing label");
    else throw ParseError(where(row) + ": unknown label '" + std::string(label) + "'");
    post.event = std::string(trim(fields[4]));

    auto [it, inserted] = id_rows.emplace(post.post_id, row);
    if (!inserted) {
      throw ParseError(where(row) + ": duplicate post_id '" + post.post_id + "' (first seen at row " +
                       std::to_string(it->second) + ")");
    }
    posts.push_back(std::move(post));
  }
  return Corpus(std::move(posts));
}

Corpus load_corpus(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingResource("corpus file not found: " + path.string());
  return parse_corpus(read_file(path), path.string());
}

std::string serialize_corpus(const Corpus& corpus) {
  std::string out(kHeader);
  out.push_back('\n');
  for (const auto& p : corpus.posts()) {
    out += p.post_id;
    out.push_back('\t');
    out += escape_field(p.raw_text);
    out.push_back('\t');
    for (std::size_t i = 0; i < p.image_ids.size(); ++i) {
      if (i) out.push_back(',');
      out += p.image_ids[i];
    }
    out.push_back('\t');
    out += label_name(p.label);
    out.push_back('\t');
    out += p.event;
    out.push_back('\n');
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_file(path, serialize_corpus(corpus));
}

StopwordSet parse_stopwords(std::string_view contents) {
  StopwordSet words;
  for (auto line : split_view(contents, '\n')) {
    line = trim(line);
    if (line.empty()) continue;
    std::string w(line);
    for (auto& c : w) c = ascii_lower(c);
    words.insert(std::move(w));
  }
  return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingResource("stopword file not found: " + path.string());
  return parse_stopwords(read_file(path));
}

const StopwordSet& builtin_stopwords() {
  static const StopwordSet words = parse_stopwords(builtin_stopwords_text());
  return words;
}

std::size_t count_whitespace_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = is_ascii_space(static_cast<unsigned char>(c));
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

std::size_t count_code_points(std::string_view utf8) {
  std::size_t count = 0;
  for (char c : utf8) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++count;
  }
  return count;
}

TokenizedDoc preprocess(std::string_view raw_text, const StopwordSet& stopwords) {
  TokenizedDoc doc;
  doc.raw_word_count = count_whitespace_tokens(raw_text);
  doc.raw_char_count = count_code_points(raw_text);

  const std::string cleaned = strip_symbols_and_lowercase(strip_retweet_and_mentions(strip_urls(raw_text)));

  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && cleaned[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < cleaned.size() && cleaned[i] != ' ') ++i;
    if (i > start) {
      std::string token = cleaned.substr(start, i - start);
      if (!stopwords.contains(token)) doc.tokens.push_back(std::move(token));
    }
  }
  return doc;
}

TokenizedDoc preprocess(const Post& post, const StopwordSet& stopwords) {
  TokenizedDoc doc = preprocess(post.raw_text, stopwords);
  doc.post_id = post.post_id;
  return doc;
}

SplitIndices split(const Corpus& corpus, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw InvalidArgument("split ratio must lie strictly between 0 and 1, got " + format_double(ratio));
  }
  if (corpus.empty()) throw InvalidArgument("cannot split an empty corpus");

  const std::size_t n = corpus.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.uniform_index(i + 1);
    std::swap(order[i], order[j]);
  }

  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  SplitIndices out;
  out.seed = seed;
  out.ratio = ratio;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t row = order[i];
    if (i < n_train) {
      out.train_rows.push_back(row);
      out.train_ids.push_back(corpus.posts()[row].post_id);
    } else {
      out.test_rows.push_back(row);
      out.test_ids.push_back(corpus.posts()[row].post_id);
    }
  }
  return out;
}

}  // namespace relevancy
