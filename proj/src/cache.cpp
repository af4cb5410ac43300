#include "cache.h"

#include <cstring>
#include <set>

#include "common.h"
#include "digest.h"

namespace relevancy {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kMagic = "RLVCACHE";
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kFeaturesKind = 1;
constexpr std::uint32_t kFusionKind = 2;
constexpr std::size_t kChecksumSize = 64;

class Writer {
 public:
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(std::string_view s) {
    u64(s.size());
    out_.append(s);
  }
  void f64s(const std::vector<double>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
  }
  void u32s(const std::vector<std::uint32_t>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(std::uint32_t));
  }
  void sizes(const std::vector<std::size_t>& v) {
    u64(v.size());
    for (auto x : v) u64(x);
  }
  std::string take() { return std::move(out_); }

 private:
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : in_(bytes) {}

  std::uint32_t u32() { return scalar<std::uint32_t>(); }
  std::uint64_t u64() { return scalar<std::uint64_t>(); }
  double f64() { return scalar<double>(); }
  std::string str() {
    const auto n = count(1);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<double> f64s() { return array<double>(); }
  std::vector<std::uint32_t> u32s() { return array<std::uint32_t>(); }
  std::vector<std::size_t> sizes() {
    const auto n = count(sizeof(std::uint64_t));
    std::vector<std::size_t> v(n);
    for (auto& x : v) x = u64();
    return v;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  template <typename T>
  T scalar() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  template <typename T>
  std::vector<T> array() {
    const auto n = count(sizeof(T));
    std::vector<T> v(n);
    if (n > 0) std::memcpy(v.data(), in_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return v;
  }
  std::size_t count(std::size_t elem) {
    const auto n = u64();
    if (elem != 0 && n > (in_.size() - pos_) / elem) throw ParseError("cache entry truncated");
    return static_cast<std::size_t>(n);
  }
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw ParseError("cache entry truncated");
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

void write_block(Writer& w, const FeatureBlock& b) {
  w.u32(static_cast<std::uint32_t>(b.name));
  w.u64(b.width);
  if (const auto* sparse = std::get_if<SparseRows>(&b.rows)) {
    w.u32(1);
    w.u64(sparse->size());
    for (const auto& r : *sparse) {
      w.u32s(r.indices);
      w.f64s(r.values);
    }
  } else {
    const auto& dense = std::get<DenseRows>(b.rows);
    w.u32(0);
    w.u64(dense.size());
    for (const auto& r : dense) w.f64s(r);
  }
}

BlockName read_block_name(Reader& r) {
  const auto v = r.u32();
  if (v > static_cast<std::uint32_t>(BlockName::Handcrafted)) throw ParseError("cache entry has unknown block");
  return static_cast<BlockName>(v);
}

FeatureBlock read_block(Reader& r) {
  FeatureBlock b;
  b.name = read_block_name(r);
  b.width = r.u64();
  const bool sparse = r.u32() == 1;
  const auto n = r.u64();
  if (sparse) {
    SparseRows rows;
    for (std::uint64_t i = 0; i < n; ++i) {
      SparseVector v;
      v.dim = b.width;
      v.indices = r.u32s();
      v.values = r.f64s();
      rows.push_back(std::move(v));
    }
    b.rows = std::move(rows);
  } else {
    DenseRows rows;
    for (std::uint64_t i = 0; i < n; ++i) rows.push_back(r.f64s());
    b.rows = std::move(rows);
  }
  try {
    b.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("cache entry: ") + e.what());
  }
  return b;
}

std::string frame(std::uint32_t kind, std::string body) {
  Writer w;
  std::string out(kMagic);
  w.u32(kVersion);
  w.u32(kind);
  out += w.take();
  out += body;
  out += sha256_hex(out);
  return out;
}

std::string_view unframe(std::uint32_t kind, std::string_view bytes) {
  const std::size_t header = kMagic.size() + 2 * sizeof(std::uint32_t);
  if (bytes.size() < header + kChecksumSize) throw ParseError("cache entry truncated");
  const auto body_end = bytes.size() - kChecksumSize;
  if (sha256_hex(bytes.substr(0, body_end)) != bytes.substr(body_end)) throw ParseError("cache entry checksum mismatch");
  if (bytes.substr(0, kMagic.size()) != kMagic) throw ParseError("cache entry has bad magic");
  Reader r(bytes.substr(kMagic.size(), 2 * sizeof(std::uint32_t)));
  if (r.u32() != kVersion) throw ParseError("cache entry version mismatch");
  if (r.u32() != kind) throw ParseError("cache entry kind mismatch");
  return bytes.substr(header, body_end - header);
}

std::optional<std::string> read_entry(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  return read_file(path);
}

}  // namespace

std::string encode_features(const EventFeatures& f) {
  Writer w;
  w.str(f.event);
  w.u64(f.post_ids.size());
  for (const auto& id : f.post_ids) w.str(id);
  w.u64(f.labels.size());
  for (int y : f.labels) w.u32(static_cast<std::uint32_t>(y));
  w.sizes(f.train_rows);
  w.sizes(f.test_rows);
  w.u64(f.vocab.n_docs());
  w.u64(f.vocab.size());
  for (const auto& word : f.vocab.words()) w.str(word);
  w.u32s(f.vocab.doc_freqs());
  w.u64(f.coverage.posts);
  w.u64(f.coverage.posts_without_features);
  w.u64(f.coverage.missing_ids);
  w.u64(f.blocks.size());
  for (const auto& b : f.blocks) write_block(w, b);
  return frame(kFeaturesKind, w.take());
}

EventFeatures decode_features(std::string_view bytes) {
  Reader r(unframe(kFeaturesKind, bytes));
  EventFeatures f;
  f.event = r.str();
  const auto n_ids = r.u64();
  for (std::uint64_t i = 0; i < n_ids; ++i) f.post_ids.push_back(r.str());
  const auto n_labels = r.u64();
  for (std::uint64_t i = 0; i < n_labels; ++i) f.labels.push_back(static_cast<int>(r.u32()));
  f.train_rows = r.sizes();
  f.test_rows = r.sizes();
  const auto n_docs = r.u64();
  const auto n_words = r.u64();
  std::vector<std::string> words;
  for (std::uint64_t i = 0; i < n_words; ++i) words.push_back(r.str());
  auto df = r.u32s();
  try {
    f.vocab = Vocabulary(std::move(words), std::move(df), n_docs);
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("cache entry: ") + e.what());
  }
  f.coverage.posts = r.u64();
  f.coverage.posts_without_features = r.u64();
  f.coverage.missing_ids = r.u64();
  const auto n_blocks = r.u64();
  for (std::uint64_t i = 0; i < n_blocks; ++i) f.blocks.push_back(read_block(r));
  if (!r.done()) throw ParseError("cache entry has trailing bytes");
  return f;
}

std::string encode_fusion(const FusionArtifacts& fusion) {
  Writer w;
  w.u64(fusion.projectors.size());
  for (const auto& p : fusion.projectors) {
    w.u32(static_cast<std::uint32_t>(p.block));
    w.u64(p.width);
    w.u64(p.rank);
    w.f64s(p.singular_values);
    w.f64s(p.basis);
  }
  w.u32(fusion.standardizer ? 1 : 0);
  if (fusion.standardizer) {
    w.f64s(fusion.standardizer->mean);
    w.f64s(fusion.standardizer->scale);
  }
  w.u64(fusion.reduced.size());
  for (const auto& b : fusion.reduced) write_block(w, b);
  return frame(kFusionKind, w.take());
}

FusionArtifacts decode_fusion(std::string_view bytes) {
  Reader r(unframe(kFusionKind, bytes));
  FusionArtifacts fusion;
  const auto n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    SvdProjector p;
    p.block = read_block_name(r);
    p.width = r.u64();
    p.rank = r.u64();
    p.singular_values = r.f64s();
    p.basis = r.f64s();
    if (p.singular_values.size() != p.rank || p.basis.size() != p.rank * p.width) {
      throw ParseError("cache entry has inconsistent projector shape");
    }
    fusion.projectors.push_back(std::move(p));
  }
  if (r.u32() == 1) {
    Standardizer s;
    s.mean = r.f64s();
    s.scale = r.f64s();
    fusion.standardizer = std::move(s);
  }
  const auto n_blocks = r.u64();
  for (std::uint64_t i = 0; i < n_blocks; ++i) fusion.reduced.push_back(read_block(r));
  if (!r.done()) throw ParseError("cache entry has trailing bytes");
  return fusion;
}

FeatureCache::FeatureCache(fs::path dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled) {}

namespace {

template <typename T, typename Decode>
std::optional<T> load_entry(const fs::path& path, bool enabled, CacheCounters& counters, Decode decode) {
  if (!enabled) return std::nullopt;
  const auto bytes = read_entry(path);
  if (!bytes) {
    ++counters.misses;
    return std::nullopt;
  }
  try {
    auto value = decode(*bytes);
    ++counters.hits;
    return value;
  } catch (const ParseError& e) {
    log_warning("discarding corrupted cache file " + path.string() + " (" + e.what() + "); regenerating");
    ++counters.corrupt;
    ++counters.misses;
    return std::nullopt;
  }
}

void store_entry(const fs::path& path, bool enabled, const std::string& bytes) {
  if (!enabled) return;
  // Write then rename so a crash never leaves a half-written entry in place.
  fs::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, bytes);
  fs::rename(tmp, path);
}

}  // namespace

std::optional<EventFeatures> FeatureCache::load_features(const std::string& key) {
  return load_entry<EventFeatures>(dir_ / ("features-" + key + ".bin"), enabled_, features_, decode_features);
}

void FeatureCache::store_features(const std::string& key, const EventFeatures& features) {
  store_entry(dir_ / ("features-" + key + ".bin"), enabled_, encode_features(features));
}

std::optional<FusionArtifacts> FeatureCache::load_fusion(const std::string& key) {
  return load_entry<FusionArtifacts>(dir_ / ("fusion-" + key + ".bin"), enabled_, fusion_, decode_fusion);
}

void FeatureCache::store_fusion(const std::string& key, const FusionArtifacts& fusion) {
  store_entry(dir_ / ("fusion-" + key + ".bin"), enabled_, encode_fusion(fusion));
}

std::string features_cache_key(const Resources& resources, const std::string& event, const RunConfig& config,
                               std::uint64_t seed) {
  std::set<BlockName> blocks;
  for (const auto& s : config.schemes) {
    for (auto b : effective_layout(s, config)) blocks.insert(b);
  }
  Digest d;
  d.field("features/v1").field(resources.input_digest).field(event);
  d.field(format_double(config.split_ratio)).field(std::to_string(seed));
  d.field(config.text.tf_mode == TfMode::RawCount ? "raw_count" : "length_normalized");
  d.field(format_double(config.text.log_base));
  for (auto b : blocks) d.field(block_name(b));
  return d.hex();
}

std::string fusion_cache_key(const std::string& features_key, const RunConfig& config) {
  Digest d;
  d.field("fusion/v1").field(features_key);
  d.field(std::to_string(config.fusion.k_text)).field(std::to_string(config.fusion.k_embed));
  d.field(std::to_string(config.fusion.k_image));
  d.field(format_double(config.fusion.svd_tolerance)).field(std::to_string(config.fusion.svd_max_iterations));
  return d.hex();
}

}  // namespace relevancy
