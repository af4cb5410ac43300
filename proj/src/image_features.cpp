#include "image_features.h"

#include <cmath>
#include <fstream>

#include "common.h"

namespace relevancy {

void ImageFeatureTable::add(std::string image_id, std::span<const double> vector) {
  if (vector.size() != dim_) {
    throw ParseError("image '" + image_id + "': expected " + std::to_string(dim_) + " values, found " +
                     std::to_string(vector.size()));
  }
  for (double v : vector) {
    if (!std::isfinite(v)) throw ParseError("image '" + image_id + "': non-finite value");
  }
  if (!index_.emplace(image_id, ids_.size()).second) {
    throw ParseError("duplicate image_id '" + image_id + "'");
  }
  ids_.push_back(std::move(image_id));
  data_.insert(data_.end(), vector.begin(), vector.end());
}

std::optional<std::span<const double>> ImageFeatureTable::find(std::string_view image_id) const {
  const auto it = index_.find(std::string(image_id));
  if (it == index_.end()) return std::nullopt;
  return std::span<const double>(data_.data() + it->second * dim_, dim_);
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

class ImageFeatureParser {
 public:
  explicit ImageFeatureParser(std::string_view source) : source_(source) {}

  void line(std::string_view text, std::size_t line_no) {
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (trim(text).empty()) return;
    const auto fields = split_spaces(text);
    const auto where = [&] { return std::string(source_) + ": line " + std::to_string(line_no); };
    if (!table_) {
      if (fields.size() != 2 || fields[0] != "dim") throw ParseError(where() + ": expected header 'dim <D>'");
      const auto dim = parse_int(fields[1]);
      if (!dim || *dim <= 0) throw ParseError(where() + ": invalid dimension '" + std::string(fields[1]) + "'");
      table_.emplace(static_cast<std::size_t>(*dim));
      return;
    }
    std::string id(fields[0]);
    if (fields.size() - 1 != table_->dim()) {
      throw ParseError(where() + ": image '" + id + "' has " + std::to_string(fields.size() - 1) +
                       " values, header dim is " + std::to_string(table_->dim()));
    }
    values_.resize(table_->dim());
    for (std::size_t k = 0; k < values_.size(); ++k) {
      auto v = parse_double(fields[k + 1]);
      if (!v) throw ParseError(where() + ": image '" + id + "' has non-numeric value '" + std::string(fields[k + 1]) + "'");
      if (!std::isfinite(*v)) throw ParseError(where() + ": image '" + id + "' has non-finite value");
      values_[k] = *v;
    }
    try {
      table_->add(std::move(id), values_);
    } catch (const ParseError& e) {
      throw ParseError(where() + ": " + e.what());
    }
  }

  ImageFeatureTable finish() {
    if (!table_) throw ParseError(std::string(source_) + ": missing 'dim <D>' header");
    return std::move(*table_);
  }

 private:
  std::string_view source_;
  std::optional<ImageFeatureTable> table_;
  std::vector<double> values_;
};

}  // namespace

ImageFeatureTable parse_image_features(std::string_view contents, std::string_view source) {
  ImageFeatureParser parser(source);
  std::size_t line_no = 0;
  for (auto line : split_view(contents, '\n')) parser.line(line, ++line_no);
  return parser.finish();
}

ImageFeatureTable load_image_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingResource("image feature file not found: " + path.string());
  const std::string source = path.string();
  ImageFeatureParser parser(source);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) parser.line(line, ++line_no);
  return parser.finish();
}

std::string serialize_image_features(const ImageFeatureTable& table) {
  std::string out = "dim " + std::to_string(table.dim()) + "\n";
  for (const auto& id : table.ids()) {
    out += id;
    const auto vec = *table.find(id);
    for (double v : vec) {
      out.push_back(' ');
      out += format_double(v);
    }
    out.push_back('\n');
  }
  return out;
}

void save_image_features(const ImageFeatureTable& table, const std::filesystem::path& path) {
  write_file(path, serialize_image_features(table));
}

DenseVector post_image_vector(const Post& post, const ImageFeatureTable& table, ImageCoverage* coverage) {
  DenseVector out(table.dim(), 0.0);
  std::size_t used = 0;
  std::size_t missing = 0;
  for (const auto& id : post.image_ids) {
    auto vec = table.find(id);
    if (!vec) {
      ++missing;
      continue;
    }
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += (*vec)[k];
    ++used;
  }
  if (used > 1) {
    for (auto& v : out) v /= static_cast<double>(used);
  }
  if (coverage != nullptr) {
    ++coverage->posts;
    coverage->missing_ids += missing;
    if (used == 0) ++coverage->posts_without_features;
  }
  return out;
}

}  // namespace relevancy
