#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpus.h"
#include "text_features.h"

namespace relevancy {

// Precomputed penultimate-layer activations keyed by image id.
class ImageFeatureTable {
 public:
  ImageFeatureTable() = default;
  explicit ImageFeatureTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

  // Rejects wrong length, non-finite values and duplicate ids.
  void add(std::string image_id, std::span<const double> vector);
  std::optional<std::span<const double>> find(std::string_view image_id) const;

  bool operator==(const ImageFeatureTable& other) const {
    return dim_ == other.dim_ && ids_ == other.ids_ && data_ == other.data_;
  }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// First line `dim <D>`, then `image_id v1 ... vD` per line.
ImageFeatureTable load_image_features(const std::filesystem::path& path);
ImageFeatureTable parse_image_features(std::string_view contents, std::string_view source = "<memory>");
std::string serialize_image_features(const ImageFeatureTable& table);
void save_image_features(const ImageFeatureTable& table, const std::filesystem::path& path);

struct ImageCoverage {
  std::size_t posts = 0;
  // Posts that ended up with the zero-vector fallback.
  std::size_t posts_without_features = 0;
  // Referenced image ids absent from the table.
  std::size_t missing_ids = 0;
};

// Element-wise mean over the post's images found in the table; zeros if none.
DenseVector post_image_vector(const Post& post, const ImageFeatureTable& table, ImageCoverage* coverage = nullptr);

}  // namespace relevancy
