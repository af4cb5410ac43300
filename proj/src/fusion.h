#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "text_features.h"

namespace relevancy {

enum class BlockName { Bow, Tfidf, Embed, Image, Handcrafted };

std::string_view block_name(BlockName name);
std::optional<BlockName> parse_block_name(std::string_view text);
// Position of the block in every fused layout.
int block_rank(BlockName name);

using SparseRows = std::vector<SparseVector>;
using DenseRows = std::vector<DenseVector>;

// One feature family for a set of posts; rows follow post order.
struct FeatureBlock {
  BlockName name = BlockName::Tfidf;
  std::size_t width = 0;
  std::variant<SparseRows, DenseRows> rows;

  std::size_t row_count() const;
  bool is_sparse() const { return std::holds_alternative<SparseRows>(rows); }
  // Throws on width mismatch or non-finite values.
  void validate() const;
};

// Top-k right singular subspace of an uncentered block matrix.
struct SvdProjector {
  BlockName block = BlockName::Tfidf;
  std::size_t width = 0;
  std::size_t rank = 0;
  std::vector<double> singular_values;
  // rank x width, row-major; row i is the i-th basis direction.
  std::vector<double> basis;

  std::span<const double> direction(std::size_t i) const {
    return std::span<const double>(basis).subspan(i * width, width);
  }
  bool operator==(const SvdProjector&) const = default;
};

struct SvdOptions {
  std::uint64_t seed = 0;
  // Stop when every Ritz residual of the iterated Gram matrix is below
  // tolerance * s_1^2 (checked every few iterations).
  double tolerance = 1e-10;
  int max_iterations = 500;
  // Extra subspace columns; 0 picks max(10, k / 2).
  std::size_t oversample = 0;
};

// Randomized subspace iteration with Rayleigh-Ritz extraction. Basis vectors
// are sign-normalized so their largest-magnitude coordinate is positive.
SvdProjector svd_fit(const FeatureBlock& block, std::size_t k, const SvdOptions& options = {});

DenseVector svd_project(const SvdProjector& projector, const SparseVector& row);
DenseVector svd_project(const SvdProjector& projector, std::span<const double> row);
DenseRows svd_project_block(const SvdProjector& projector, const FeatureBlock& block);

std::string serialize_projector(const SvdProjector& projector);
SvdProjector parse_projector(std::string_view text);

// Per-feature standardization fitted on training rows (used for the raw
// handcrafted counts, which bypass the SVD).
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const DenseRows& rows);
  DenseVector apply(std::span<const double> row) const;
  bool operator==(const Standardizer&) const = default;
};

struct BlockVector {
  BlockName name;
  DenseVector values;
};

struct BlockSpan {
  BlockName name;
  std::size_t offset;
  std::size_t width;
  bool operator==(const BlockSpan&) const = default;
};

struct FusedVector {
  DenseVector values;
  std::vector<BlockSpan> layout;

  std::span<const double> block(BlockName name) const;
};

// Concatenates the blocks named in `layout` (which must follow the canonical
// text | embed | image | handcrafted order). With `normalize`, every block
// except the handcrafted one is scaled to unit L2 norm; zero blocks stay zero.
FusedVector fuse(std::span<const BlockName> layout, std::span<const BlockVector> blocks, bool normalize);

}  // namespace relevancy
