#include "fusion.h"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "common.h"
#include "linalg.h"

namespace relevancy {

namespace {

constexpr std::string_view kProjectorFormat = "relevancy.svd_projector";
constexpr int kProjectorVersion = 1;

linalg::CsrMatrix to_csr(const FeatureBlock& block) {
  linalg::CsrMatrix m;
  m.rows = block.row_count();
  m.cols = block.width;
  m.row_ptr.reserve(m.rows + 1);
  if (const auto* sparse = std::get_if<SparseRows>(&block.rows)) {
    for (const auto& row : *sparse) {
      for (std::size_t k = 0; k < row.nnz(); ++k) {
        if (row.values[k] == 0.0) continue;
        m.col.push_back(row.indices[k]);
        m.val.push_back(row.values[k]);
      }
      m.row_ptr.push_back(m.col.size());
    }
  } else {
    for (const auto& row : std::get<DenseRows>(block.rows)) {
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] == 0.0) continue;
        m.col.push_back(static_cast<std::uint32_t>(j));
        m.val.push_back(row[j]);
      }
      m.row_ptr.push_back(m.col.size());
    }
  }
  return m;
}

}  // namespace

std::string_view block_name(BlockName name) {
  switch (name) {
    case BlockName::Bow: return "bow";
    case BlockName::Tfidf: return "tfidf";
    case BlockName::Embed: return "embed";
    case BlockName::Image: return "image";
    case BlockName::Handcrafted: return "handcrafted";
  }
  return "?";
}

std::optional<BlockName> parse_block_name(std::string_view text) {
  for (auto n : {BlockName::Bow, BlockName::Tfidf, BlockName::Embed, BlockName::Image, BlockName::Handcrafted}) {
    if (block_name(n) == text) return n;
  }
  return std::nullopt;
}

int block_rank(BlockName name) {
  switch (name) {
    case BlockName::Bow:
    case BlockName::Tfidf: return 0;
    case BlockName::Embed: return 1;
    case BlockName::Image: return 2;
    case BlockName::Handcrafted: return 3;
  }
  return 4;
}

std::size_t FeatureBlock::row_count() const {
  return std::visit([](const auto& r) { return r.size(); }, rows);
}

void FeatureBlock::validate() const {
  const std::string name(block_name(this->name));
  if (const auto* sparse = std::get_if<SparseRows>(&rows)) {
    for (std::size_t i = 0; i < sparse->size(); ++i) {
      const auto& row = (*sparse)[i];
      if (row.dim != width) throw InvalidArgument("block " + name + ": row " + std::to_string(i) + " has wrong width");
      for (std::size_t k = 0; k < row.nnz(); ++k) {
        if (row.indices[k] >= width) throw InvalidArgument("block " + name + ": index out of range");
        if (!std::isfinite(row.values[k])) throw InvalidArgument("block " + name + ": non-finite value");
      }
    }
  } else {
    const auto& dense = std::get<DenseRows>(rows);
    for (std::size_t i = 0; i < dense.size(); ++i) {
      if (dense[i].size() != width) throw InvalidArgument("block " + name + ": row " + std::to_string(i) + " has wrong width");
      for (double v : dense[i]) {
        if (!std::isfinite(v)) throw InvalidArgument("block " + name + ": non-finite value");
      }
    }
  }
}

SvdProjector svd_fit(const FeatureBlock& block, std::size_t k, const SvdOptions& options) {
  block.validate();
  const std::size_t n = block.row_count();
  const std::size_t d = block.width;
  const std::size_t max_rank = std::min(n, d);
  if (k < 1 || k > max_rank) {
    throw InvalidArgument("svd_fit: rank " + std::to_string(k) + " outside [1, " + std::to_string(max_rank) + "]");
  }
  const linalg::CsrMatrix a = to_csr(block);
  if (a.nnz() == 0) throw InvalidArgument("svd_fit: block '" + std::string(block_name(block.name)) + "' is all zeros");
  const linalg::CsrMatrix at = a.transpose();

  const std::size_t extra = options.oversample > 0 ? options.oversample : std::max<std::size_t>(10, k / 2);
  const std::size_t l = std::min(max_rank, k + extra);

  // Iterate on whichever Gram matrix is smaller: A^T A (d x d) or A A^T (n x n).
  // Both share the nonzero spectrum, and the final basis is mapped to d-space.
  const bool row_space = n < d;
  const std::size_t m = row_space ? n : d;
  const linalg::CsrMatrix& first = row_space ? at : a;
  const linalg::CsrMatrix& second = row_space ? a : at;

  Rng rng(options.seed);
  std::vector<double> q(m * l);
  for (auto& x : q) x = rng.normal();
  linalg::orthonormalize_columns(q, m, l, rng);

  // Rayleigh-Ritz on the current subspace; returns the worst residual of the
  // leading k pairs relative to the top eigenvalue.
  std::vector<double> mid((row_space ? d : n) * l);
  std::vector<double> z(m * l);
  const auto apply = [&](const std::vector<double>& x) {
    linalg::multiply(first, x, l, mid);
    linalg::multiply(second, mid, l, z);
  };
  const auto ritz_residual = [&] {
    std::vector<double> b = linalg::gram_product(q, z, m, l, l);
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t j = i + 1; j < l; ++j) {
        const double s = 0.5 * (b[i * l + j] + b[j * l + i]);
        b[i * l + j] = s;
        b[j * l + i] = s;
      }
    }
    const auto eig = linalg::symmetric_eigen(std::move(b), l);
    const std::vector<double> qw = linalg::matmul(q, eig.vectors, m, l, l);
    const std::vector<double> zw = linalg::matmul(z, eig.vectors, m, l, l);
    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double r2 = 0.0;
      for (std::size_t row = 0; row < m; ++row) {
        const double diff = zw[row * l + i] - eig.values[i] * qw[row * l + i];
        r2 += diff * diff;
      }
      worst = std::max(worst, std::sqrt(r2));
    }
    const double scale = std::max(eig.values[0], 0.0);
    return scale > 0.0 ? worst / scale : 0.0;
  };

  constexpr int kCheckEvery = 5;
  const int iterations = std::max(1, options.max_iterations);
  if (l < m) {
    for (int iter = 1; iter <= iterations; ++iter) {
      apply(q);
      if ((iter % kCheckEvery == 0 || iter == iterations) && ritz_residual() <= options.tolerance) break;
      q = z;
      linalg::orthonormalize_columns(q, m, l, rng);
    }
  }

  // Exact Rayleigh-Ritz in d-space: V = orth(basis), B = (A V)^T (A V).
  std::vector<double> v(d * l);
  if (row_space) {
    linalg::multiply(at, q, l, v);
  } else {
    v = q;
  }
  linalg::orthonormalize_columns(v, d, l, rng);
  std::vector<double> av(n * l);
  linalg::multiply(a, v, l, av);
  std::vector<double> b = linalg::gram_product(av, av, n, l, l);
  const auto eig = linalg::symmetric_eigen(std::move(b), l);
  const std::vector<double> ritz_vectors = linalg::matmul(v, eig.vectors, d, l, l);
  const std::vector<double>& ritz_values = eig.values;

  SvdProjector p;
  p.block = block.name;
  p.width = d;
  p.rank = k;
  p.singular_values.resize(k);
  p.basis.resize(k * d);
  for (std::size_t i = 0; i < k; ++i) {
    p.singular_values[i] = std::sqrt(std::max(ritz_values[i], 0.0));
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t row = 0; row < d; ++row) {
      const double mag = std::abs(ritz_vectors[row * l + i]);
      if (mag > best) {
        best = mag;
        arg = row;
      }
    }
    const double sign = ritz_vectors[arg * l + i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t row = 0; row < d; ++row) p.basis[i * d + row] = sign * ritz_vectors[row * l + i];
  }
  return p;
}

DenseVector svd_project(const SvdProjector& projector, const SparseVector& row) {
  if (row.dim != projector.width) {
    throw InvalidArgument("svd_project: row width " + std::to_string(row.dim) + " != projector width " +
                          std::to_string(projector.width));
  }
  DenseVector out(projector.rank, 0.0);
  for (std::size_t c = 0; c < projector.rank; ++c) {
    const double* dir = projector.basis.data() + c * projector.width;
    double s = 0.0;
    for (std::size_t k = 0; k < row.nnz(); ++k) s += row.values[k] * dir[row.indices[k]];
    out[c] = s;
  }
  return out;
}

DenseVector svd_project(const SvdProjector& projector, std::span<const double> row) {
  if (row.size() != projector.width) {
    throw InvalidArgument("svd_project: row width " + std::to_string(row.size()) + " != projector width " +
                          std::to_string(projector.width));
  }
  DenseVector out(projector.rank, 0.0);
  for (std::size_t c = 0; c < projector.rank; ++c) {
    const double* dir = projector.basis.data() + c * projector.width;
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * dir[j];
    out[c] = s;
  }
  return out;
}

DenseRows svd_project_block(const SvdProjector& projector, const FeatureBlock& block) {
  DenseRows out;
  out.reserve(block.row_count());
  std::visit([&](const auto& rows) {
    for (const auto& row : rows) out.push_back(svd_project(projector, row));
  }, block.rows);
  return out;
}

std::string serialize_projector(const SvdProjector& projector) {
  nlohmann::json j;
  j["format"] = kProjectorFormat;
  j["version"] = kProjectorVersion;
  j["block"] = block_name(projector.block);
  j["width"] = projector.width;
  j["rank"] = projector.rank;
  j["singular_values"] = projector.singular_values;
  auto basis = nlohmann::json::array();
  for (std::size_t i = 0; i < projector.rank; ++i) {
    auto dir = projector.direction(i);
    basis.push_back(std::vector<double>(dir.begin(), dir.end()));
  }
  j["basis"] = std::move(basis);
  return j.dump() + "\n";
}

SvdProjector parse_projector(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kProjectorFormat) throw ParseError("not an SVD projector file");
    if (j.at("version").get<int>() != kProjectorVersion) throw ParseError("unsupported projector version");
    SvdProjector p;
    const auto block = parse_block_name(j.at("block").get<std::string>());
    if (!block) throw ParseError("unknown block name in projector");
    p.block = *block;
    p.width = j.at("width").get<std::size_t>();
    p.rank = j.at("rank").get<std::size_t>();
    p.singular_values = j.at("singular_values").get<std::vector<double>>();
    const auto& basis = j.at("basis");
    if (p.singular_values.size() != p.rank || basis.size() != p.rank) throw ParseError("projector rank mismatch");
    p.basis.reserve(p.rank * p.width);
    for (const auto& dir : basis) {
      auto v = dir.get<std::vector<double>>();
      if (v.size() != p.width) throw ParseError("projector basis width mismatch");
      p.basis.insert(p.basis.end(), v.begin(), v.end());
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed projector: ") + e.what());
  }
}

Standardizer Standardizer::fit(const DenseRows& rows) {
  Standardizer s;
  if (rows.empty()) throw InvalidArgument("Standardizer::fit: no rows");
  const std::size_t w = rows.front().size();
  s.mean.assign(w, 0.0);
  s.scale.assign(w, 0.0);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < w; ++j) s.mean[j] += r[j];
  }
  for (auto& m : s.mean) m /= static_cast<double>(rows.size());
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < w; ++j) s.scale[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
  }
  for (auto& v : s.scale) {
    v = std::sqrt(v / static_cast<double>(rows.size()));
    if (!(v > 0.0)) v = 1.0;
  }
  return s;
}

DenseVector Standardizer::apply(std::span<const double> row) const {
  if (row.size() != mean.size()) throw InvalidArgument("Standardizer: width mismatch");
  DenseVector out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = (row[j] - mean[j]) / scale[j];
  return out;
}

std::span<const double> FusedVector::block(BlockName name) const {
  for (const auto& s : layout) {
    if (s.name == name) return std::span<const double>(values).subspan(s.offset, s.width);
  }
  throw InvalidArgument("fused vector has no block '" + std::string(block_name(name)) + "'");
}

FusedVector fuse(std::span<const BlockName> layout, std::span<const BlockVector> blocks, bool normalize) {
  FusedVector out;
  int last_rank = -1;
  for (BlockName name : layout) {
    if (block_rank(name) <= last_rank) {
      throw InvalidArgument("fuse: layout must follow text | embed | image | handcrafted order");
    }
    last_rank = block_rank(name);
    const auto it = std::find_if(blocks.begin(), blocks.end(), [&](const BlockVector& b) { return b.name == name; });
    if (it == blocks.end()) throw InvalidArgument("fuse: missing block '" + std::string(block_name(name)) + "'");

    double scale = 1.0;
    if (normalize && name != BlockName::Handcrafted) {
      double norm2 = 0.0;
      for (double v : it->values) norm2 += v * v;
      if (norm2 > 0.0) scale = 1.0 / std::sqrt(norm2);
    }
    out.layout.push_back({name, out.values.size(), it->values.size()});
    for (double v : it->values) out.values.push_back(v * scale);
  }
  return out;
}

}  // namespace relevancy
