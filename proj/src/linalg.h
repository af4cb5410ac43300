#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "common.h"

namespace relevancy::linalg {

// Compressed sparse rows.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  std::size_t nnz() const { return val.size(); }
  CsrMatrix transpose() const;
};

// Y (A.rows x width) = A * X (A.cols x width); both row-major.
void multiply(const CsrMatrix& a, std::span<const double> x, std::size_t width, std::span<double> y);

// C (m x p) = A^T B for row-major A (n x m) and B (n x p).
std::vector<double> gram_product(std::span<const double> a, std::span<const double> b, std::size_t n,
                                 std::size_t m, std::size_t p);

// C (n x p) = A B for row-major A (n x m) and B (m x p).
std::vector<double> matmul(std::span<const double> a, std::span<const double> b, std::size_t n, std::size_t m,
                           std::size_t p);

// Cyclic Jacobi eigen-decomposition of a symmetric n x n matrix (row-major).
// Eigenvalues come back in descending order; column j of `vectors` (row-major
// n x n) is the eigenvector for values[j].
struct SymmetricEigen {
  std::vector<double> values;
  std::vector<double> vectors;
};
SymmetricEigen symmetric_eigen(std::vector<double> a, std::size_t n);

// Orthonormalizes the columns of a row-major rows x cols matrix in place with
// two passes of modified Gram-Schmidt. Columns that collapse numerically are
// replaced by random directions orthogonal to the earlier ones.
void orthonormalize_columns(std::vector<double>& q, std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace relevancy::linalg
