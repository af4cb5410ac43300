#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace relevancy {

// Row-major dense matrix.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  std::span<double> row(std::size_t i) { return std::span<double>(data).subspan(i * cols, cols); }
  std::span<const double> row(std::size_t i) const { return std::span<const double>(data).subspan(i * cols, cols); }
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

}  // namespace relevancy
