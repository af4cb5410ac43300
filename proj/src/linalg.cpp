#include "linalg.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel.h"

namespace relevancy::linalg {

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (auto c : col) ++t.row_ptr[c + 1];
  for (std::size_t i = 0; i < cols; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col.resize(nnz());
  t.val.resize(nnz());
  std::vector<std::size_t> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  // Row order is preserved inside each transposed row.
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      const std::size_t dst = cursor[col[k]]++;
      t.col[dst] = static_cast<std::uint32_t>(r);
      t.val[dst] = val[k];
    }
  }
  return t;
}

void multiply(const CsrMatrix& a, std::span<const double> x, std::size_t width, std::span<double> y) {
  parallel_for(
      a.rows,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
          double* out = y.data() + r * width;
          std::fill(out, out + width, 0.0);
          for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            const double v = a.val[k];
            const double* in = x.data() + static_cast<std::size_t>(a.col[k]) * width;
            for (std::size_t j = 0; j < width; ++j) out[j] += v * in[j];
          }
        }
      },
      16);
}

std::vector<double> gram_product(std::span<const double> a, std::span<const double> b, std::size_t n,
                                 std::size_t m, std::size_t p) {
  std::vector<double> c(m * p, 0.0);
  parallel_for(m, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double* out = c.data() + i * p;
      for (std::size_t r = 0; r < n; ++r) {
        const double ai = a[r * m + i];
        if (ai == 0.0) continue;
        const double* br = b.data() + r * p;
        for (std::size_t j = 0; j < p; ++j) out[j] += ai * br[j];
      }
    }
  });
  return c;
}

std::vector<double> matmul(std::span<const double> a, std::span<const double> b, std::size_t n, std::size_t m,
                           std::size_t p) {
  std::vector<double> c(n * p, 0.0);
  parallel_for(
      n,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
          double* out = c.data() + r * p;
          for (std::size_t i = 0; i < m; ++i) {
            const double v = a[r * m + i];
            if (v == 0.0) continue;
            const double* bi = b.data() + i * p;
            for (std::size_t j = 0; j < p; ++j) out[j] += v * bi[j];
          }
        }
      },
      16);
  return c;
}

SymmetricEigen symmetric_eigen(std::vector<double> a, std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
    return s;
  };
  double total = 0.0;
  for (double x : a) total += x * x;

  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_norm() <= 1e-32 * total || total == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        // Rotation angle chosen to annihilate a[p][q] (Golub & Van Loan 8.5).
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });
  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a[order[j] * n + order[j]];
    for (std::size_t k = 0; k < n; ++k) out.vectors[k * n + j] = v[k * n + order[j]];
  }
  return out;
}

void orthonormalize_columns(std::vector<double>& q, std::size_t rows, std::size_t cols, Rng& rng) {
  // Column-major working copy for contiguous dot products.
  std::vector<double> c(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) c[j * rows + r] = q[r * cols + j];

  const auto dot = [rows](const double* x, const double* y) {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += x[i] * y[i];
    return s;
  };

  for (std::size_t j = 0; j < cols; ++j) {
    double* v = c.data() + j * rows;
    double original = std::sqrt(dot(v, v));
    for (int attempt = 0;; ++attempt) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < j; ++i) {
          const double* u = c.data() + i * rows;
          const double proj = dot(u, v);
          for (std::size_t k = 0; k < rows; ++k) v[k] -= proj * u[k];
        }
      }
      const double norm = std::sqrt(dot(v, v));
      if (norm > 1e-10 * original && norm > 1e-300) {
        for (std::size_t k = 0; k < rows; ++k) v[k] /= norm;
        break;
      }
      if (attempt > 8 || j >= rows) throw Error("orthonormalize: cannot extend basis");
      for (std::size_t k = 0; k < rows; ++k) v[k] = rng.normal();
      original = std::sqrt(dot(v, v));
    }
  }

  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < cols; ++j) q[r * cols + j] = c[j * rows + r];
}

}  // namespace relevancy::linalg
