#pragma once

// Small dense kernels on row-major double arrays: cyclic Jacobi
// diagonalization of symmetric matrices and null spaces by Gaussian
// elimination with full pivoting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "confproj/errors.hpp"

namespace confproj {

struct EigenDecomposition {
  std::vector<double> values;   // n eigenvalues (unsorted)
  std::vector<double> vectors;  // n x n, column c is the eigenvector of values[c]
};

/// Cyclic Jacobi rotations on a symmetric n x n matrix.
inline EigenDecomposition jacobi_eigen(std::span<const double> sym, int n, int max_sweeps = 100) {
  const auto at = [n](int r, int c) { return static_cast<std::size_t>(r * n + c); };
  std::vector<double> a(sym.begin(), sym.end());
  std::vector<double> v(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) v[at(i, i)] = 1.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, total = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = 0; q < n; ++q) {
        total += a[at(p, q)] * a[at(p, q)];
        if (p != q) off += a[at(p, q)] * a[at(p, q)];
      }
    }
    if (off <= 1e-30 * total || off == 0.0) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[at(p, q)];
        if (apq == 0.0) continue;
        const double theta = (a[at(q, q)] - a[at(p, p)]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[at(k, p)], akq = a[at(k, q)];
          a[at(k, p)] = c * akp - s * akq;
          a[at(k, q)] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[at(p, k)], aqk = a[at(q, k)];
          a[at(p, k)] = c * apk - s * aqk;
          a[at(q, k)] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[at(k, p)], vkq = v[at(k, q)];
          v[at(k, p)] = c * vkp - s * vkq;
          v[at(k, q)] = s * vkp + c * vkq;
        }
      }
    }
  }
  EigenDecomposition out;
  out.values.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.values[static_cast<std::size_t>(i)] = a[at(i, i)];
  out.vectors = std::move(v);
  return out;
}

/// Null space of an m x cols matrix.  Pivots with |p| < rel_tol * (largest
/// initial |entry|) count as zero.  Returns a basis, one vector per entry.
inline std::vector<std::vector<double>> null_space(std::span<const double> matrix, int rows, int cols,
                                                   double rel_tol) {
  const auto at = [cols](int r, int c) { return static_cast<std::size_t>(r * cols + c); };
  std::vector<double> a(matrix.begin(), matrix.end());
  std::vector<int> col_perm(static_cast<std::size_t>(cols));
  std::iota(col_perm.begin(), col_perm.end(), 0);

  double largest = 0.0;
  for (double x : a) largest = std::max(largest, std::fabs(x));
  const double threshold = rel_tol * largest;

  int rank = 0;
  while (rank < std::min(rows, cols)) {
    int pr = rank, pc = rank;
    double best = -1.0;
    for (int r = rank; r < rows; ++r) {
      for (int c = rank; c < cols; ++c) {
        if (std::fabs(a[at(r, c)]) > best) {
          best = std::fabs(a[at(r, c)]);
          pr = r;
          pc = c;
        }
      }
    }
    if (best <= threshold || best == 0.0) break;
    if (pr != rank) {
      for (int c = 0; c < cols; ++c) std::swap(a[at(pr, c)], a[at(rank, c)]);
    }
    if (pc != rank) {
      for (int r = 0; r < rows; ++r) std::swap(a[at(r, pc)], a[at(r, rank)]);
      std::swap(col_perm[static_cast<std::size_t>(pc)], col_perm[static_cast<std::size_t>(rank)]);
    }
    const double p = a[at(rank, rank)];
    for (int r = rank + 1; r < rows; ++r) {
      const double f = a[at(r, rank)] / p;
      if (f == 0.0) continue;
      for (int c = rank; c < cols; ++c) a[at(r, c)] -= f * a[at(rank, c)];
    }
    ++rank;
  }

  // back-substitution, one basis vector per free column
  std::vector<std::vector<double>> basis;
  for (int free = rank; free < cols; ++free) {
    std::vector<double> y(static_cast<std::size_t>(cols), 0.0);
    y[static_cast<std::size_t>(free)] = 1.0;
    for (int r = rank - 1; r >= 0; --r) {
      double s = 0.0;
      for (int c = r + 1; c < cols; ++c) s += a[at(r, c)] * y[static_cast<std::size_t>(c)];
      y[static_cast<std::size_t>(r)] = -s / a[at(r, r)];
    }
    std::vector<double> x(static_cast<std::size_t>(cols), 0.0);
    for (int c = 0; c < cols; ++c) {
      x[static_cast<std::size_t>(col_perm[static_cast<std::size_t>(c)])] = y[static_cast<std::size_t>(c)];
    }
    basis.push_back(std::move(x));
  }
  return basis;
}

}  // namespace confproj
