#pragma once

// Conformal class at a point from null vectors: each null v gives the linear
// equation g_ij v^i v^j = 0 in the n(n+1)/2 independent components of g, and
// enough generic vectors leave a one-dimensional solution space.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "confproj/errors.hpp"
#include "confproj/linalg.hpp"

namespace confproj {

struct ConeSample {
  std::vector<double> point;
  std::vector<std::vector<double>> vectors;
};

inline std::size_t symmetric_unknowns(int n) { return static_cast<std::size_t>(n * (n + 1) / 2); }

inline std::size_t min_cone_vectors(int n) { return symmetric_unknowns(n) - 1; }

/// Unit infinity norm, first entry (row-major) above `zero_tol` made positive.
inline std::vector<double> canonicalize_conformal(std::vector<double> g, double zero_tol = 1e-10) {
  double m = 0.0;
  for (double x : g) m = std::max(m, std::fabs(x));
  if (m == 0.0) return g;
  for (double& x : g) x /= m;
  for (double x : g) {
    if (std::fabs(x) > zero_tol) {
      if (x < 0) {
        for (double& y : g) y = -y;
      }
      break;
    }
  }
  return g;
}

/// Returns the normalized n x n representative (row-major).
inline std::vector<double> reconstruct_conformal(std::span<const std::vector<double>> vectors, int n,
                                                 double rank_tol = 1e-10) {
  if (n < 2) throw std::invalid_argument("reconstruct_conformal requires n >= 2");
  if (vectors.size() < min_cone_vectors(n)) throw TooFewVectors(vectors.size(), min_cone_vectors(n));
  const int cols = static_cast<int>(symmetric_unknowns(n));
  const int rows = static_cast<int>(vectors.size());
  std::vector<double> m;
  m.reserve(static_cast<std::size_t>(rows * cols));
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != n) throw std::invalid_argument("cone vector has the wrong dimension");
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 == 0.0 || !std::isfinite(norm2)) throw std::invalid_argument("cone vectors must be nonzero and finite");
    const double inv = 1.0 / std::sqrt(norm2);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double mono = v[static_cast<std::size_t>(i)] * inv * v[static_cast<std::size_t>(j)] * inv;
        m.push_back(i == j ? mono : 2.0 * mono);
      }
    }
  }
  const auto basis = null_space(m, rows, cols, rank_tol);
  if (basis.size() != 1) throw NonGenericConfiguration(basis.size());

  std::vector<double> g(static_cast<std::size_t>(n * n));
  std::size_t c = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j, ++c) {
      g[static_cast<std::size_t>(i * n + j)] = basis[0][c];
      g[static_cast<std::size_t>(j * n + i)] = basis[0][c];
    }
  }
  return canonicalize_conformal(std::move(g), rank_tol);
}

}  // namespace confproj
