#pragma once

// Pointwise tensor kernels on jets: metric inversion, Levi-Civita symbols,
// Thomas symbols and the conformal / projective changes of representative.
// Indices are 0-based; connection slots are (i, j, k) for Gamma^i_jk.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "confproj/errors.hpp"
#include "confproj/jet.hpp"

namespace confproj {

inline constexpr double kDefaultRankTolerance = 1e-10;

/// Symmetric n x n array of jets (g_ij or g^ij).
class MetricValue {
 public:
  MetricValue() = default;
  MetricValue(int n, int order) : n_(n), g_(sq(n), Jet::constant(0.0, n, order)) {}

  static MetricValue from_values(std::span<const double> rows, int n, int order = 0) {
    MetricValue m(n, order);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        m.set(i, j, Jet::constant(rows[static_cast<std::size_t>(i * n + j)], n, order));
      }
    }
    return m;
  }

  int dim() const noexcept { return n_; }
  int order() const {
    int d = Jet::kMaxOrder;
    for (const Jet& x : g_) d = std::min(d, x.order());
    return d;
  }

  const Jet& operator()(int i, int j) const { return g_[idx(i, j)]; }

  /// Writes both (i, j) and (j, i).
  void set(int i, int j, const Jet& v) {
    g_[idx(i, j)] = v;
    g_[idx(j, i)] = v;
  }

  std::vector<double> values() const {
    std::vector<double> v(g_.size());
    std::transform(g_.begin(), g_.end(), v.begin(), [](const Jet& x) { return x.value(); });
    return v;
  }

  double max_abs() const {
    double m = 0.0;
    for (const Jet& x : g_) m = std::max(m, std::fabs(x.value()));
    return m;
  }

 private:
  static std::size_t sq(int n) { return static_cast<std::size_t>(n) * static_cast<std::size_t>(n); }
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i * n_ + j); }

  int n_ = 0;
  std::vector<Jet> g_;
};

/// Symmetric linear connection Gamma^i_jk as jets.
class ConnectionValue {
 public:
  ConnectionValue() = default;
  ConnectionValue(int n, int order)
      : n_(n), c_(static_cast<std::size_t>(n * n * n), Jet::constant(0.0, n, order)) {}

  int dim() const noexcept { return n_; }
  int order() const {
    int d = Jet::kMaxOrder;
    for (const Jet& x : c_) d = std::min(d, x.order());
    return d;
  }

  const Jet& operator()(int i, int j, int k) const { return c_[idx(i, j, k)]; }

  /// Writes both (i, j, k) and (i, k, j).
  void set(int i, int j, int k, const Jet& v) {
    c_[idx(i, j, k)] = v;
    c_[idx(i, k, j)] = v;
  }

  double max_abs() const {
    double m = 0.0;
    for (const Jet& x : c_) m = std::max(m, std::fabs(x.value()));
    return m;
  }

 private:
  std::size_t idx(int i, int j, int k) const { return static_cast<std::size_t>((i * n_ + j) * n_ + k); }

  int n_ = 0;
  std::vector<Jet> c_;
};

/// Pi^i_jk values at a point.
struct ThomasValue {
  int n = 0;
  std::vector<double> pi;

  double operator()(int i, int j, int k) const {
    return pi[static_cast<std::size_t>((i * n + j) * n + k)];
  }
};

using OneFormValue = std::vector<Jet>;
using VectorValue = std::vector<Jet>;

inline double delta(int i, int j) { return i == j ? 1.0 : 0.0; }

/// Determinant of the value part (LU with partial pivoting).
inline double determinant(const MetricValue& g) {
  const int n = g.dim();
  std::vector<double> a = g.values();
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::fabs(a[static_cast<std::size_t>(r * n + c)]) >
          std::fabs(a[static_cast<std::size_t>(piv * n + c)]))
        piv = r;
    }
    const double p = a[static_cast<std::size_t>(piv * n + c)];
    if (p == 0.0) return 0.0;
    if (piv != c) {
      for (int k = 0; k < n; ++k) {
        std::swap(a[static_cast<std::size_t>(piv * n + k)], a[static_cast<std::size_t>(c * n + k)]);
      }
      det = -det;
    }
    det *= p;
    for (int r = c + 1; r < n; ++r) {
      const double f = a[static_cast<std::size_t>(r * n + c)] / p;
      for (int k = c; k < n; ++k) {
        a[static_cast<std::size_t>(r * n + k)] -= f * a[static_cast<std::size_t>(c * n + k)];
      }
    }
  }
  return det;
}

/// Throws DegenerateMetric when |det| < tol * (max |g_ij|)^n.
inline void require_nondegenerate(const MetricValue& g, double rank_tol = kDefaultRankTolerance) {
  const double det = determinant(g);
  const double scale = std::pow(g.max_abs(), g.dim());
  if (!(std::fabs(det) >= rank_tol * scale) || scale == 0.0) throw DegenerateMetric(det);
}

/// g^{-1} by Gauss-Jordan elimination over the jet ring, pivoting on values.
inline MetricValue invert_metric(const MetricValue& g, double rank_tol = kDefaultRankTolerance) {
  require_nondegenerate(g, rank_tol);
  const int n = g.dim();
  const int order = g.order();
  const auto at = [n](int r, int c) { return static_cast<std::size_t>(r * 2 * n + c); };
  std::vector<Jet> a(static_cast<std::size_t>(2 * n * n), Jet::constant(0.0, n, order));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) a[at(r, c)] = g(r, c).truncated(order);
    a[at(r, n + r)] = Jet::constant(1.0, n, order);
  }
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::fabs(a[at(r, c)].value()) > std::fabs(a[at(piv, c)].value())) piv = r;
    }
    if (piv != c) {
      for (int k = 0; k < 2 * n; ++k) std::swap(a[at(piv, k)], a[at(c, k)]);
    }
    const Jet inv_p = reciprocal(a[at(c, c)]);
    for (int k = 0; k < 2 * n; ++k) a[at(c, k)] = a[at(c, k)] * inv_p;
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const Jet f = a[at(r, c)];
      if (f.value() == 0.0 && f == Jet::constant(0.0, n, order)) continue;
      for (int k = 0; k < 2 * n; ++k) a[at(r, k)] = a[at(r, k)] - f * a[at(c, k)];
    }
  }
  MetricValue inv(n, order);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      // average the two mirror entries so the inverse is exactly symmetric
      inv.set(i, j, (a[at(i, n + j)] + a[at(j, n + i)]) * 0.5);
    }
  }
  return inv;
}

/// Levi-Civita symbols of g; output order is g.order() - 1.
inline ConnectionValue christoffel(const MetricValue& g, const MetricValue& g_inv) {
  const int n = g.dim();
  if (g.order() < 1) throw std::invalid_argument("christoffel needs a metric jet of order >= 1");
  const int out_order = g.order() - 1;
  // dg[(p*n + j)*n + k] = d_k g_pj
  std::vector<Jet> dg;
  dg.reserve(static_cast<std::size_t>(n * n * n));
  for (int p = 0; p < n; ++p) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) dg.push_back(partial(g(p, j), k));
    }
  }
  const auto d = [&](int p, int j, int k) -> const Jet& {
    return dg[static_cast<std::size_t>((p * n + j) * n + k)];
  };
  ConnectionValue gamma(n, out_order);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        Jet sum = Jet::constant(0.0, n, out_order);
        for (int p = 0; p < n; ++p) {
          sum += g_inv(i, p).truncated(out_order) * (d(p, j, k) + d(p, k, j) - d(j, k, p));
        }
        gamma.set(i, j, k, sum * 0.5);
      }
    }
  }
  return gamma;
}

inline ConnectionValue christoffel(const MetricValue& g, double rank_tol = kDefaultRankTolerance) {
  return christoffel(g, invert_metric(g, rank_tol));
}

/// g * exp(2 phi), componentwise.
inline MetricValue conformal_rescale_metric(const MetricValue& g, const Jet& phi) {
  const int n = g.dim();
  const Jet factor = exp(2.0 * phi);
  MetricValue out(n, std::min(g.order(), phi.order()));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) out.set(i, j, g(i, j) * factor);
  }
  return out;
}

/// Levi-Civita connection of g exp(2 phi) assembled from that of g plus the
/// gradient terms: delta^i_j d_k phi + delta^i_k d_j phi - g^{ip} g_jk d_p phi.
inline ConnectionValue rescaled_connection(const MetricValue& g, const Jet& phi,
                                           double rank_tol = kDefaultRankTolerance) {
  const int n = g.dim();
  if (phi.order() < 1) throw std::invalid_argument("rescaled_connection needs phi of order >= 1");
  const MetricValue g_inv = invert_metric(g, rank_tol);
  const ConnectionValue base = christoffel(g, g_inv);
  const int order = std::min(base.order(), phi.order() - 1);
  std::vector<Jet> dphi;
  for (int k = 0; k < n; ++k) dphi.push_back(partial(phi, k).truncated(order));
  // grad^i phi = g^{ip} d_p phi
  std::vector<Jet> grad_up;
  for (int i = 0; i < n; ++i) {
    Jet s = Jet::constant(0.0, n, order);
    for (int p = 0; p < n; ++p) s += g_inv(i, p).truncated(order) * dphi[static_cast<std::size_t>(p)];
    grad_up.push_back(s);
  }
  ConnectionValue out(n, order);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        Jet v = base(i, j, k).truncated(order) - g(j, k).truncated(order) * grad_up[static_cast<std::size_t>(i)];
        if (i == j) v += dphi[static_cast<std::size_t>(k)];
        if (i == k) v += dphi[static_cast<std::size_t>(j)];
        out.set(i, j, k, v);
      }
    }
  }
  return out;
}

/// Gamma^i_jk + delta^i_j psi_k + delta^i_k psi_j.
inline ConnectionValue projective_transform(const ConnectionValue& gamma, const OneFormValue& psi) {
  const int n = gamma.dim();
  int order = gamma.order();
  for (const Jet& p : psi) order = std::min(order, p.order());
  ConnectionValue out(n, order);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        Jet v = gamma(i, j, k).truncated(order);
        if (i == j) v += psi[static_cast<std::size_t>(k)].truncated(order);
        if (i == k) v += psi[static_cast<std::size_t>(j)].truncated(order);
        out.set(i, j, k, v);
      }
    }
  }
  return out;
}

/// Componentwise a - b.
inline ConnectionValue difference(const ConnectionValue& a, const ConnectionValue& b) {
  const int n = a.dim();
  const int order = std::min(a.order(), b.order());
  ConnectionValue out(n, order);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) out.set(i, j, k, a(i, j, k).truncated(order) - b(i, j, k).truncated(order));
    }
  }
  return out;
}

/// Trace-adjusted symbol Pi^i_jk in jet arithmetic (keeps derivatives).
inline ConnectionValue thomas_symbol_jets(const ConnectionValue& gamma) {
  const int n = gamma.dim();
  const int order = gamma.order();
  std::vector<Jet> trace;  // Gamma^p_pk
  for (int k = 0; k < n; ++k) {
    Jet s = Jet::constant(0.0, n, order);
    for (int p = 0; p < n; ++p) s += gamma(p, p, k);
    trace.push_back(s);
  }
  const double w = 1.0 / (n + 1);
  ConnectionValue out(n, order);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        Jet v = gamma(i, j, k);
        if (i == j) v -= trace[static_cast<std::size_t>(k)] * w;
        if (i == k) v -= trace[static_cast<std::size_t>(j)] * w;
        out.set(i, j, k, v);
      }
    }
  }
  return out;
}

inline ThomasValue thomas_symbol(const ConnectionValue& gamma) {
  const ConnectionValue pj = thomas_symbol_jets(gamma);
  const int n = gamma.dim();
  ThomasValue t{n, std::vector<double>(static_cast<std::size_t>(n * n * n))};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) t.pi[static_cast<std::size_t>((i * n + j) * n + k)] = pj(i, j, k).value();
    }
  }
  return t;
}

inline double max_abs_difference(const ThomasValue& a, const ThomasValue& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.pi.size(); ++i) m = std::max(m, std::fabs(a.pi[i] - b.pi[i]));
  return m;
}

struct ProjectiveComparison {
  bool equivalent = true;
  double max_deviation = 0.0;
};

/// Compares Thomas symbols of two connection fields at the given points.
/// `field_a` / `field_b` map a point to a ConnectionValue.
template <class FieldA, class FieldB>
ProjectiveComparison projectively_equivalent(FieldA&& field_a, FieldB&& field_b,
                                             std::span<const std::vector<double>> points,
                                             double tolerance) {
  ProjectiveComparison r;
  for (const auto& p : points) {
    const ThomasValue a = thomas_symbol(field_a(p));
    const ThomasValue b = thomas_symbol(field_b(p));
    r.max_deviation = std::max(r.max_deviation, max_abs_difference(a, b));
  }
  r.equivalent = r.max_deviation <= tolerance;
  return r;
}

}  // namespace confproj
