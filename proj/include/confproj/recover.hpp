#pragma once

// Reconstruction of the conformal factor phi from d_i phi = T_i by line
// integration inside the (convex) sampling box, and of the compatible metric
// g exp(2 phi).  phi is normalized to vanish at the base point, so the metric
// is recovered up to the constant factor that compatibility leaves free.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "confproj/compat.hpp"
#include "confproj/errors.hpp"
#include "confproj/geometry.hpp"
#include "confproj/scenario.hpp"

namespace confproj {

inline constexpr int kMaxBisections = 20;
inline constexpr int kDefaultVerifyPoints = 25;

namespace detail {

// 8-point Gauss-Legendre rule on [-1, 1]
inline constexpr std::array<double, 4> kGlNodes{0.1834346424956498049394761, 0.5255324099163289858177390,
                                                0.7966664774136267395915539, 0.9602898564975362316835609};
inline constexpr std::array<double, 4> kGlWeights{0.3626837833783619829651504, 0.3137066458778872873379622,
                                                  0.2223810344533744705443560, 0.1012285362903762591525314};

using VectorIntegrand = std::function<std::vector<double>(double)>;

inline std::vector<double> gauss_legendre(const VectorIntegrand& f, double a, double b) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  std::vector<double> sum;
  for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
    for (double sign : {-1.0, 1.0}) {
      const std::vector<double> v = f(mid + sign * half * kGlNodes[q]);
      if (sum.empty()) sum.assign(v.size(), 0.0);
      for (std::size_t i = 0; i < v.size(); ++i) sum[i] += kGlWeights[q] * v[i];
    }
  }
  for (double& x : sum) x *= half;
  return sum;
}

inline std::vector<double> adaptive(const VectorIntegrand& f, double a, double b, const std::vector<double>& whole,
                                    double tol, int depth) {
  const double mid = 0.5 * (a + b);
  std::vector<double> left = gauss_legendre(f, a, mid);
  const std::vector<double> right = gauss_legendre(f, mid, b);
  double err = 0.0;
  for (std::size_t i = 0; i < whole.size(); ++i) err = std::max(err, std::fabs(left[i] + right[i] - whole[i]));
  if (err < tol) {
    for (std::size_t i = 0; i < left.size(); ++i) left[i] += right[i];
    return left;
  }
  if (depth >= kMaxBisections) {
    throw NonConvergence("quadrature did not converge after " + std::to_string(kMaxBisections) + " bisections");
  }
  std::vector<double> l = adaptive(f, a, mid, left, 0.5 * tol, depth + 1);
  const std::vector<double> r = adaptive(f, mid, b, right, 0.5 * tol, depth + 1);
  for (std::size_t i = 0; i < l.size(); ++i) l[i] += r[i];
  return l;
}

}  // namespace detail

/// Adaptive composite 8-node Gauss-Legendre integral of a vector-valued f on [a, b].
inline std::vector<double> integrate_adaptive(const detail::VectorIntegrand& f, double a, double b, double tol) {
  return detail::adaptive(f, a, b, detail::gauss_legendre(f, a, b), tol, 0);
}

/// T_i at p as order-1 jets.
inline std::vector<Jet> trace_covector_at(const Scenario& s, std::span<const double> p) {
  const MetricValue g = metric_at(s, p, 2);
  MetricValue g_inv;
  try {
    g_inv = invert_metric(g, s.tolerances.rank);
  } catch (const DegenerateMetric& e) {
    throw DegenerateMetric(e.determinant(), std::vector<double>(p.begin(), p.end()));
  }
  const ConnectionValue t = compat_tensor(g, g_inv, connection_at(s, p, 1));
  return trace_vector(g, g_inv, t).down;
}

namespace detail {

inline void require_in_box(const Scenario& s, std::span<const double> p, const char* what) {
  if (static_cast<int>(p.size()) != s.dimension) {
    throw std::invalid_argument(std::string(what) + " has the wrong dimension");
  }
  if (!s.box.contains(p)) throw std::invalid_argument(std::string(what) + " lies outside the sampling box");
}

inline std::vector<double> lerp(std::span<const double> a, std::span<const double> b, double t) {
  std::vector<double> c(a.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] + t * (b[i] - a[i]);
  return c;
}

}  // namespace detail

/// phi(target) - phi(base) = integral of T_i dx^i along the straight segment.
inline double integrate_phi(const Scenario& s, std::span<const double> base, std::span<const double> target) {
  detail::require_in_box(s, base, "base point");
  detail::require_in_box(s, target, "target point");
  const std::size_t n = base.size();
  std::vector<double> delta(n);
  bool zero = true;
  for (std::size_t i = 0; i < n; ++i) {
    delta[i] = target[i] - base[i];
    zero = zero && delta[i] == 0.0;
  }
  if (zero) return 0.0;
  const detail::VectorIntegrand f = [&](double t) {
    const std::vector<Jet> tdown = trace_covector_at(s, detail::lerp(base, target, t));
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += tdown[i].value() * delta[i];
    return std::vector<double>{v};
  };
  return integrate_adaptive(f, 0.0, 1.0, s.tolerances.quadrature)[0];
}

/// Line integral along a polyline (vertices in order, all inside the box).
inline double integrate_phi_along(const Scenario& s, std::span<const std::vector<double>> path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) total += integrate_phi(s, path[i - 1], path[i]);
  return total;
}

/// phi at `target` as an order-2 jet.  The gradient is obtained by
/// differentiating the segment integral under the integral sign,
///   d_j phi(x) = int_0^1 [T_j(c) + t (d_j T_i)(c) (x - base)^i] dt,
/// which equals T_j(x) exactly when T_i dx^i is closed.  The Hessian is the
/// symmetrized d_j T_i at the target.
inline Jet phi_jet(const Scenario& s, std::span<const double> base, std::span<const double> target) {
  detail::require_in_box(s, base, "base point");
  detail::require_in_box(s, target, "target point");
  const int n = s.dimension;
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> delta(un);
  for (std::size_t i = 0; i < un; ++i) delta[i] = target[i] - base[i];

  Jet phi = Jet::constant(0.0, n, 2);
  if (std::any_of(delta.begin(), delta.end(), [](double d) { return d != 0.0; })) {
    const detail::VectorIntegrand f = [&](double t) {
      const std::vector<Jet> tdown = trace_covector_at(s, detail::lerp(base, target, t));
      std::vector<double> out(un + 1, 0.0);
      for (std::size_t i = 0; i < un; ++i) out[0] += tdown[i].value() * delta[i];
      for (int j = 0; j < n; ++j) {
        double v = tdown[static_cast<std::size_t>(j)].value();
        for (std::size_t i = 0; i < un; ++i) v += t * tdown[i].gradient(j) * delta[i];
        out[static_cast<std::size_t>(j) + 1] = v;
      }
      return out;
    };
    const std::vector<double> r = integrate_adaptive(f, 0.0, 1.0, s.tolerances.quadrature);
    phi.set_value(r[0]);
    for (int j = 0; j < n; ++j) phi.set_gradient(j, r[static_cast<std::size_t>(j) + 1]);
  } else {
    const std::vector<Jet> tdown = trace_covector_at(s, target);
    for (int j = 0; j < n; ++j) phi.set_gradient(j, tdown[static_cast<std::size_t>(j)].value());
  }
  const std::vector<Jet> at_target = trace_covector_at(s, target);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      phi.set_hessian(i, j,
                      0.5 * (at_target[static_cast<std::size_t>(i)].gradient(j) +
                             at_target[static_cast<std::size_t>(j)].gradient(i)));
    }
  }
  return phi;
}

/// g exp(2 phi) at each query point (value parts).
inline std::vector<MetricValue> recover_metric(const Scenario& s, std::span<const double> base,
                                               std::span<const std::vector<double>> points) {
  std::vector<MetricValue> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    const double phi = integrate_phi(s, base, p);
    const MetricValue g = metric_at(s, p, 0);
    out.push_back(conformal_rescale_metric(g, Jet::constant(phi, s.dimension, 0)));
  }
  return out;
}

struct RecoveryCheck {
  double max_deviation = 0.0;
  bool pass = false;
};

/// Compares Pi(LC(g exp 2 phi)) with Pi(Gamma) at the given points.
inline RecoveryCheck verify_recovery(const Scenario& s, std::span<const double> base,
                                     std::span<const std::vector<double>> points) {
  RecoveryCheck r;
  for (const auto& p : points) {
    const Jet phi = phi_jet(s, base, p);
    const MetricValue recovered = conformal_rescale_metric(metric_at(s, p, 2), phi);
    const ThomasValue lhs = thomas_symbol(christoffel(recovered, s.tolerances.rank));
    const ThomasValue rhs = thomas_symbol(connection_at(s, p, 1));
    r.max_deviation = std::max(r.max_deviation, max_abs_difference(lhs, rhs));
  }
  r.pass = r.max_deviation <= s.tolerances.residual;
  return r;
}

inline RecoveryCheck verify_recovery(const Scenario& s, std::span<const double> base) {
  const auto points = sample_points(s, std::min(s.samples, kDefaultVerifyPoints));
  return verify_recovery(s, base, points);
}

}  // namespace confproj
