#pragma once

// Compatibility of a conformal class [g] with a projective class [Gamma].
//
// With T^i_jk = Pi^i_jk(LC(g) - Gamma), T^i = (n+1)/((n+2)(n-1)) g^{jk} T^i_jk
// and T_i = g_ij T^j, the pair is locally compatible iff
//   (A)  T^i_jk - g_jk T^i + (delta^i_j T_k + delta^i_k T_j)/(n+1) = 0
//   (B)  d_j T_i - d_i T_j = 0.
// The metric in [g] whose Levi-Civita connection lies in [Gamma] is then
// g exp(2 phi) with d_i phi = T_i.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "confproj/errors.hpp"
#include "confproj/geometry.hpp"
#include "confproj/jet.hpp"
#include "confproj/linalg.hpp"
#include "confproj/rng.hpp"
#include "confproj/scenario.hpp"

namespace confproj {

/// Pi(LC(g) - Gamma) as jets; g needs order 2 for T to carry first derivatives.
inline ConnectionValue compat_tensor(const MetricValue& g, const MetricValue& g_inv,
                                     const ConnectionValue& gamma) {
  return thomas_symbol_jets(difference(christoffel(g, g_inv), gamma));
}

inline ConnectionValue compat_tensor(const MetricValue& g, const ConnectionValue& gamma,
                                     double rank_tol = kDefaultRankTolerance) {
  return compat_tensor(g, invert_metric(g, rank_tol), gamma);
}

struct TraceVectors {
  std::vector<Jet> up;    // T^i
  std::vector<Jet> down;  // T_i
};

inline TraceVectors trace_vector(const MetricValue& g, const MetricValue& g_inv, const ConnectionValue& t) {
  const int n = g.dim();
  if (n < 2) throw std::invalid_argument("trace_vector requires dimension >= 2");
  const int order = t.order();
  const double coeff = static_cast<double>(n + 1) / (static_cast<double>(n + 2) * (n - 1));
  TraceVectors tv;
  for (int i = 0; i < n; ++i) {
    Jet s = Jet::constant(0.0, n, order);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) s += g_inv(j, k).truncated(order) * t(i, j, k);
    }
    tv.up.push_back(s * coeff);
  }
  for (int i = 0; i < n; ++i) {
    Jet s = Jet::constant(0.0, n, order);
    for (int j = 0; j < n; ++j) s += g(i, j).truncated(order) * tv.up[static_cast<std::size_t>(j)];
    tv.down.push_back(s);
  }
  return tv;
}

inline TraceVectors trace_vector(const MetricValue& g, const ConnectionValue& t,
                                 double rank_tol = kDefaultRankTolerance) {
  return trace_vector(g, invert_metric(g, rank_tol), t);
}

/// Left side of (A), value parts, indexed (i*n + j)*n + k.
inline std::vector<double> condition_a_residual(const MetricValue& g, const ConnectionValue& t,
                                                const TraceVectors& tv) {
  const int n = g.dim();
  const double w = 1.0 / (n + 1);
  std::vector<double> a(static_cast<std::size_t>(n * n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double v = t(i, j, k).value() - g(j, k).value() * tv.up[static_cast<std::size_t>(i)].value();
        if (i == j) v += w * tv.down[static_cast<std::size_t>(k)].value();
        if (i == k) v += w * tv.down[static_cast<std::size_t>(j)].value();
        a[static_cast<std::size_t>((i * n + j) * n + k)] = v;
      }
    }
  }
  return a;
}

/// Left side of (B): B[j*n + i] = d_j T_i - d_i T_j, exactly antisymmetric.
inline std::vector<double> condition_b_residual(std::span<const Jet> t_down) {
  const int n = static_cast<int>(t_down.size());
  for (const Jet& x : t_down) {
    if (x.order() < 1) throw std::invalid_argument("condition (B) needs T_i jets of order >= 1");
  }
  std::vector<double> b(static_cast<std::size_t>(n * n), 0.0);
  for (int j = 0; j < n; ++j) {
    for (int i = j + 1; i < n; ++i) {
      const double v = t_down[static_cast<std::size_t>(i)].gradient(j) - t_down[static_cast<std::size_t>(j)].gradient(i);
      b[static_cast<std::size_t>(j * n + i)] = v;
      b[static_cast<std::size_t>(i * n + j)] = -v;
    }
  }
  return b;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

struct ObstructionData {
  std::vector<double> point;
  ConnectionValue t;  // T^i_jk, order 1
  TraceVectors trace;
  std::vector<double> a;
  std::vector<double> b;
  /// max(1, |Gamma|, |g|, |g^-1|), all infinity norms of values
  double scale = 1.0;

  double a_norm() const { return max_abs(a) / scale; }
  double b_norm() const { return max_abs(b) / scale; }
};

/// Full obstruction pipeline at one point.  g must be an order-2 jet field and
/// gamma an order-1 one.
inline ObstructionData analyze_point(const MetricValue& g, const ConnectionValue& gamma,
                                     std::span<const double> point, double rank_tol = kDefaultRankTolerance) {
  ObstructionData d;
  d.point.assign(point.begin(), point.end());
  MetricValue g_inv;
  try {
    g_inv = invert_metric(g, rank_tol);
  } catch (const DegenerateMetric& e) {
    throw DegenerateMetric(e.determinant(), d.point);
  }
  d.t = compat_tensor(g, g_inv, gamma);
  d.trace = trace_vector(g, g_inv, d.t);
  d.a = condition_a_residual(g, d.t, d.trace);
  d.b = condition_b_residual(d.trace.down);
  d.scale = std::max({1.0, gamma.max_abs(), g.max_abs(), g_inv.max_abs()});
  return d;
}

inline ObstructionData analyze_point(const Scenario& s, std::span<const double> point) {
  return analyze_point(metric_at(s, point, 2), connection_at(s, point, 1), point, s.tolerances.rank);
}

// ---------------------------------------------------------------------------
// null cone and the EPS condition

struct NullVector {
  std::vector<double> point;
  std::vector<double> u;
};

inline double quadratic_form(std::span<const double> g, std::span<const double> u) {
  const std::size_t n = u.size();
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) q += g[i * n + j] * u[i] * u[j];
  }
  return q;
}

inline double squared_norm(std::span<const double> u) {
  double s = 0.0;
  for (double x : u) s += x * x;
  return s;
}

/// Random g-null vectors (unit Euclidean length).  Empty when the value part
/// of g is definite.
inline std::vector<NullVector> sample_null_vectors(const MetricValue& g, int count, SplitMix64& rng,
                                                   std::span<const double> point = {},
                                                   double rank_tol = kDefaultRankTolerance) {
  require_nondegenerate(g, rank_tol);
  const int n = g.dim();
  const std::vector<double> gv = g.values();
  const EigenDecomposition eig = jacobi_eigen(gv, n);
  std::vector<int> pos, neg;
  for (int c = 0; c < n; ++c) (eig.values[static_cast<std::size_t>(c)] > 0 ? pos : neg).push_back(c);
  std::vector<NullVector> out;
  if (pos.empty() || neg.empty()) return out;

  auto random_in = [&](const std::vector<int>& cols) {
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    for (int c : cols) {
      const double w = rng.normal();
      for (int r = 0; r < n; ++r) v[static_cast<std::size_t>(r)] += w * eig.vectors[static_cast<std::size_t>(r * n + c)];
    }
    return v;
  };

  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 100 * (count + 1)) throw NonConvergence("could not sample null vectors");
    const std::vector<double> a = random_in(pos);
    const std::vector<double> b = random_in(neg);
    const double qa = quadratic_form(gv, a), qb = quadratic_form(gv, b);
    if (!(qa > 0.0) || !(qb < 0.0)) continue;
    std::vector<double> u(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = a[i] / std::sqrt(qa) + b[i] / std::sqrt(-qb);
    const double norm = std::sqrt(squared_norm(u));
    if (norm == 0.0) continue;
    for (double& x : u) x /= norm;
    if (std::fabs(quadratic_form(gv, u)) > 1e-10 * squared_norm(u)) continue;
    out.push_back({std::vector<double>(point.begin(), point.end()), std::move(u)});
  }
  return out;
}

/// Non-parallel part of d^i = (LC(g) - Gamma)^i_jk u^j u^k relative to u,
/// divided by |u|^2 (Euclidean chart inner product).
inline double eps_residual(const ConnectionValue& levi_civita, const ConnectionValue& gamma,
                           std::span<const double> u) {
  const int n = gamma.dim();
  const double uu = squared_norm(u);
  if (uu == 0.0) throw std::invalid_argument("eps_residual: zero vector");
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        s += (levi_civita(i, j, k).value() - gamma(i, j, k).value()) * u[static_cast<std::size_t>(j)] *
             u[static_cast<std::size_t>(k)];
      }
    }
    d[static_cast<std::size_t>(i)] = s;
  }
  double du = 0.0;
  for (int i = 0; i < n; ++i) du += d[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
  const double f = du / uu;
  double r2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = d[static_cast<std::size_t>(i)] - f * u[static_cast<std::size_t>(i)];
    r2 += c * c;
  }
  return std::sqrt(r2) / uu;
}

inline double eps_residual(const MetricValue& g, const ConnectionValue& gamma, std::span<const double> u,
                           double rank_tol = kDefaultRankTolerance) {
  return eps_residual(christoffel(g, rank_tol), gamma, u);
}

// ---------------------------------------------------------------------------
// sampled verdict

enum class Verdict { Compatible, FailsA, FailsB, FailsAAndB };
enum class EpsVerdict { Holds, Fails, Vacuous };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Compatible: return "compatible";
    case Verdict::FailsA: return "fails_A";
    case Verdict::FailsB: return "fails_B";
    case Verdict::FailsAAndB: return "fails_A_and_B";
  }
  return "?";
}

inline const char* to_string(EpsVerdict v) {
  switch (v) {
    case EpsVerdict::Holds: return "holds";
    case EpsVerdict::Fails: return "fails";
    case EpsVerdict::Vacuous: return "vacuous";
  }
  return "?";
}

inline Verdict classify(double max_a, double max_b, double tol) {
  const bool a_ok = max_a <= tol, b_ok = max_b <= tol;
  if (a_ok && b_ok) return Verdict::Compatible;
  if (!a_ok && !b_ok) return Verdict::FailsAAndB;
  return a_ok ? Verdict::FailsB : Verdict::FailsA;
}

struct PointSummary {
  std::vector<double> point;
  double a = 0.0;  // scale-normalized
  double b = 0.0;
  std::optional<double> eps;  // empty when the cone is trivial
  int null_vectors = 0;
};

struct SkippedPoint {
  std::vector<double> point;
  std::string reason;
};

struct CompatReport {
  std::vector<PointSummary> points;
  std::vector<SkippedPoint> skipped;
  double max_a = 0.0;
  double max_b = 0.0;
  double max_eps = 0.0;
  int null_vectors_checked = 0;
  Verdict verdict = Verdict::Compatible;
  EpsVerdict eps = EpsVerdict::Vacuous;
  Tolerances tolerances;
  std::uint64_t seed = 0;
  int samples = 0;

  bool compatible() const { return verdict == Verdict::Compatible; }
};

/// Uniform point in the box drawn from rng.
inline std::vector<double> sample_in_box(const Box& box, SplitMix64& rng) {
  std::vector<double> p(box.min.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = rng.uniform(box.min[i], box.max[i]);
  return p;
}

/// The deterministic sample points of a scenario (one RNG stream per index).
inline std::vector<std::vector<double>> sample_points(const Scenario& s, int count) {
  std::vector<std::vector<double>> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    SplitMix64 rng = SplitMix64::stream(s.seed, static_cast<std::uint64_t>(i));
    pts.push_back(sample_in_box(s.box, rng));
  }
  return pts;
}

inline CompatReport check_compatibility(const Scenario& s) {
  CompatReport r;
  r.tolerances = s.tolerances;
  r.seed = s.seed;
  r.samples = s.samples;
  const int n = s.dimension;
  bool any_cone = false;

  for (int idx = 0; idx < s.samples; ++idx) {
    SplitMix64 rng = SplitMix64::stream(s.seed, static_cast<std::uint64_t>(idx));
    const std::vector<double> p = sample_in_box(s.box, rng);
    try {
      const MetricValue g = metric_at(s, p, 2);
      const ConnectionValue gamma = connection_at(s, p, 1);
      const ObstructionData d = analyze_point(g, gamma, p, s.tolerances.rank);
      PointSummary ps{p, d.a_norm(), d.b_norm(), std::nullopt, 0};

      const auto nulls = sample_null_vectors(g, 2 * n, rng, p, s.tolerances.rank);
      if (!nulls.empty()) {
        any_cone = true;
        const ConnectionValue lc = christoffel(g, s.tolerances.rank);
        double worst = 0.0;
        for (const auto& nv : nulls) worst = std::max(worst, eps_residual(lc, gamma, nv.u));
        ps.eps = worst;
        ps.null_vectors = static_cast<int>(nulls.size());
        r.null_vectors_checked += ps.null_vectors;
        r.max_eps = std::max(r.max_eps, worst);
      }
      r.max_a = std::max(r.max_a, ps.a);
      r.max_b = std::max(r.max_b, ps.b);
      r.points.push_back(std::move(ps));
    } catch (const DegenerateMetric& e) {
      r.skipped.push_back({p, e.what()});
      // fewer than 1% of the samples may be skipped
      if (static_cast<long long>(r.skipped.size()) * 100 >= s.samples) {
        throw DegenerateMetric(e.determinant(), p);
      }
    }
  }
  r.verdict = classify(r.max_a, r.max_b, s.tolerances.residual);
  if (!any_cone) {
    r.eps = EpsVerdict::Vacuous;
  } else {
    r.eps = r.max_eps <= s.tolerances.residual ? EpsVerdict::Holds : EpsVerdict::Fails;
  }
  return r;
}

}  // namespace confproj
