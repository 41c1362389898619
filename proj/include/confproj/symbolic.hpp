#pragma once

// Light symbolic manipulation used when generating scenarios: folding
// constructors, exact partial derivatives and cofactor inverses of small
// expression matrices.  No general simplification is attempted.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "confproj/expr.hpp"

namespace confproj::sym {

/// Numeric value of a literal or a negated literal.
inline std::optional<double> constant_value(const Expr& e) {
  if (auto v = e.literal_value()) return v;
  if (const auto* neg = std::get_if<Negate>(&e.node().kind)) {
    if (const auto* l = std::get_if<Literal>(&neg->operand->kind)) return -l->value;
  }
  return std::nullopt;
}

inline Expr constant(double v) {
  if (v == 0.0) return Expr::literal(0.0);
  return v < 0 ? Expr::negate(Expr::literal(-v)) : Expr::literal(v);
}

inline bool is_constant(const Expr& e, double v) {
  auto c = constant_value(e);
  return c && *c == v;
}

inline Expr neg(const Expr& a) {
  if (auto c = constant_value(a)) return constant(-*c);
  if (const auto* n = std::get_if<Negate>(&a.node().kind)) return Expr(n->operand);
  return Expr::negate(a);
}

inline Expr add(const Expr& a, const Expr& b) {
  auto ca = constant_value(a), cb = constant_value(b);
  if (ca && cb) return constant(*ca + *cb);
  if (ca && *ca == 0.0) return b;
  if (cb && *cb == 0.0) return a;
  return Expr::binary(BinaryOp::Add, a, b);
}

inline Expr sub(const Expr& a, const Expr& b) {
  auto ca = constant_value(a), cb = constant_value(b);
  if (ca && cb) return constant(*ca - *cb);
  if (cb && *cb == 0.0) return a;
  if (ca && *ca == 0.0) return neg(b);
  return Expr::binary(BinaryOp::Sub, a, b);
}

inline Expr mul(const Expr& a, const Expr& b) {
  auto ca = constant_value(a), cb = constant_value(b);
  if (ca && cb) return constant(*ca * *cb);
  if ((ca && *ca == 0.0) || (cb && *cb == 0.0)) return constant(0.0);
  if (ca && *ca == 1.0) return b;
  if (cb && *cb == 1.0) return a;
  if (ca && *ca == -1.0) return neg(b);
  if (cb && *cb == -1.0) return neg(a);
  return Expr::binary(BinaryOp::Mul, a, b);
}

inline Expr div(const Expr& a, const Expr& b) {
  auto ca = constant_value(a), cb = constant_value(b);
  if (cb && *cb == 0.0) throw std::domain_error("symbolic division by zero");
  if (ca && *ca == 0.0) return constant(0.0);
  if (ca && cb) return constant(*ca / *cb);
  if (cb && *cb == 1.0) return a;
  return Expr::binary(BinaryOp::Div, a, b);
}

inline Expr pow(const Expr& a, const Expr& b) {
  if (is_constant(b, 1.0)) return a;
  if (is_constant(b, 0.0)) return constant(1.0);
  return Expr::binary(BinaryOp::Pow, a, b);
}

inline Expr call(Func f, const Expr& a) { return Expr::call(f, a); }

namespace detail {

inline Expr d(const Node& node, int k) {
  return std::visit(
      [&](const auto& x) -> Expr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return constant(0.0);
        } else if constexpr (std::is_same_v<T, Variable>) {
          return constant(x.index == k ? 1.0 : 0.0);
        } else if constexpr (std::is_same_v<T, Negate>) {
          return neg(d(*x.operand, k));
        } else if constexpr (std::is_same_v<T, Binary>) {
          const Expr a(x.lhs), b(x.rhs);
          const Expr da = d(*x.lhs, k), db = d(*x.rhs, k);
          switch (x.op) {
            case BinaryOp::Add: return add(da, db);
            case BinaryOp::Sub: return sub(da, db);
            case BinaryOp::Mul: return add(mul(da, b), mul(a, db));
            case BinaryOp::Div: return div(sub(mul(da, b), mul(a, db)), mul(b, b));
            case BinaryOp::Pow: {
              if (auto c = constant_value(b); c && *c == std::floor(*c)) {
                return mul(mul(constant(*c), pow(a, constant(*c - 1.0))), da);
              }
              // a^b (b' log a + b a'/a)
              return mul(Expr::binary(BinaryOp::Pow, a, b),
                         add(mul(db, call(Func::Log, a)), div(mul(b, da), a)));
            }
          }
          throw std::logic_error("unhandled operator");
        } else {
          const Expr a(x.arg);
          const Expr da = d(*x.arg, k);
          if (is_constant(da, 0.0)) return constant(0.0);
          switch (x.func) {
            case Func::Exp: return mul(call(Func::Exp, a), da);
            case Func::Log: return div(da, a);
            case Func::Sin: return mul(call(Func::Cos, a), da);
            case Func::Cos: return neg(mul(call(Func::Sin, a), da));
            case Func::Tan: return mul(add(constant(1.0), pow(call(Func::Tan, a), constant(2.0))), da);
            case Func::Sinh: return mul(call(Func::Cosh, a), da);
            case Func::Cosh: return mul(call(Func::Sinh, a), da);
            case Func::Tanh: return mul(sub(constant(1.0), pow(call(Func::Tanh, a), constant(2.0))), da);
            case Func::Sqrt: return div(da, mul(constant(2.0), call(Func::Sqrt, a)));
          }
          throw std::logic_error("unhandled function");
        }
      },
      node.kind);
}

inline Expr determinant(const std::vector<Expr>& m, int n) {
  if (n == 1) return m[0];
  Expr det = constant(0.0);
  for (int c = 0; c < n; ++c) {
    const Expr& entry = m[static_cast<std::size_t>(c)];
    if (is_constant(entry, 0.0)) continue;
    std::vector<Expr> minor;
    for (int r = 1; r < n; ++r) {
      for (int cc = 0; cc < n; ++cc) {
        if (cc != c) minor.push_back(m[static_cast<std::size_t>(r * n + cc)]);
      }
    }
    const Expr term = mul(entry, determinant(minor, n - 1));
    det = (c % 2 == 0) ? add(det, term) : sub(det, term);
  }
  return det;
}

}  // namespace detail

/// d e / d x^k.
inline Expr derivative(const Expr& e, int k) { return detail::d(e.node(), k); }

/// Row-major symbolic inverse by cofactors.  Intended for small n.
inline std::vector<Expr> inverse(const std::vector<Expr>& m, int n) {
  const Expr det = detail::determinant(m, n);
  if (is_constant(det, 0.0)) throw std::domain_error("symbolic inverse of a singular matrix");
  std::vector<Expr> inv(static_cast<std::size_t>(n * n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      Expr cof;
      if (n == 1) {
        cof = constant(1.0);
      } else {
        std::vector<Expr> minor;
        for (int rr = 0; rr < n; ++rr) {
          for (int cc = 0; cc < n; ++cc) {
            if (rr != r && cc != c) minor.push_back(m[static_cast<std::size_t>(rr * n + cc)]);
          }
        }
        cof = detail::determinant(minor, n - 1);
        if ((r + c) % 2 == 1) cof = neg(cof);
      }
      inv[static_cast<std::size_t>(c * n + r)] = div(cof, det);
    }
  }
  return inv;
}

}  // namespace confproj::sym
