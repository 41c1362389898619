#pragma once

// Truncated second-order Taylor arithmetic ("jets").
//
// A Jet of order d in n variables carries the value of a scalar together with
// its gradient (d >= 1) and Hessian (d == 2) at a fixed point.  Arithmetic
// follows the product and chain rules truncated at the operand order, so any
// pipeline of expressions yields exact first and second partial derivatives.
// The Hessian is stored as a packed upper triangle and is therefore exactly
// symmetric.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "confproj/errors.hpp"

namespace confproj {

class Jet {
 public:
  static constexpr int kMaxOrder = 2;

  Jet() = default;

  static Jet constant(double c, int n, int order) {
    Jet j(n, order);
    j.data_[0] = c;
    return j;
  }

  /// Seed for the coordinate function x^k (0-based k) at point p.
  static Jet coordinate(int k, std::span<const double> p, int order) {
    const int n = static_cast<int>(p.size());
    if (k < 0 || k >= n) {
      throw std::out_of_range("coordinate index " + std::to_string(k) + " out of range for n = " +
                              std::to_string(n));
    }
    Jet j(n, order);
    j.data_[0] = p[static_cast<std::size_t>(k)];
    if (order >= 1) j.data_[1 + static_cast<std::size_t>(k)] = 1.0;
    return j;
  }

  int dim() const noexcept { return n_; }
  int order() const noexcept { return order_; }

  double value() const noexcept { return data_[0]; }

  double gradient(int k) const {
    if (order_ < 1) return 0.0;
    return data_[1 + static_cast<std::size_t>(k)];
  }

  double hessian(int i, int j) const {
    if (order_ < 2) return 0.0;
    return data_[hess_index(i, j)];
  }

  std::vector<double> gradient() const {
    std::vector<double> g(static_cast<std::size_t>(n_), 0.0);
    for (int k = 0; k < n_ && order_ >= 1; ++k) g[static_cast<std::size_t>(k)] = gradient(k);
    return g;
  }

  void set_value(double v) { data_[0] = v; }
  void set_gradient(int k, double v) {
    require_order(1);
    data_[1 + static_cast<std::size_t>(k)] = v;
  }
  void set_hessian(int i, int j, double v) {
    require_order(2);
    data_[hess_index(i, j)] = v;
  }

  /// Drop derivative information above `order`.
  Jet truncated(int order) const {
    if (order >= order_) return *this;
    Jet r(n_, order);
    std::copy_n(data_.begin(), r.data_.size(), r.data_.begin());
    return r;
  }

  bool is_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  Jet operator-() const {
    Jet r = *this;
    for (double& x : r.data_) x = -x;
    return r;
  }

  Jet& operator+=(const Jet& b) { return *this = *this + b; }
  Jet& operator-=(const Jet& b) { return *this = *this - b; }
  Jet& operator*=(const Jet& b) { return *this = *this * b; }
  Jet& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }

  friend Jet operator+(const Jet& a, const Jet& b) {
    Jet r = like(a, b);
    for (std::size_t i = 0; i < r.data_.size(); ++i) r.data_[i] = a.data_[i] + b.data_[i];
    return checked(std::move(r));
  }

  friend Jet operator-(const Jet& a, const Jet& b) {
    Jet r = like(a, b);
    for (std::size_t i = 0; i < r.data_.size(); ++i) r.data_[i] = a.data_[i] - b.data_[i];
    return checked(std::move(r));
  }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r = like(a, b);
    const double av = a.data_[0], bv = b.data_[0];
    r.data_[0] = av * bv;
    if (r.order_ >= 1) {
      for (int k = 0; k < r.n_; ++k) {
        const std::size_t g = 1 + static_cast<std::size_t>(k);
        r.data_[g] = a.data_[g] * bv + av * b.data_[g];
      }
    }
    if (r.order_ >= 2) {
      for (int i = 0; i < r.n_; ++i) {
        for (int j = i; j < r.n_; ++j) {
          const std::size_t h = r.hess_index(i, j);
          const double cross = a.gradient(i) * b.gradient(j) + b.gradient(i) * a.gradient(j);
          r.data_[h] = a.data_[h] * bv + cross + av * b.data_[h];
        }
      }
    }
    return checked(std::move(r));
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

  friend Jet operator*(const Jet& a, double s) {
    Jet r = a;
    r *= s;
    return checked(std::move(r));
  }
  friend Jet operator*(double s, const Jet& a) { return a * s; }
  friend Jet operator+(const Jet& a, double c) {
    Jet r = a;
    r.data_[0] += c;
    return checked(std::move(r));
  }
  friend Jet operator+(double c, const Jet& a) { return a + c; }
  friend Jet operator-(const Jet& a, double c) { return a + (-c); }
  friend Jet operator-(double c, const Jet& a) { return (-a) + c; }

  /// Chain rule: f(a) given f(a.value), f'(a.value), f''(a.value).
  static Jet compose(const Jet& a, double f0, double f1, double f2) {
    Jet r(a.n_, a.order_);
    r.data_[0] = f0;
    if (r.order_ >= 1) {
      for (int k = 0; k < r.n_; ++k) r.data_[1 + static_cast<std::size_t>(k)] = f1 * a.gradient(k);
    }
    if (r.order_ >= 2) {
      for (int i = 0; i < r.n_; ++i) {
        for (int j = i; j < r.n_; ++j) {
          r.data_[r.hess_index(i, j)] =
              f2 * a.gradient(i) * a.gradient(j) + f1 * a.data_[a.hess_index(i, j)];
        }
      }
    }
    return checked(std::move(r));
  }

  friend Jet reciprocal(const Jet& b) {
    const double v = b.value();
    if (v == 0.0) throw DomainError("division by zero");
    return compose(b, 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
  }

  /// Partial derivative along coordinate k (0-based); lowers the order by one.
  friend Jet partial(const Jet& a, int k) {
    if (a.order_ < 1) throw std::invalid_argument("partial derivative of an order-0 jet");
    if (k < 0 || k >= a.n_) throw std::out_of_range("partial: coordinate index out of range");
    Jet r(a.n_, a.order_ - 1);
    r.data_[0] = a.gradient(k);
    if (r.order_ >= 1) {
      for (int j = 0; j < a.n_; ++j) r.data_[1 + static_cast<std::size_t>(j)] = a.hessian(k, j);
    }
    return r;
  }

  friend bool operator==(const Jet&, const Jet&) = default;

 private:
  Jet(int n, int order) : n_(n), order_(order) {
    if (n < 1) throw std::invalid_argument("jet dimension must be >= 1");
    if (order < 0 || order > kMaxOrder) throw std::invalid_argument("jet order must be 0, 1 or 2");
    data_.assign(storage_size(n, order), 0.0);
  }

  static std::size_t storage_size(int n, int order) {
    const auto un = static_cast<std::size_t>(n);
    std::size_t s = 1;
    if (order >= 1) s += un;
    if (order >= 2) s += un * (un + 1) / 2;
    return s;
  }

  std::size_t hess_index(int i, int j) const {
    if (i > j) std::swap(i, j);
    const auto un = static_cast<std::size_t>(n_);
    const auto ui = static_cast<std::size_t>(i);
    // row-major packed upper triangle
    return 1 + un + ui * (2 * un - ui + 1) / 2 + (static_cast<std::size_t>(j) - ui);
  }

  void require_order(int d) const {
    if (order_ < d) throw std::logic_error("jet order too low for this component");
  }

  static Jet like(const Jet& a, const Jet& b) {
    if (a.n_ != b.n_) {
      throw std::invalid_argument("jet dimension mismatch: " + std::to_string(a.n_) + " vs " +
                                  std::to_string(b.n_));
    }
    return Jet(a.n_, std::min(a.order_, b.order_));
  }

  static Jet checked(Jet r) {
    if (!r.is_finite()) throw DomainError("non-finite jet component");
    return r;
  }

  int n_ = 1;
  int order_ = 0;
  std::vector<double> data_{0.0};
};

inline Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  return Jet::compose(a, e, e, e);
}

inline Jet log(const Jet& a) {
  const double v = a.value();
  if (!(v > 0.0)) throw DomainError("log of non-positive value");
  return Jet::compose(a, std::log(v), 1.0 / v, -1.0 / (v * v));
}

inline Jet sin(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return Jet::compose(a, s, c, -s);
}

inline Jet cos(const Jet& a) {
  const double s = std::sin(a.value()), c = std::cos(a.value());
  return Jet::compose(a, c, -s, -c);
}

inline Jet tan(const Jet& a) {
  if (std::cos(a.value()) == 0.0) throw DomainError("tan at a pole");
  const double t = std::tan(a.value());
  const double sec2 = 1.0 + t * t;
  return Jet::compose(a, t, sec2, 2.0 * t * sec2);
}

inline Jet sinh(const Jet& a) {
  const double s = std::sinh(a.value()), c = std::cosh(a.value());
  return Jet::compose(a, s, c, s);
}

inline Jet cosh(const Jet& a) {
  const double s = std::sinh(a.value()), c = std::cosh(a.value());
  return Jet::compose(a, c, s, c);
}

inline Jet tanh(const Jet& a) {
  const double t = std::tanh(a.value());
  const double d = 1.0 - t * t;
  return Jet::compose(a, t, d, -2.0 * t * d);
}

inline Jet sqrt(const Jet& a) {
  const double v = a.value();
  // sqrt is not differentiable at 0, so 0 is outside the domain here
  if (!(v > 0.0)) throw DomainError("sqrt of non-positive value");
  const double s = std::sqrt(v);
  return Jet::compose(a, s, 0.5 / s, -0.25 / (s * v));
}

/// a^k for an integer k by repeated squaring; negative k goes through the reciprocal.
inline Jet pow_int(const Jet& a, long long k) {
  if (k < 0) return reciprocal(pow_int(a, -k));
  Jet result = Jet::constant(1.0, a.dim(), a.order());
  Jet base = a;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

/// a^b with a real exponent jet, lowered to exp(b log a); requires a > 0.
inline Jet pow(const Jet& a, const Jet& b) {
  if (!(a.value() > 0.0)) throw DomainError("non-integer power of non-positive base");
  return exp(b * log(a));
}

}  // namespace confproj
