#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace confproj {

/// Base of every structured failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline std::string format_point(const std::vector<double>& p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}
}  // namespace detail

/// A function was evaluated outside its real domain (pole, log of a
/// non-positive value, overflow to a non-finite jet component, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
  DomainError(const std::string& what, std::vector<double> point)
      : Error(what + " at " + detail::format_point(point)), point_(std::move(point)) {}

  const std::vector<double>& point() const noexcept { return point_; }

  /// Same error with extra context in front of the message.
  DomainError prefixed(const std::string& context) const {
    DomainError e(context + what());
    e.point_ = point_;
    return e;
  }

 private:
  std::vector<double> point_;
};

class DegenerateMetric : public Error {
 public:
  DegenerateMetric(double det, std::vector<double> point = {})
      : Error(message(det, point)), det_(det), point_(std::move(point)) {}

  double determinant() const noexcept { return det_; }
  const std::vector<double>& point() const noexcept { return point_; }

 private:
  static std::string message(double det, const std::vector<double>& point) {
    std::ostringstream os;
    os << "degenerate metric (det = " << det << ")";
    if (!point.empty()) os << " at " << detail::format_point(point);
    return os.str();
  }

  double det_;
  std::vector<double> point_;
};

/// Parse failure; offset is a byte offset into the source string.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifier : public SyntaxError {
 public:
  UnknownIdentifier(const std::string& name, std::size_t offset)
      : SyntaxError("unknown identifier '" + name + "'", offset), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class UnknownFunction : public SyntaxError {
 public:
  UnknownFunction(const std::string& name, std::size_t offset)
      : SyntaxError("unknown function '" + name + "'", offset), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Scenario document violates the schema; path is a JSON pointer.
class ScenarioError : public Error {
 public:
  ScenarioError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class TooFewVectors : public Error {
 public:
  TooFewVectors(std::size_t got, std::size_t needed)
      : Error("TooFewVectors: got " + std::to_string(got) + ", need at least " +
              std::to_string(needed)),
        got_(got),
        needed_(needed) {}
  std::size_t got() const noexcept { return got_; }
  std::size_t needed() const noexcept { return needed_; }

 private:
  std::size_t got_, needed_;
};

class NonGenericConfiguration : public Error {
 public:
  explicit NonGenericConfiguration(std::size_t null_dim)
      : Error("NonGenericConfiguration: null space has dimension " + std::to_string(null_dim) +
              " (expected 1)"),
        null_dim_(null_dim) {}
  std::size_t null_space_dimension() const noexcept { return null_dim_; }

 private:
  std::size_t null_dim_;
};

}  // namespace confproj
