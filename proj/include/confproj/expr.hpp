#pragma once

// Closed-form coordinate expressions: AST, recursive-descent parser,
// canonical printer and evaluation on jets.
//
// Grammar:
//   expr   := term (("+"|"-") term)* ;
//   term   := factor (("*"|"/") factor)* ;
//   factor := base ("^" factor)? ;
//   base   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")" | "-" base ;

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "confproj/errors.hpp"
#include "confproj/jet.hpp"

namespace confproj {

enum class Func { Exp, Log, Sin, Cos, Tan, Sinh, Cosh, Tanh, Sqrt };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

inline constexpr std::array<std::pair<std::string_view, Func>, 9> kFunctions{{
    {"exp", Func::Exp},
    {"log", Func::Log},
    {"sin", Func::Sin},
    {"cos", Func::Cos},
    {"tan", Func::Tan},
    {"sinh", Func::Sinh},
    {"cosh", Func::Cosh},
    {"tanh", Func::Tanh},
    {"sqrt", Func::Sqrt},
}};

inline std::optional<Func> function_by_name(std::string_view name) {
  for (const auto& [n, f] : kFunctions) {
    if (n == name) return f;
  }
  return std::nullopt;
}

inline std::string_view function_name(Func f) {
  for (const auto& [n, g] : kFunctions) {
    if (g == f) return n;
  }
  return "?";
}

inline char operator_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return '+';
    case BinaryOp::Sub: return '-';
    case BinaryOp::Mul: return '*';
    case BinaryOp::Div: return '/';
    case BinaryOp::Pow: return '^';
  }
  return '?';
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Literal {
  double value;
};
struct Variable {
  int index;  // 0-based coordinate slot
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs, rhs;
};
struct Call {
  Func func;
  NodePtr arg;
};

struct Node {
  std::variant<Literal, Variable, Negate, Binary, Call> kind;
};

/// Immutable expression tree.  Copies share structure.
class Expr {
 public:
  Expr() : Expr(literal(0.0)) {}
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  static Expr literal(double v) { return Expr(std::make_shared<const Node>(Node{Literal{v}})); }
  static Expr variable(int index) {
    return Expr(std::make_shared<const Node>(Node{Variable{index}}));
  }
  static Expr negate(const Expr& e) {
    return Expr(std::make_shared<const Node>(Node{Negate{e.root_}}));
  }
  static Expr binary(BinaryOp op, const Expr& a, const Expr& b) {
    return Expr(std::make_shared<const Node>(Node{Binary{op, a.root_, b.root_}}));
  }
  static Expr call(Func f, const Expr& arg) {
    return Expr(std::make_shared<const Node>(Node{Call{f, arg.root_}}));
  }

  const Node& node() const noexcept { return *root_; }
  const NodePtr& root() const noexcept { return root_; }

  bool is_literal() const noexcept { return std::holds_alternative<Literal>(root_->kind); }
  std::optional<double> literal_value() const {
    if (const auto* l = std::get_if<Literal>(&root_->kind)) return l->value;
    return std::nullopt;
  }

  friend bool operator==(const Expr& a, const Expr& b) { return same_tree(*a.root_, *b.root_); }

 private:
  static bool same_tree(const Node& a, const Node& b) {
    if (a.kind.index() != b.kind.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          const auto& y = std::get<T>(b.kind);
          if constexpr (std::is_same_v<T, Literal>) {
            return x.value == y.value;
          } else if constexpr (std::is_same_v<T, Variable>) {
            return x.index == y.index;
          } else if constexpr (std::is_same_v<T, Negate>) {
            return same_tree(*x.operand, *y.operand);
          } else if constexpr (std::is_same_v<T, Binary>) {
            return x.op == y.op && same_tree(*x.lhs, *y.lhs) && same_tree(*x.rhs, *y.rhs);
          } else {
            return x.func == y.func && same_tree(*x.arg, *y.arg);
          }
        },
        a.kind);
  }

  NodePtr root_;
};

namespace detail {

class Parser {
 public:
  static constexpr int kMaxDepth = 200;

  Parser(std::string_view src, std::span<const std::string> coords) : src_(src), coords_(coords) {}

  Expr parse() {
    skip_space();
    if (pos_ == src_.size()) throw SyntaxError("empty expression", pos_);
    Expr e = expr();
    skip_space();
    if (pos_ != src_.size()) throw SyntaxError("unexpected character", pos_);
    return e;
  }

 private:
  struct DepthGuard {
    explicit DepthGuard(Parser& p) : p_(p) {
      if (++p_.depth_ > kMaxDepth) throw SyntaxError("expression nested too deeply", p_.pos_);
    }
    ~DepthGuard() { --p_.depth_; }
    Parser& p_;
  };

  Expr expr() {
    DepthGuard guard(*this);
    Expr lhs = term();
    for (;;) {
      skip_space();
      if (accept('+')) {
        lhs = Expr::binary(BinaryOp::Add, lhs, term());
      } else if (accept('-')) {
        lhs = Expr::binary(BinaryOp::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      skip_space();
      if (accept('*')) {
        lhs = Expr::binary(BinaryOp::Mul, lhs, factor());
      } else if (accept('/')) {
        lhs = Expr::binary(BinaryOp::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  Expr factor() {
    DepthGuard guard(*this);
    Expr b = base();
    skip_space();
    if (accept('^')) return Expr::binary(BinaryOp::Pow, b, factor());
    return b;
  }

  Expr base() {
    DepthGuard guard(*this);
    skip_space();
    if (pos_ == src_.size()) throw SyntaxError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '-') {
      ++pos_;
      return Expr::negate(base());
    }
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      skip_space();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw SyntaxError("unexpected character", pos_);
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t count = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++count;
      }
      return count;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw SyntaxError("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw SyntaxError("malformed exponent", pos_);
    }
    double v = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      throw SyntaxError("number out of range", start);
    }
    return Expr::literal(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(src_.substr(start, pos_ - start));
    const std::size_t after_name = pos_;
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      const auto f = function_by_name(name);
      if (!f) throw UnknownFunction(name, start);
      ++pos_;
      Expr arg = expr();
      skip_space();
      if (!accept(')')) throw SyntaxError("expected ')'", pos_);
      return Expr::call(*f, arg);
    }
    pos_ = after_name;
    for (std::size_t i = 0; i < coords_.size(); ++i) {
      if (coords_[i] == name) return Expr::variable(static_cast<int>(i));
    }
    throw UnknownIdentifier(name, start);
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string_view src_;
  std::span<const std::string> coords_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace detail

inline Expr parse_expression(std::string_view src, std::span<const std::string> coords) {
  return detail::Parser(src, coords).parse();
}

inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

namespace detail {

inline bool is_atom(const Node& n) {
  if (const auto* l = std::get_if<Literal>(&n.kind)) return !std::signbit(l->value);
  return std::holds_alternative<Variable>(n.kind) || std::holds_alternative<Call>(n.kind);
}

inline void print_node(const Node& n, std::span<const std::string> coords, std::string& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Literal>) {
          // negative literals only arise from programmatic construction
          if (std::signbit(x.value)) {
            out += "(-" + format_number(-x.value) + ")";
          } else {
            out += format_number(x.value);
          }
        } else if constexpr (std::is_same_v<T, Variable>) {
          if (x.index >= 0 && static_cast<std::size_t>(x.index) < coords.size()) {
            out += coords[static_cast<std::size_t>(x.index)];
          } else {
            out += "x" + std::to_string(x.index + 1);
          }
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += '-';
          if (is_atom(*x.operand)) {
            print_node(*x.operand, coords, out);
          } else {
            out += '(';
            print_node(*x.operand, coords, out);
            out += ')';
          }
        } else if constexpr (std::is_same_v<T, Binary>) {
          out += '(';
          print_node(*x.lhs, coords, out);
          out += operator_symbol(x.op);
          print_node(*x.rhs, coords, out);
          out += ')';
        } else {
          out += function_name(x.func);
          out += '(';
          print_node(*x.arg, coords, out);
          out += ')';
        }
      },
      n.kind);
}

}  // namespace detail

/// Canonical, fully parenthesized rendering; parsing it reproduces the tree.
inline std::string to_string(const Expr& e, std::span<const std::string> coords) {
  std::string out;
  detail::print_node(e.node(), coords, out);
  return out;
}

namespace detail {

inline std::optional<long long> integer_exponent(const Node& n) {
  double v = 0.0;
  if (const auto* l = std::get_if<Literal>(&n.kind)) {
    v = l->value;
  } else if (const auto* neg = std::get_if<Negate>(&n.kind)) {
    const auto* inner = std::get_if<Literal>(&neg->operand->kind);
    if (!inner) return std::nullopt;
    v = -inner->value;
  } else {
    return std::nullopt;
  }
  if (v != std::floor(v) || std::fabs(v) > 1e15) return std::nullopt;
  return static_cast<long long>(v);
}

inline Jet apply(Func f, const Jet& a) {
  switch (f) {
    case Func::Exp: return exp(a);
    case Func::Log: return log(a);
    case Func::Sin: return sin(a);
    case Func::Cos: return cos(a);
    case Func::Tan: return tan(a);
    case Func::Sinh: return sinh(a);
    case Func::Cosh: return cosh(a);
    case Func::Tanh: return tanh(a);
    case Func::Sqrt: return sqrt(a);
  }
  throw std::logic_error("unhandled function");
}

class Evaluator {
 public:
  Evaluator(std::span<const double> point, int order) : point_(point), order_(order) {}

  Jet eval(const Node& n) const {
    const int dim = static_cast<int>(point_.size());
    return std::visit(
        [&](const auto& x) -> Jet {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Literal>) {
            return Jet::constant(x.value, dim, order_);
          } else if constexpr (std::is_same_v<T, Variable>) {
            return Jet::coordinate(x.index, point_, order_);
          } else if constexpr (std::is_same_v<T, Negate>) {
            return -eval(*x.operand);
          } else if constexpr (std::is_same_v<T, Binary>) {
            Jet a = eval(*x.lhs);
            if (x.op == BinaryOp::Pow) {
              if (auto k = integer_exponent(*x.rhs)) return guarded(n, [&] { return pow_int(a, *k); });
              Jet b = eval(*x.rhs);
              return guarded(n, [&] { return pow(a, b); });
            }
            Jet b = eval(*x.rhs);
            return guarded(n, [&] {
              switch (x.op) {
                case BinaryOp::Add: return a + b;
                case BinaryOp::Sub: return a - b;
                case BinaryOp::Mul: return a * b;
                default: return a / b;
              }
            });
          } else {
            Jet a = eval(*x.arg);
            return guarded(n, [&] { return apply(x.func, a); });
          }
        },
        n.kind);
  }

 private:
  template <class F>
  Jet guarded(const Node& n, F&& f) const {
    try {
      return f();
    } catch (const DomainError& e) {
      if (!e.point().empty()) throw;
      std::string where;
      print_node(n, {}, where);
      throw DomainError(std::string(e.what()) + " in '" + where + "'",
                        std::vector<double>(point_.begin(), point_.end()));
    }
  }

  std::span<const double> point_;
  int order_;
};

}  // namespace detail

/// Evaluate to a jet of the given order at point p (dimension = p.size()).
inline Jet eval_expr(const Expr& e, std::span<const double> p, int order) {
  return detail::Evaluator(p, order).eval(e.node());
}

inline double eval_value(const Expr& e, std::span<const double> p) {
  return eval_expr(e, p, 0).value();
}

}  // namespace confproj
