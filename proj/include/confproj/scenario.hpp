#pragma once

// Scenario documents: a coordinate chart with a metric representative and a
// connection recipe, loaded from JSON and evaluated pointwise on jets.

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"  // nlohmann/json, vendored

#include "confproj/errors.hpp"
#include "confproj/expr.hpp"
#include "confproj/geometry.hpp"

namespace confproj {

struct Tolerances {
  double residual = 1e-8;
  double rank = kDefaultRankTolerance;
  double quadrature = 1e-10;
};

struct Box {
  std::vector<double> min, max;

  bool contains(std::span<const double> p) const {
    for (std::size_t i = 0; i < min.size(); ++i) {
      if (p[i] < min[i] || p[i] > max[i]) return false;
    }
    return true;
  }
  std::vector<double> center() const {
    std::vector<double> c(min.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (min[i] + max[i]);
    return c;
  }
};

/// Row-major n x n expressions, symmetric by construction.
using ExprMatrix = std::vector<Expr>;

struct ConnectionRecipe;

struct LeviCivitaRecipe {
  ExprMatrix metric;
};
struct ExplicitRecipe {
  std::vector<Expr> gamma;  // (i*n + j)*n + k
};
/// Gamma = LeviCivita(h) - S^i h_jk.
struct ModifiedSRecipe {
  ExprMatrix metric;
  std::vector<Expr> s;
};
struct ProjectiveRecipe {
  std::shared_ptr<const ConnectionRecipe> base;
  std::vector<Expr> psi;
};

struct ConnectionRecipe {
  std::variant<LeviCivitaRecipe, ExplicitRecipe, ModifiedSRecipe, ProjectiveRecipe> kind;
};

struct Scenario {
  int dimension = 0;
  std::vector<std::string> coordinates;
  Box box;
  ExprMatrix metric;
  ConnectionRecipe connection;
  std::optional<Expr> sigma;  // metric representative becomes metric * exp(2 sigma)
  Tolerances tolerances;
  int samples = 200;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// pointwise evaluation

namespace detail {

inline MetricValue eval_metric_exprs(const ExprMatrix& m, std::span<const double> p, int order,
                                     const char* label) {
  const int n = static_cast<int>(p.size());
  MetricValue g(n, order);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      try {
        g.set(i, j, eval_expr(m[static_cast<std::size_t>(i * n + j)], p, order));
      } catch (const DomainError& e) {
        throw e.prefixed(std::string(label) + "[" + std::to_string(i) + "][" + std::to_string(j) + "]: ");
      }
    }
  }
  return g;
}

inline std::vector<Jet> eval_vector_exprs(const std::vector<Expr>& v, std::span<const double> p,
                                          int order, const char* label) {
  std::vector<Jet> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    try {
      out.push_back(eval_expr(v[i], p, order));
    } catch (const DomainError& e) {
      throw e.prefixed(std::string(label) + "[" + std::to_string(i) + "]: ");
    }
  }
  return out;
}

inline ConnectionValue eval_recipe(const ConnectionRecipe& r, std::span<const double> p, int order,
                                   double rank_tol) {
  const int n = static_cast<int>(p.size());
  return std::visit(
      [&](const auto& x) -> ConnectionValue {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, LeviCivitaRecipe>) {
          return christoffel(eval_metric_exprs(x.metric, p, order + 1, "connection.metric"), rank_tol);
        } else if constexpr (std::is_same_v<T, ExplicitRecipe>) {
          ConnectionValue c(n, order);
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              for (int k = j; k < n; ++k) {
                try {
                  c.set(i, j, k, eval_expr(x.gamma[static_cast<std::size_t>((i * n + j) * n + k)], p, order));
                } catch (const DomainError& e) {
                  throw e.prefixed("connection.gamma[" + std::to_string(i) + "][" + std::to_string(j) + "][" +
                                   std::to_string(k) + "]: ");
                }
              }
            }
          }
          return c;
        } else if constexpr (std::is_same_v<T, ModifiedSRecipe>) {
          const MetricValue h = eval_metric_exprs(x.metric, p, order + 1, "connection.metric");
          const ConnectionValue lc = christoffel(h, rank_tol);
          const std::vector<Jet> s = eval_vector_exprs(x.s, p, order, "connection.s");
          ConnectionValue c(n, order);
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              for (int k = j; k < n; ++k) {
                c.set(i, j, k, lc(i, j, k) - s[static_cast<std::size_t>(i)] * h(j, k).truncated(order));
              }
            }
          }
          return c;
        } else {
          const ConnectionValue base = eval_recipe(*x.base, p, order, rank_tol);
          return projective_transform(base, eval_vector_exprs(x.psi, p, order, "connection.psi"));
        }
      },
      r.kind);
}

}  // namespace detail

/// Metric representative at p (including the optional sigma rescale).
inline MetricValue metric_at(const Scenario& s, std::span<const double> p, int order) {
  MetricValue g = detail::eval_metric_exprs(s.metric, p, order, "metric");
  if (s.sigma) {
    Jet sigma;
    try {
      sigma = eval_expr(*s.sigma, p, order);
    } catch (const DomainError& e) {
      throw e.prefixed("sigma: ");
    }
    g = conformal_rescale_metric(g, sigma);
  }
  return g;
}

/// Connection representative at p as jets of the given order (default 1).
inline ConnectionValue connection_at(const Scenario& s, std::span<const double> p, int order = 1) {
  return detail::eval_recipe(s.connection, p, order, s.tolerances.rank);
}

// ---------------------------------------------------------------------------
// JSON loading

namespace detail {

using nlohmann::json;

inline std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
inline std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ScenarioError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ScenarioError(child(path, key), "missing required field");
  return *it;
}

inline Expr parse_entry(const json& j, const std::string& path, const std::vector<std::string>& coords) {
  if (j.is_number()) {
    const double v = j.get<double>();
    return v < 0 || std::signbit(v) ? Expr::negate(Expr::literal(-v)) : Expr::literal(v);
  }
  if (!j.is_string()) throw ScenarioError(path, "expected an expression string or number");
  try {
    return parse_expression(j.get<std::string>(), coords);
  } catch (const SyntaxError& e) {
    throw ScenarioError(path, e.what());
  }
}

inline bool omitted(const json& j) { return j.is_null() || (j.is_string() && j.get<std::string>().empty()); }

/// n x n symmetric matrix; each row i holds either n entries (those below the
/// diagonal may be null/"" and are mirrored) or the n - i entries from the diagonal on.
inline ExprMatrix parse_symmetric(const json& j, const std::string& path, int n,
                                  const std::vector<std::string>& coords, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw ScenarioError(path, "expected an array of " + std::to_string(n) + " rows");
  }
  ExprMatrix m(static_cast<std::size_t>(n * n));
  std::vector<std::optional<Expr>> lower(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    const std::string rp = child(path, static_cast<std::size_t>(i));
    if (!row.is_array()) throw ScenarioError(rp, "expected an array");
    const int len = static_cast<int>(row.size());
    if (len == n) {
      for (int c = 0; c < n; ++c) {
        const json& e = row[static_cast<std::size_t>(c)];
        const std::string ep = child(rp, static_cast<std::size_t>(c));
        if (c >= i) {
          m[static_cast<std::size_t>(i * n + c)] = parse_entry(e, ep, coords);
        } else if (!omitted(e)) {
          lower[static_cast<std::size_t>(i * n + c)] = parse_entry(e, ep, coords);
        }
      }
    } else if (len == n - i) {
      for (int c = i; c < n; ++c) {
        m[static_cast<std::size_t>(i * n + c)] =
            parse_entry(row[static_cast<std::size_t>(c - i)], child(rp, static_cast<std::size_t>(c - i)), coords);
      }
    } else {
      throw ScenarioError(rp, "row must have " + std::to_string(n) + " or " + std::to_string(n - i) + " entries");
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < i; ++c) {
      const Expr& upper = m[static_cast<std::size_t>(c * n + i)];
      const auto& given = lower[static_cast<std::size_t>(i * n + c)];
      if (given && !(*given == upper)) {
        throw ScenarioError(child(child(path, static_cast<std::size_t>(i)), static_cast<std::size_t>(c)),
                            std::string("asymmetric ") + what);
      }
      m[static_cast<std::size_t>(i * n + c)] = upper;
    }
  }
  return m;
}

inline std::vector<Expr> parse_vector(const json& j, const std::string& path, int n,
                                      const std::vector<std::string>& coords) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw ScenarioError(path, "expected an array of " + std::to_string(n) + " expressions");
  }
  std::vector<Expr> v;
  for (int i = 0; i < n; ++i) v.push_back(parse_entry(j[static_cast<std::size_t>(i)], child(path, static_cast<std::size_t>(i)), coords));
  return v;
}

inline ConnectionRecipe parse_recipe(const json& j, const std::string& path, int n,
                                     const std::vector<std::string>& coords, const ExprMatrix& default_metric,
                                     int depth = 0) {
  if (depth > 32) throw ScenarioError(path, "connection recipes nested too deeply");
  const json& kind_j = require(j, "kind", path);
  if (!kind_j.is_string()) throw ScenarioError(child(path, "kind"), "expected a string");
  const std::string kind = kind_j.get<std::string>();
  auto metric_or_default = [&] {
    return j.contains("metric") ? parse_symmetric(j["metric"], child(path, "metric"), n, coords, "metric")
                                : default_metric;
  };
  if (kind == "levi_civita") return {LeviCivitaRecipe{metric_or_default()}};
  if (kind == "modified_s") {
    ExprMatrix m = metric_or_default();
    return {ModifiedSRecipe{std::move(m), parse_vector(require(j, "s", path), child(path, "s"), n, coords)}};
  }
  if (kind == "explicit") {
    const json& g = require(j, "gamma", path);
    const std::string gp = child(path, "gamma");
    if (!g.is_array() || static_cast<int>(g.size()) != n) {
      throw ScenarioError(gp, "expected " + std::to_string(n) + " matrices");
    }
    ExplicitRecipe r;
    r.gamma.resize(static_cast<std::size_t>(n * n * n));
    for (int i = 0; i < n; ++i) {
      const ExprMatrix slice = parse_symmetric(g[static_cast<std::size_t>(i)], child(gp, static_cast<std::size_t>(i)), n, coords,
                                               "explicit gamma");
      std::copy(slice.begin(), slice.end(), r.gamma.begin() + static_cast<std::ptrdiff_t>(i * n * n));
    }
    return {std::move(r)};
  }
  if (kind == "projective_transform") {
    auto base = std::make_shared<const ConnectionRecipe>(
        parse_recipe(require(j, "base", path), child(path, "base"), n, coords, default_metric, depth + 1));
    return {ProjectiveRecipe{std::move(base), parse_vector(require(j, "psi", path), child(path, "psi"), n, coords)}};
  }
  throw ScenarioError(child(path, "kind"), "unknown connection kind '" + kind + "'");
}

inline bool valid_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

inline double positive_number(const json& j, const std::string& path) {
  if (!j.is_number() || !(j.get<double>() > 0.0)) throw ScenarioError(path, "expected a positive number");
  return j.get<double>();
}

}  // namespace detail

inline Scenario load_scenario(const nlohmann::json& doc) {
  using detail::child;
  using detail::require;
  const std::string root;
  Scenario s;

  const auto& dim = require(doc, "dimension", root);
  if (!dim.is_number_integer()) throw ScenarioError("/dimension", "expected an integer");
  s.dimension = dim.get<int>();
  if (s.dimension < 2) throw ScenarioError("/dimension", "dimension must be at least 2");
  if (s.dimension > 16) throw ScenarioError("/dimension", "dimension above 16 is not supported");
  const int n = s.dimension;

  const auto& coords = require(doc, "coordinates", root);
  if (!coords.is_array() || static_cast<int>(coords.size()) != n) {
    throw ScenarioError("/coordinates", "expected " + std::to_string(n) + " names");
  }
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (!coords[i].is_string() || !detail::valid_identifier(coords[i].get<std::string>())) {
      throw ScenarioError(child("/coordinates", i), "expected an identifier");
    }
    const std::string name = coords[i].get<std::string>();
    if (function_by_name(name)) throw ScenarioError(child("/coordinates", i), "coordinate name shadows a function");
    if (std::find(s.coordinates.begin(), s.coordinates.end(), name) != s.coordinates.end()) {
      throw ScenarioError(child("/coordinates", i), "duplicate coordinate name");
    }
    s.coordinates.push_back(name);
  }

  const auto& box = require(doc, "box", root);
  for (const char* key : {"min", "max"}) {
    const auto& arr = require(box, key, "/box");
    const std::string bp = child("/box", key);
    if (!arr.is_array() || static_cast<int>(arr.size()) != n) throw ScenarioError(bp, "expected " + std::to_string(n) + " numbers");
    std::vector<double>& dst = std::string(key) == "min" ? s.box.min : s.box.max;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number() || !std::isfinite(arr[i].get<double>())) throw ScenarioError(child(bp, i), "expected a finite number");
      dst.push_back(arr[i].get<double>());
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!(s.box.min[static_cast<std::size_t>(i)] < s.box.max[static_cast<std::size_t>(i)])) {
      throw ScenarioError(child("/box/min", static_cast<std::size_t>(i)), "box min must be below max");
    }
  }

  s.metric = detail::parse_symmetric(require(doc, "metric", root), "/metric", n, s.coordinates, "metric");
  s.connection = detail::parse_recipe(require(doc, "connection", root), "/connection", n, s.coordinates, s.metric);
  if (doc.contains("sigma") && !doc["sigma"].is_null()) s.sigma = detail::parse_entry(doc["sigma"], "/sigma", s.coordinates);

  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    if (!t.is_object()) throw ScenarioError("/tolerances", "expected an object");
    if (t.contains("residual")) s.tolerances.residual = detail::positive_number(t["residual"], "/tolerances/residual");
    if (t.contains("rank")) s.tolerances.rank = detail::positive_number(t["rank"], "/tolerances/rank");
    if (t.contains("quadrature")) s.tolerances.quadrature = detail::positive_number(t["quadrature"], "/tolerances/quadrature");
  }
  if (doc.contains("samples")) {
    if (!doc["samples"].is_number_integer() || doc["samples"].get<long long>() < 1) {
      throw ScenarioError("/samples", "expected a positive integer");
    }
    s.samples = doc["samples"].get<int>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0)) {
      throw ScenarioError("/seed", "expected a non-negative integer");
    }
    s.seed = doc["seed"].get<std::uint64_t>();
  }
  return s;
}

inline Scenario load_scenario(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("", std::string("invalid JSON: ") + e.what());
  }
  return load_scenario(doc);
}

inline Scenario load_scenario(const std::string& text) { return load_scenario(std::string_view(text)); }
inline Scenario load_scenario(const char* text) { return load_scenario(std::string_view(text)); }

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Scenario load_scenario_file(const std::string& path) { return load_scenario(read_text_file(path)); }

// ---------------------------------------------------------------------------
// JSON writing

namespace detail {

inline nlohmann::json matrix_json(const ExprMatrix& m, int n, const std::vector<std::string>& coords) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < n; ++j) row.push_back(to_string(m[static_cast<std::size_t>(i * n + j)], coords));
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::json vector_json(const std::vector<Expr>& v, const std::vector<std::string>& coords) {
  nlohmann::json a = nlohmann::json::array();
  for (const Expr& e : v) a.push_back(to_string(e, coords));
  return a;
}

inline nlohmann::json recipe_json(const ConnectionRecipe& r, int n, const std::vector<std::string>& coords) {
  return std::visit(
      [&](const auto& x) -> nlohmann::json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, LeviCivitaRecipe>) {
          return {{"kind", "levi_civita"}, {"metric", matrix_json(x.metric, n, coords)}};
        } else if constexpr (std::is_same_v<T, ExplicitRecipe>) {
          nlohmann::json g = nlohmann::json::array();
          for (int i = 0; i < n; ++i) {
            ExprMatrix slice(x.gamma.begin() + i * n * n, x.gamma.begin() + (i + 1) * n * n);
            g.push_back(matrix_json(slice, n, coords));
          }
          return {{"kind", "explicit"}, {"gamma", g}};
        } else if constexpr (std::is_same_v<T, ModifiedSRecipe>) {
          return {{"kind", "modified_s"}, {"metric", matrix_json(x.metric, n, coords)}, {"s", vector_json(x.s, coords)}};
        } else {
          return {{"kind", "projective_transform"}, {"base", recipe_json(*x.base, n, coords)}, {"psi", vector_json(x.psi, coords)}};
        }
      },
      r.kind);
}

}  // namespace detail

inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json doc;
  doc["dimension"] = s.dimension;
  doc["coordinates"] = s.coordinates;
  doc["box"] = {{"min", s.box.min}, {"max", s.box.max}};
  doc["metric"] = detail::matrix_json(s.metric, s.dimension, s.coordinates);
  doc["connection"] = detail::recipe_json(s.connection, s.dimension, s.coordinates);
  if (s.sigma) doc["sigma"] = to_string(*s.sigma, s.coordinates);
  doc["tolerances"] = {{"residual", s.tolerances.residual}, {"rank", s.tolerances.rank}, {"quadrature", s.tolerances.quadrature}};
  doc["samples"] = s.samples;
  doc["seed"] = s.seed;
  return doc;
}

}  // namespace confproj
