#pragma once

// Command-line verbs: check | recover | cone | gen-example.
// Exit codes: 0 success / compatible, 2 incompatible or non-generic, 1 error.

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"  // vendored
#include "json.hpp"   // nlohmann/json, vendored

#include "confproj/compat.hpp"
#include "confproj/cone.hpp"
#include "confproj/recover.hpp"
#include "confproj/report.hpp"
#include "confproj/scenario.hpp"
#include "confproj/symbolic.hpp"

namespace confproj::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitIncompatible = 2;

struct CommonFlags {
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_residual;
  std::optional<double> tol_quadrature;
  std::string out;
  bool quiet = false;
};

inline std::vector<double> parse_point(const std::string& text, const char* flag) {
  std::vector<double> p;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    std::string tok = text.substr(start, comma - start);
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw Error(std::string("invalid number '") + tok + "' in " + flag);
    }
    p.push_back(v);
    start = comma + 1;
  }
  return p;
}

inline void apply_overrides(Scenario& s, const CommonFlags& f) {
  if (f.samples) {
    if (*f.samples < 1) throw Error("--samples must be positive");
    s.samples = *f.samples;
  }
  if (f.seed) s.seed = *f.seed;
  if (f.tol_residual) s.tolerances.residual = *f.tol_residual;
  if (f.tol_quadrature) s.tolerances.quadrature = *f.tol_quadrature;
}

inline void emit(const nlohmann::json& doc, const CommonFlags& f, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  if (!f.out.empty()) {
    std::ofstream file(f.out, std::ios::binary);
    if (!file) throw Error("cannot write '" + f.out + "'");
    file << text;
  }
  if (!f.quiet) out << text;
}

inline int cmd_check(const std::string& path, const CommonFlags& f, std::ostream& out) {
  Scenario s = load_scenario_file(path);
  apply_overrides(s, f);
  const CompatReport r = check_compatibility(s);
  emit(report_json(s, r), f, out);
  return r.compatible() ? kExitOk : kExitIncompatible;
}

inline int cmd_recover(const std::string& path, const std::string& base_text, const std::string& at_text,
                       const CommonFlags& f, std::ostream& out) {
  Scenario s = load_scenario_file(path);
  apply_overrides(s, f);
  const std::vector<double> base = base_text.empty() ? s.box.center() : parse_point(base_text, "--base");
  const std::vector<double> at = parse_point(at_text, "--at");
  if (static_cast<int>(base.size()) != s.dimension || static_cast<int>(at.size()) != s.dimension) {
    throw Error("--base/--at need " + std::to_string(s.dimension) + " comma-separated values");
  }
  const CompatReport r = check_compatibility(s);
  nlohmann::json doc = report_json(s, r);
  if (!r.compatible()) {
    emit(doc, f, out);
    return kExitIncompatible;
  }
  const double phi = integrate_phi(s, base, at);
  const std::vector<std::vector<double>> at_list{at};
  const MetricValue g = recover_metric(s, base, at_list).front();
  const RecoveryCheck check = verify_recovery(s, base);
  nlohmann::json metric = nlohmann::json::array();
  for (int i = 0; i < s.dimension; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < s.dimension; ++j) row.push_back(g(i, j).value());
    metric.push_back(row);
  }
  doc["recovery"] = {{"phi", phi},
                     {"deviation", check.max_deviation},
                     {"pass", check.pass},
                     {"base", base},
                     {"at", at},
                     {"metric", metric}};
  emit(doc, f, out);
  return check.pass ? kExitOk : kExitIncompatible;
}

inline int cmd_cone(const std::string& path, const CommonFlags& f, std::ostream& out) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("dimension") || !doc["dimension"].is_number_integer()) {
    throw Error("/dimension: expected an integer");
  }
  const int n = doc["dimension"].get<int>();
  if (n < 2) throw Error("/dimension: must be at least 2");
  if (!doc.contains("vectors") || !doc["vectors"].is_array()) throw Error("/vectors: expected an array");
  std::vector<std::vector<double>> vectors;
  for (std::size_t i = 0; i < doc["vectors"].size(); ++i) {
    const auto& v = doc["vectors"][i];
    if (!v.is_array() || static_cast<int>(v.size()) != n) {
      throw Error("/vectors/" + std::to_string(i) + ": expected " + std::to_string(n) + " numbers");
    }
    std::vector<double> row;
    for (const auto& x : v) {
      if (!x.is_number()) throw Error("/vectors/" + std::to_string(i) + ": expected numbers");
      row.push_back(x.get<double>());
    }
    vectors.push_back(std::move(row));
  }
  const std::vector<double> g = reconstruct_conformal(vectors, n);
  nlohmann::json metric = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < n; ++j) row.push_back(g[static_cast<std::size_t>(i * n + j)]);
    metric.push_back(row);
  }
  emit({{"dimension", n}, {"vectors", vectors.size()}, {"metric", metric}}, f, out);
  return kExitOk;
}

struct GenExampleOptions {
  std::string builtin;  // "minkowski" or "euclidean"
  int dimension = 3;
  std::string metric_file;
  std::vector<std::string> s;
  std::string s_grad;
};

/// Scenario with Gamma = LC(g) - S^i g_jk.  With S = grad f (index raised by g)
/// the pair is compatible; with a generic S it satisfies the null-geodesic
/// condition but not condition (B).
inline Scenario generate_example(const GenExampleOptions& o) {
  Scenario s;
  if (!o.metric_file.empty()) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_text_file(o.metric_file));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ScenarioError("", "expected an object");
    if (!doc.contains("connection")) doc["connection"] = {{"kind", "levi_civita"}};
    if (!doc.contains("box") && doc.contains("dimension") && doc["dimension"].is_number_integer()) {
      const auto n = static_cast<std::size_t>(std::max(0, doc["dimension"].get<int>()));
      doc["box"] = {{"min", std::vector<double>(n, -1.0)}, {"max", std::vector<double>(n, 1.0)}};
    }
    s = load_scenario(doc);
  } else {
    const int n = o.dimension;
    if (n < 2) throw Error("--dimension must be at least 2");
    if (o.builtin != "minkowski" && o.builtin != "euclidean") {
      throw Error("unknown builtin metric '" + o.builtin + "' (use minkowski or euclidean)");
    }
    s.dimension = n;
    for (int i = 0; i < n; ++i) s.coordinates.push_back("x" + std::to_string(i + 1));
    s.box.min.assign(static_cast<std::size_t>(n), -1.0);
    s.box.max.assign(static_cast<std::size_t>(n), 1.0);
    s.metric.assign(static_cast<std::size_t>(n * n), sym::constant(0.0));
    for (int i = 0; i < n; ++i) {
      s.metric[static_cast<std::size_t>(i * n + i)] =
          sym::constant(o.builtin == "minkowski" && i == 0 ? -1.0 : 1.0);
    }
  }
  const int n = s.dimension;
  std::vector<Expr> svec(static_cast<std::size_t>(n), sym::constant(0.0));
  if (!o.s.empty() && !o.s_grad.empty()) throw Error("--s and --s-grad are mutually exclusive");
  if (!o.s.empty()) {
    if (static_cast<int>(o.s.size()) != n) throw Error("--s needs " + std::to_string(n) + " expressions");
    for (int i = 0; i < n; ++i) svec[static_cast<std::size_t>(i)] = parse_expression(o.s[static_cast<std::size_t>(i)], s.coordinates);
  } else if (!o.s_grad.empty()) {
    const Expr f = parse_expression(o.s_grad, s.coordinates);
    const std::vector<Expr> inv = sym::inverse(s.metric, n);
    for (int i = 0; i < n; ++i) {
      Expr acc = sym::constant(0.0);
      for (int j = 0; j < n; ++j) acc = sym::add(acc, sym::mul(inv[static_cast<std::size_t>(i * n + j)], sym::derivative(f, j)));
      svec[static_cast<std::size_t>(i)] = acc;
    }
  }
  s.connection = {ModifiedSRecipe{s.metric, std::move(svec)}};
  return s;
}

inline int cmd_gen_example(const GenExampleOptions& o, const CommonFlags& f, std::ostream& out) {
  Scenario s = generate_example(o);
  apply_overrides(s, f);
  emit(to_json(s), f, out);
  return kExitOk;
}

inline void add_common(CLI::App* cmd, CommonFlags& f, bool with_check_flags) {
  if (with_check_flags) {
    cmd->add_option("--samples", f.samples, "Number of sample points");
    cmd->add_option("--seed", f.seed, "RNG seed for sample points");
    cmd->add_option("--tol-residual", f.tol_residual, "Tolerance for the (A)/(B)/EPS residuals");
    cmd->add_option("--tol-quadrature", f.tol_quadrature, "Adaptive quadrature tolerance");
  }
  cmd->add_option("--out", f.out, "Write the JSON document to this file");
  cmd->add_flag("--quiet", f.quiet, "Do not print the JSON document");
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Compatibility of conformal and projective structures on a coordinate chart", "confproj"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  CommonFlags flags;
  std::string scenario_path, base_text, at_text, vectors_path;
  GenExampleOptions gen;

  auto* check = app.add_subcommand("check", "Test conditions (A), (B) and the null-geodesic condition");
  check->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  add_common(check, flags, true);

  auto* recover = app.add_subcommand("recover", "Reconstruct the compatible metric");
  recover->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  recover->add_option("--base", base_text, "Base point x1,x2,... (default: box center)");
  recover->add_option("--at", at_text, "Query point x1,x2,...")->required();
  add_common(recover, flags, true);

  auto* cone = app.add_subcommand("cone", "Reconstruct a conformal class from null vectors");
  cone->add_option("vectors", vectors_path, "JSON file {\"dimension\": n, \"vectors\": [[...], ...]}")->required();
  add_common(cone, flags, false);

  auto* gen_cmd = app.add_subcommand("gen-example", "Write a Gamma = LC(g) - S g scenario");
  auto* builtin = gen_cmd->add_option("--builtin", gen.builtin, "Builtin metric: minkowski | euclidean");
  auto* metric = gen_cmd->add_option("--metric", gen.metric_file, "JSON file with dimension, coordinates, metric");
  builtin->excludes(metric);
  gen_cmd->add_option("--dimension", gen.dimension, "Dimension of the builtin metric")->capture_default_str();
  gen_cmd->add_option("--s", gen.s, "Components of S (space or comma separated)")->delimiter(',');
  gen_cmd->add_option("--s-grad", gen.s_grad, "Potential f; S is the gradient of f");
  add_common(gen_cmd, flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitError;
  }

  try {
    if (check->parsed()) return cmd_check(scenario_path, flags, out);
    if (recover->parsed()) return cmd_recover(scenario_path, base_text, at_text, flags, out);
    if (cone->parsed()) return cmd_cone(vectors_path, flags, out);
    if (gen_cmd->parsed()) {
      if (gen.builtin.empty() && gen.metric_file.empty()) gen.builtin = "minkowski";
      return cmd_gen_example(gen, flags, out);
    }
  } catch (const NonGenericConfiguration& e) {
    err << "error: " << e.what() << "\n";
    return kExitIncompatible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace confproj::cli
