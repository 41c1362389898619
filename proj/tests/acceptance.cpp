// Acceptance gate: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes.  Oracles come from tests/test_support.hpp and from
// finite differences; tolerances are fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "confproj/cli.hpp"
#include "confproj/confproj.hpp"
#include "test_support.hpp"

namespace {

using namespace confproj;
using confproj::testing::coordinate_names;
using confproj::testing::metric_jets;
using confproj::testing::random_point;
using confproj::testing::scalar_jet;
using nlohmann::json;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// 1 ------------------------------------------------------------------------
Outcome round_trip_compatibility() {
  constexpr double kResidual = 1e-8, kDeviation = 1e-6;
  SplitMix64 rng(0xC0FFEE);
  double worst_ab = 0.0, worst_dev = 0.0;
  int compatible = 0;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 3;
    const Scenario s = load_scenario(testing::random_compatible_scenario(rng, n, 60, static_cast<std::uint64_t>(t)).json);
    const CompatReport r = check_compatibility(s);
    compatible += r.compatible() ? 1 : 0;
    worst_ab = std::max({worst_ab, r.max_a, r.max_b});
    worst_dev = std::max(worst_dev, verify_recovery(s, s.box.center()).max_deviation);
  }
  return {compatible == 50 && worst_ab <= kResidual && worst_dev <= kDeviation,
          "50 scenarios, compatible " + std::to_string(compatible) + "/50, max A,B " + sci(worst_ab) +
              ", max recovery deviation " + sci(worst_dev)};
}

// 2 ------------------------------------------------------------------------
Outcome modified_s_regression() {
  const Scenario s = load_scenario(testing::kModifiedSScenario);
  const CompatReport r = check_compatibility(s);

  const auto dir = std::filesystem::temp_directory_path() / "confproj_acceptance";
  std::filesystem::create_directories(dir);
  const std::string file = (dir / "eps_incompatible.json").string();
  std::ofstream(file) << testing::kModifiedSScenario;
  const std::vector<const char*> argv{"confproj", "check", file.c_str(), "--quiet"};
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  std::filesystem::remove_all(dir);

  const bool pass = r.max_eps <= 1e-10 && r.null_vectors_checked >= 100 && r.max_a <= 1e-10 &&
                    std::fabs(r.max_b - 1.0) <= 1e-9 && r.verdict == Verdict::FailsB && code == 2;
  return {pass, "EPS " + sci(r.max_eps) + " over " + std::to_string(r.null_vectors_checked) + " null vectors, A " +
                    sci(r.max_a) + ", |B-1| " + sci(std::fabs(r.max_b - 1.0)) + ", verdict " + to_string(r.verdict) +
                    ", exit " + std::to_string(code)};
}

// 3 ------------------------------------------------------------------------
Outcome representative_independence() {
  constexpr double kTol = 1e-8;
  SplitMix64 rng(0xBEEF);
  double worst = 0.0;
  int verdict_changes = 0, incompatible = 0;
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 3;
    std::string js;
    switch (t % 4) {
      case 0:
      case 1: js = testing::random_compatible_scenario(rng, n, 40).json; break;
      case 2: js = testing::random_modified_s_scenario(rng, n, 40); break;
      default: js = testing::random_explicit_scenario(rng, n, 40); break;
    }
    json doc = json::parse(js);
    const Scenario s = load_scenario(doc);
    doc["sigma"] = testing::random_polynomial(rng, n, 2, 0.4);
    std::vector<std::string> psi;
    for (int i = 0; i < n; ++i) psi.push_back(testing::random_polynomial(rng, n, 2, 0.5));
    doc["connection"] = {{"kind", "projective_transform"}, {"base", doc["connection"]}, {"psi", psi}};
    const Scenario moved = load_scenario(doc);

    for (int q = 0; q < 20; ++q) {
      const auto p = random_point(rng, n);
      const ObstructionData a = analyze_point(s, p), b = analyze_point(moved, p);
      for (std::size_t i = 0; i < a.a.size(); ++i) worst = std::max(worst, std::fabs(a.a[i] - b.a[i]) / a.scale);
      for (std::size_t i = 0; i < a.b.size(); ++i) worst = std::max(worst, std::fabs(a.b[i] - b.b[i]) / a.scale);
    }
    const Verdict va = check_compatibility(s).verdict, vb = check_compatibility(moved).verdict;
    verdict_changes += va != vb ? 1 : 0;
    incompatible += va != Verdict::Compatible ? 1 : 0;
  }
  return {worst <= kTol && verdict_changes == 0,
          "20 scenarios (" + std::to_string(incompatible) + " incompatible) x 20 points, max change " + sci(worst) +
              ", verdict changes " + std::to_string(verdict_changes)};
}

// 4 ------------------------------------------------------------------------
Outcome thomas_symbol_laws() {
  constexpr double kTol = 1e-12;
  SplitMix64 rng(0x7A);
  double trace = 0.0, invariance = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 4;
    ConnectionValue gamma(n, 0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = j; k < n; ++k) gamma.set(i, j, k, Jet::constant(rng.uniform(-3, 3), n, 0));
      }
    }
    OneFormValue psi;
    for (int i = 0; i < n; ++i) psi.push_back(Jet::constant(rng.uniform(-3, 3), n, 0));
    const ThomasValue pi = thomas_symbol(gamma);
    for (int k = 0; k < n; ++k) {
      double a = 0.0, b = 0.0;
      for (int p = 0; p < n; ++p) {
        a += pi(p, p, k);
        b += pi(p, k, p);
      }
      trace = std::max({trace, std::fabs(a), std::fabs(b)});
    }
    invariance = std::max(invariance, max_abs_difference(pi, thomas_symbol(projective_transform(gamma, psi))));
  }
  return {trace <= kTol && invariance <= kTol,
          "100 connections, max trace " + sci(trace) + ", max invariance defect " + sci(invariance)};
}

// 5 ------------------------------------------------------------------------
Outcome rescaling_identity() {
  constexpr double kTol = 1e-9;
  SplitMix64 rng(0x5);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 3;
    const auto names = coordinate_names(n);
    const auto p = random_point(rng, n);
    const MetricValue g = metric_jets(testing::random_metric(rng, n, 0.2), names, p, 2);
    const Jet phi = scalar_jet(testing::random_polynomial(rng, n, 2, 0.5), names, p, 2);
    const ConnectionValue a = christoffel(conformal_rescale_metric(g, phi));
    const ConnectionValue b = rescaled_connection(g, phi);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) worst = std::max(worst, std::fabs(a(i, j, k).value() - b(i, j, k).value()));
      }
    }
  }
  return {worst <= kTol, "50 (g, phi) pairs, max componentwise difference " + sci(worst)};
}

// 6 ------------------------------------------------------------------------
Outcome cone_round_trip() {
  constexpr double kTol = 1e-8;
  SplitMix64 rng(0x6);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    // n >= 3: random samples from the 2-D cone (two lines) are not generic
    const int n = 3 + t % 3;
    const auto names = coordinate_names(n);
    auto entries = testing::random_metric(rng, n, 0.1);
    entries[0] = "-(" + entries[0] + ")";
    const MetricValue g = metric_jets(entries, names, random_point(rng, n), 0);
    const int count = 2 * static_cast<int>(min_cone_vectors(n));
    std::vector<std::vector<double>> vs;
    for (const auto& nv : sample_null_vectors(g, count, rng)) vs.push_back(nv.u);
    const auto r = reconstruct_conformal(vs, n);
    const auto expected = canonicalize_conformal(g.values());
    for (std::size_t i = 0; i < r.size(); ++i) worst = std::max(worst, std::fabs(r[i] - expected[i]));
  }

  int rejected = 0;
  const std::vector<std::vector<std::vector<double>>> degenerate{
      {{1, 1}, {2, 2}},
      {{1, 1, 0}, {1, -1, 0}, {2, 2, 0}, {1, 1, 0}, {3, -3, 0}},
      {{1, 1, 0}, {1, 1, 0}, {1, 1, 0}, {1, 1, 0}, {1, 1, 0}, {1, 1, 0}},
  };
  for (const auto& vs : degenerate) {
    try {
      reconstruct_conformal(vs, static_cast<int>(vs[0].size()));
    } catch (const NonGenericConfiguration&) {
      ++rejected;
    }
  }
  return {worst <= kTol && rejected == static_cast<int>(degenerate.size()),
          "20 metrics (n = 3..5), max normalized deviation " + sci(worst) + ", degenerate sets rejected " +
              std::to_string(rejected) + "/" + std::to_string(degenerate.size())};
}

// 7 ------------------------------------------------------------------------
Outcome recovery_analytics() {
  SplitMix64 rng(0x77);
  double grad = 0.0, path = 0.0, weyl = 0.0;
  for (int t = 0; t < 6; ++t) {
    const int n = 2 + t % 3;
    const Scenario s = load_scenario(testing::random_compatible_scenario(rng, n).json);

    const auto base = random_point(rng, n, -0.5, 0.5);
    const auto x = random_point(rng, n, -0.8, 0.8);
    const testing::ScalarField f = [&](const std::vector<double>& q) { return integrate_phi(s, base, q); };
    const auto fd = testing::fd_gradient(f, x, 1e-4);
    const auto tdown = trace_covector_at(s, x);
    for (int i = 0; i < n; ++i) grad = std::max(grad, std::fabs(fd[static_cast<std::size_t>(i)] - tdown[static_cast<std::size_t>(i)].value()));

    const auto target = random_point(rng, n);
    std::vector<double> corner = base;
    corner[0] = target[0];
    const std::vector<std::vector<double>> poly{base, corner, target};
    path = std::max(path, std::fabs(integrate_phi(s, base, target) - integrate_phi_along(s, poly)));

    const auto b2 = random_point(rng, n);
    const double offset = integrate_phi(s, base, s.box.center()) - integrate_phi(s, b2, s.box.center());
    for (int q = 0; q < 5; ++q) {
      const auto y = random_point(rng, n);
      weyl = std::max(weyl, std::fabs(integrate_phi(s, base, y) - integrate_phi(s, b2, y) - offset));
    }
  }
  return {grad <= 1e-5 && path <= 1e-9 && weyl <= 1e-8,
          "FD gradient " + sci(grad) + ", two-path " + sci(path) + ", base-change spread " + sci(weyl)};
}

// 8 ------------------------------------------------------------------------
Outcome jet_engine() {
  SplitMix64 rng(0x88);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + t % 3;
    const auto names = coordinate_names(n);
    const Expr e = parse_expression(testing::random_smooth_expression(rng, n, 3), names);
    const auto p = random_point(rng, n, -0.9, 0.9);
    const Jet j = eval_expr(e, p, 2);
    const testing::ScalarField f = [&](const std::vector<double>& q) { return eval_value(e, q); };
    const auto g = testing::fd_gradient(f, p, 1e-4);
    const auto h = testing::fd_hessian(f, p, 1e-4);
    const double scale = std::max(1.0, std::fabs(j.value()));
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst, std::fabs(g[static_cast<std::size_t>(i)] - j.gradient(i)) / std::max(scale, std::fabs(j.gradient(i))));
      for (int k = 0; k < n; ++k) {
        worst = std::max(worst, std::fabs(h[static_cast<std::size_t>(i * n + k)] - j.hessian(i, k)) /
                                    std::max(scale, std::fabs(j.hessian(i, k))));
      }
    }
  }

  const std::vector<std::string> xy{"x", "y"};
  const std::string alphabet = "xy0123456789.eE+-*/^() sincoexplgqrtah_,#";
  int crashes = 0, fuzzed = 0;
  for (int t = 0; t < 20000; ++t, ++fuzzed) {
    std::string src;
    const int len = static_cast<int>(rng.uniform() * 24);
    for (int i = 0; i < len; ++i) src += alphabet[static_cast<std::size_t>(rng.uniform() * alphabet.size())];
    try {
      const Expr e = parse_expression(src, xy);
      const std::vector<double> p{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      (void)eval_expr(e, p, 2);
    } catch (const SyntaxError&) {
    } catch (const DomainError&) {
    } catch (...) {
      ++crashes;
    }
  }

  int unstable = 0;
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + t % 4;
    const auto names = coordinate_names(n);
    const Expr e = parse_expression(testing::random_smooth_expression(rng, n, 4), names);
    const Expr again = parse_expression(to_string(e, names), names);
    unstable += (again == e && to_string(again, names) == to_string(e, names)) ? 0 : 1;
  }
  return {worst <= 1e-6 && crashes == 0 && unstable == 0,
          "max relative FD mismatch " + sci(worst) + " (500 expressions), fuzz " + std::to_string(fuzzed) +
              " inputs with " + std::to_string(crashes) + " unstructured failures, round-trip mismatches " +
              std::to_string(unstable)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"round-trip compatibility", round_trip_compatibility},
      {"EPS-but-incompatible regression", modified_s_regression},
      {"representative independence", representative_independence},
      {"Thomas-symbol laws", thomas_symbol_laws},
      {"conformal rescaling identity", rescaling_identity},
      {"cone reconstruction", cone_round_trip},
      {"recovery analytics", recovery_analytics},
      {"jet engine", jet_engine},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += o.pass ? 0 : 1;
    std::printf("criterion %zu %s: %s (%s; %.1fs)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
