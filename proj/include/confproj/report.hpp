#pragma once

// Machine-readable reports.  Field names follow docs/report.schema.json; the
// document is a deterministic function of (scenario, seed, version).

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"  // nlohmann/json, vendored

#include "confproj/compat.hpp"
#include "confproj/scenario.hpp"

namespace confproj {

inline constexpr std::string_view kToolName = "confproj";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::size_t kWorstOffenders = 5;

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string scenario_digest(const Scenario& s) { return "fnv1a64:" + fnv1a_hex(to_json(s).dump()); }

inline nlohmann::json report_json(const Scenario& s, const CompatReport& r) {
  nlohmann::json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["scenario_digest"] = scenario_digest(s);
  doc["verdict"] = to_string(r.verdict);
  doc["eps_verdict"] = to_string(r.eps);
  nlohmann::json residuals{{"A", r.max_a}, {"B", r.max_b}};
  if (r.eps == EpsVerdict::Vacuous) {
    residuals["eps"] = "vacuous";
  } else {
    residuals["eps"] = r.max_eps;
  }
  doc["residuals"] = residuals;
  doc["samples"] = r.samples;
  doc["seed"] = r.seed;
  doc["evaluated_points"] = r.points.size();
  doc["null_vectors"] = r.null_vectors_checked;
  doc["tolerances"] = {{"residual", r.tolerances.residual},
                       {"rank", r.tolerances.rank},
                       {"quadrature", r.tolerances.quadrature}};

  std::vector<std::size_t> order(r.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::max(r.points[x].a, r.points[x].b) > std::max(r.points[y].a, r.points[y].b);
  });
  nlohmann::json worst = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min(order.size(), kWorstOffenders); ++i) {
    const PointSummary& p = r.points[order[i]];
    worst.push_back({{"point", p.point}, {"A", p.a}, {"B", p.b}});
  }
  doc["worst"] = worst;

  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& sp : r.skipped) skipped.push_back({{"point", sp.point}, {"reason", sp.reason}});
  doc["skipped"] = skipped;
  return doc;
}

}  // namespace confproj
