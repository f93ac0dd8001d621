#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mcb {

/// Where a constant in a report came from.
enum class Provenance { computed, preset, user_supplied, analytic, fallback };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::computed: return "computed";
    case Provenance::preset: return "preset";
    case Provenance::user_supplied: return "user-supplied";
    case Provenance::analytic: return "analytic";
    case Provenance::fallback: return "fallback";
  }
  return "unknown";
}

struct NamedInput {
  std::string value;  // exact rendering ("9/80") or decimal
  Provenance source = Provenance::computed;
};

struct CurvePoint {
  std::uint64_t n = 0;
  double value = 0.0;
  double log_value = 0.0;
  std::optional<std::uint64_t> j;  // Theorem-2 coupling-attempt count
};

struct Crossing {
  std::uint64_t n = 0;
  std::optional<std::uint64_t> j;
  double value = 0.0;
};

/// A bound (or exact) curve over n with its threshold crossing.
struct BoundReport {
  std::string kind;
  std::map<std::string, NamedInput> inputs;
  std::vector<CurvePoint> curve;
  std::optional<double> threshold;
  std::optional<Crossing> crossing;

  void add_point(std::uint64_t n, double value, std::optional<std::uint64_t> j = std::nullopt) {
    curve.push_back({n, value, value > 0 ? std::log(value) : -INFINITY, j});
  }

  /// Sets `crossing` to the first curve point strictly below `delta`.
  void locate_crossing(double delta) {
    threshold = delta;
    crossing.reset();
    for (const auto& pt : curve) {
      if (pt.value < delta) {
        crossing = Crossing{pt.n, pt.j, pt.value};
        return;
      }
    }
  }
};

}  // namespace mcb
