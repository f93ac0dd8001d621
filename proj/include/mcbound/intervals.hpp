#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mcbound/errors.hpp"

namespace mcb {

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Finite union of closed intervals on the real line.
class IntervalSet {
 public:
  IntervalSet() = default;
  IntervalSet(std::initializer_list<Interval> parts) : parts_(parts) { check(); }
  explicit IntervalSet(std::vector<Interval> parts) : parts_(std::move(parts)) { check(); }

  static IntervalSet whole_line() { return IntervalSet{Interval{}}; }

  bool contains(double x) const {
    for (const auto& p : parts_)
      if (p.contains(x)) return true;
    return false;
  }

  const std::vector<Interval>& parts() const { return parts_; }

  bool is_whole_line() const {
    for (const auto& p : parts_)
      if (std::isinf(p.lo) && p.lo < 0 && std::isinf(p.hi) && p.hi > 0) return true;
    return false;
  }

  std::string describe() const {
    std::string s;
    for (const auto& p : parts_) {
      if (!s.empty()) s += " U ";
      s += "[" + fmt(p.lo) + ", " + fmt(p.hi) + "]";
    }
    return s.empty() ? "{}" : s;
  }

 private:
  static std::string fmt(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  void check() const {
    for (const auto& p : parts_)
      if (!(p.lo <= p.hi)) throw InvalidArgument("interval bounds out of order");
  }

  std::vector<Interval> parts_;
};

/// Evenly spaced probe points lo, lo+step, ..., up to hi (inclusive within
/// rounding).
inline std::vector<double> probe_grid(double lo, double hi, double step) {
  if (!(step > 0) || !(hi >= lo)) throw InvalidArgument("bad probe grid");
  std::vector<double> g;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long k = 0; k <= count; ++k) g.push_back(lo + static_cast<double>(k) * step);
  if (std::abs(g.back() - hi) < 1e-9 * step) g.back() = hi;
  return g;
}

}  // namespace mcb
