#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "translift/common.hpp"

namespace translift {

// Closed parameter interval [lo, hi]. Degenerate lo == hi intervals are
// allowed and describe point paths.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo <= hi)) throw domain_error("interval: lo > hi");
  }

  static Interval unit() { return {0.0, 1.0}; }
  static Interval point(double r) { return {r, r}; }

  double length() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool is_point() const { return lo == hi; }

  bool contains(double t, double eps = kParamTol) const {
    return t >= lo - eps && t <= hi + eps;
  }
  bool contains(const Interval& sub, double eps = kParamTol) const {
    return sub.lo >= lo - eps && sub.hi <= hi + eps;
  }

  double clamp(double t) const { return std::min(std::max(t, lo), hi); }

  // n evenly spaced parameters (endpoints included). A point interval
  // collapses to the single parameter {lo}.
  std::vector<double> grid(int n) const {
    if (is_point() || n <= 1) return {lo};
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      g[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    g.back() = hi;
    return g;
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

inline bool nearly_equal(const Interval& a, const Interval& b, double eps = kParamTol) {
  return std::abs(a.lo - b.lo) <= eps && std::abs(a.hi - b.hi) <= eps;
}

}  // namespace translift
