#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "translift/common.hpp"
#include "translift/interval.hpp"

namespace translift {

// Change of path parameter: a bijection source -> target. `map_deriv` is
// optional; when absent, derivatives fall back to central differences.
struct Reparam {
  Interval source;
  Interval target;
  std::function<double(double)> map;
  std::function<double(double)> inverse_map;
  std::function<double(double)> map_deriv;
  bool orientation_preserving = true;

  double operator()(double t) const {
    if (!source.contains(t)) throw domain_error("reparam: parameter outside source");
    return target.clamp(map(source.clamp(t)));
  }

  double deriv(double t) const {
    if (map_deriv) return map_deriv(source.clamp(t));
    const double h = std::max(1e-6, 1e-6 * source.length());
    const double a = source.clamp(t - h);
    const double b = source.clamp(t + h);
    if (b <= a) return 0.0;
    return (map(b) - map(a)) / (b - a);
  }

  static Reparam identity(const Interval& j) {
    Reparam r;
    r.source = r.target = j;
    r.map = r.inverse_map = [](double t) { return t; };
    r.map_deriv = [](double) { return 1.0; };
    return r;
  }

  // Affine bijection source -> target; `preserving` picks the orientation.
  static Reparam affine(const Interval& source, const Interval& target, bool preserving = true) {
    Reparam r;
    r.source = source;
    r.target = target;
    r.orientation_preserving = preserving;
    const double sl = source.lo, span_s = source.length();
    const double tl = target.lo, th = target.hi, span_t = target.length();
    if (span_s == 0.0) {
      if (span_t != 0.0) throw domain_error("reparam: point source, non-point target");
      r.map = [tl](double) { return tl; };
      r.inverse_map = [sl](double) { return sl; };
      r.map_deriv = [](double) { return 0.0; };
      return r;
    }
    const double slope = (preserving ? span_t : -span_t) / span_s;
    const double off = preserving ? tl - slope * sl : th - slope * sl;
    r.map = [slope, off](double t) { return slope * t + off; };
    r.inverse_map = [slope, off](double u) { return (u - off) / slope; };
    r.map_deriv = [slope](double) { return slope; };
    return r;
  }

  // t -> t^2 on [0,1]; the standard smooth, non-affine change of parameter.
  static Reparam square() {
    Reparam r;
    r.source = r.target = Interval::unit();
    r.map = [](double t) { return t * t; };
    r.inverse_map = [](double u) { return std::sqrt(std::max(0.0, u)); };
    r.map_deriv = [](double t) { return 2.0 * t; };
    return r;
  }

  // Increasing piecewise-linear map through matched knot lists.
  static Reparam piecewise_linear(std::vector<double> src, std::vector<double> dst) {
    if (src.size() != dst.size() || src.size() < 2)
      throw domain_error("reparam: knot lists must match and have >= 2 entries");
    for (std::size_t i = 1; i < src.size(); ++i)
      if (!(src[i] > src[i - 1]) || !(dst[i] > dst[i - 1]))
        throw domain_error("reparam: knots must be strictly increasing");
    Reparam r;
    r.source = Interval{src.front(), src.back()};
    r.target = Interval{dst.front(), dst.back()};
    auto interp = [](const std::vector<double>& xs, const std::vector<double>& ys, double t) {
      auto it = std::upper_bound(xs.begin(), xs.end(), t);
      std::size_t k = static_cast<std::size_t>(
          std::clamp<std::ptrdiff_t>(it - xs.begin() - 1, 0,
                                     static_cast<std::ptrdiff_t>(xs.size()) - 2));
      const double w = (t - xs[k]) / (xs[k + 1] - xs[k]);
      return ys[k] + w * (ys[k + 1] - ys[k]);
    };
    r.map = [src, dst, interp](double t) { return interp(src, dst, t); };
    r.inverse_map = [src, dst, interp](double u) { return interp(dst, src, u); };
    return r;
  }
};

// outer ∘ inner: requires inner.target == outer.source.
inline Reparam compose(const Reparam& outer, const Reparam& inner) {
  if (!nearly_equal(inner.target, outer.source))
    throw domain_error("reparam compose: interval mismatch");
  Reparam r;
  r.source = inner.source;
  r.target = outer.target;
  r.orientation_preserving = outer.orientation_preserving == inner.orientation_preserving;
  r.map = [o = outer.map, i = inner.map](double t) { return o(i(t)); };
  r.inverse_map = [o = outer.inverse_map, i = inner.inverse_map](double u) { return i(o(u)); };
  if (outer.map_deriv && inner.map_deriv)
    r.map_deriv = [od = outer.map_deriv, im = inner.map, id = inner.map_deriv](double t) {
      return od(im(t)) * id(t);
    };
  return r;
}

enum class PathKind { analytic, piecewise, sampled };

// A parametrized curve in a single chart of the base space. Values are
// immutable after construction and safe to share across threads.
//
// `deriv_fn` is engaged iff the path is declared C1. Piecewise paths keep
// their pieces so that integrators can evaluate one-sided-smooth closures
// on each smooth segment.
struct PathSpec {
  Interval domain;
  std::function<Vec(double)> eval_fn;
  std::function<Vec(double)> deriv_fn;
  PathKind kind = PathKind::analytic;
  std::vector<double> breakpoints;  // interior smoothness breaks, sorted
  std::vector<PathSpec> pieces;     // piecewise children covering the domain
  std::string id;
  int space_dim = 0;

  bool is_c1() const { return static_cast<bool>(deriv_fn); }

  Vec eval(double t) const {
    if (!domain.contains(t)) throw domain_error("path '" + id + "': parameter outside domain");
    return eval_fn(domain.clamp(t));
  }

  Vec deriv(double t) const {
    if (!deriv_fn) throw domain_error("path '" + id + "': derivative requested on a non-C1 path");
    if (!domain.contains(t)) throw domain_error("path '" + id + "': parameter outside domain");
    return deriv_fn(domain.clamp(t));
  }
};

namespace detail {

inline std::size_t piece_index(const std::vector<PathSpec>& pieces, double t) {
  // Right-closed convention: parameter exactly at a join belongs to the
  // later piece, except at the very end of the domain.
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
    if (t < pieces[i].domain.hi) return i;
  return pieces.size() - 1;
}

// Natural cubic spline through knots; C2 on the whole knot range.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> ts, std::vector<Vec> xs) : t_(std::move(ts)) {
    const std::size_t n = t_.size();
    if (n < 2 || xs.size() != n) throw domain_error("spline: need >= 2 matched knots");
    for (std::size_t i = 1; i < n; ++i)
      if (!(t_[i] > t_[i - 1])) throw domain_error("spline: knots must increase");
    const Eigen::Index d = xs.front().size();
    for (const Vec& x : xs)
      if (x.size() != d) throw domain_error("spline: knot dimension mismatch");

    std::vector<Vec> m(n, Vec::Zero(d));  // second derivatives, natural BCs
    if (n > 2) {
      const std::size_t k = n - 2;
      std::vector<double> diag(k), lower(k), upper(k);
      std::vector<Vec> rhs(k, Vec::Zero(d));
      for (std::size_t i = 0; i < k; ++i) {
        const double h0 = t_[i + 1] - t_[i];
        const double h1 = t_[i + 2] - t_[i + 1];
        lower[i] = h0;
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] = 6.0 * ((xs[i + 2] - xs[i + 1]) / h1 - (xs[i + 1] - xs[i]) / h0);
      }
      // Thomas algorithm.
      for (std::size_t i = 1; i < k; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
      m[k] = rhs[k - 1] / diag[k - 1];
      for (std::size_t i = k - 1; i-- > 0;) m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
    }

    a_ = std::move(xs);
    b_.resize(n - 1);
    c_.resize(n - 1);
    d_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = t_[i + 1] - t_[i];
      b_[i] = (a_[i + 1] - a_[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
      c_[i] = m[i] / 2.0;
      d_[i] = (m[i + 1] - m[i]) / (6.0 * h);
    }
  }

  Vec value(double t) const {
    const std::size_t i = segment(t);
    const double u = t - t_[i];
    return a_[i] + u * (b_[i] + u * (c_[i] + u * d_[i]));
  }

  Vec derivative(double t) const {
    const std::size_t i = segment(t);
    const double u = t - t_[i];
    return b_[i] + u * (2.0 * c_[i] + 3.0 * u * d_[i]);
  }

 private:
  std::size_t segment(double t) const {
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
        it - t_.begin() - 1, 0, static_cast<std::ptrdiff_t>(t_.size()) - 2));
  }

  std::vector<double> t_;
  std::vector<Vec> a_, b_, c_, d_;
};

}  // namespace detail

inline PathSpec analytic_path(Interval domain, std::function<Vec(double)> eval,
                              std::function<Vec(double)> deriv = {}, std::string id = "") {
  PathSpec p;
  p.domain = domain;
  p.eval_fn = std::move(eval);
  p.deriv_fn = std::move(deriv);
  p.kind = PathKind::analytic;
  p.id = std::move(id);
  p.space_dim = static_cast<int>(p.eval_fn(domain.lo).size());
  return p;
}

// The constant path {r} -> {x}. Carries a zero derivative.
inline PathSpec point_path(double r, Vec x) {
  const Vec z = Vec::Zero(x.size());
  return analytic_path(Interval::point(r), [x](double) { return x; },
                       [z](double) { return z; }, "point");
}

// Interpolated path through knots. order 3 builds a C2 natural cubic spline
// with an exact spline derivative; order 1 is piecewise linear and not C1.
inline PathSpec sampled_path(std::vector<double> ts, std::vector<Vec> xs, int order = 3,
                             std::string id = "") {
  if (ts.size() != xs.size() || ts.size() < 2)
    throw domain_error("sampled path: need >= 2 matched knots");
  PathSpec p;
  p.domain = Interval{ts.front(), ts.back()};
  p.kind = PathKind::sampled;
  p.id = std::move(id);
  if (order >= 2) {
    auto spline = std::make_shared<const detail::CubicSpline>(ts, xs);
    p.eval_fn = [spline](double t) { return spline->value(t); };
    p.deriv_fn = [spline](double t) { return spline->derivative(t); };
  } else {
    p.breakpoints.assign(ts.begin() + 1, ts.end() - 1);
    auto knots_t = std::make_shared<const std::vector<double>>(std::move(ts));
    auto knots_x = std::make_shared<const std::vector<Vec>>(std::move(xs));
    p.eval_fn = [knots_t, knots_x](double t) {
      const auto& T = *knots_t;
      auto it = std::upper_bound(T.begin(), T.end(), t);
      std::size_t k = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
          it - T.begin() - 1, 0, static_cast<std::ptrdiff_t>(T.size()) - 2));
      const double w = (t - T[k]) / (T[k + 1] - T[k]);
      return Vec((1.0 - w) * (*knots_x)[k] + w * (*knots_x)[k + 1]);
    };
  }
  p.space_dim = static_cast<int>(p.eval_fn(p.domain.lo).size());
  return p;
}

// Assembles consecutive pieces into one path. Pieces must chain: each ends
// where the next begins, both in parameter and in space.
inline PathSpec piecewise_path(std::vector<PathSpec> pieces, std::string id = "") {
  if (pieces.empty()) throw composition_error("piecewise path: no pieces");
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    if (std::abs(pieces[i].domain.hi - pieces[i + 1].domain.lo) > kParamTol)
      throw composition_error("piecewise path: parameter gap between pieces");
    const Vec a = pieces[i].eval(pieces[i].domain.hi);
    const Vec b = pieces[i + 1].eval(pieces[i + 1].domain.lo);
    if ((a - b).norm() > kPathEqTol * std::max(1.0, a.norm()))
      throw composition_error("piecewise path: pieces disagree at a breakpoint");
  }
  PathSpec p;
  p.domain = Interval{pieces.front().domain.lo, pieces.back().domain.hi};
  p.kind = PathKind::piecewise;
  p.id = std::move(id);
  p.space_dim = pieces.front().space_dim;
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) p.breakpoints.push_back(pieces[i].domain.hi);
  for (const PathSpec& q : pieces)
    p.breakpoints.insert(p.breakpoints.end(), q.breakpoints.begin(), q.breakpoints.end());
  std::sort(p.breakpoints.begin(), p.breakpoints.end());
  p.breakpoints.erase(std::unique(p.breakpoints.begin(), p.breakpoints.end()),
                      p.breakpoints.end());

  auto shared = std::make_shared<const std::vector<PathSpec>>(std::move(pieces));
  p.eval_fn = [shared](double t) {
    const PathSpec& q = (*shared)[detail::piece_index(*shared, t)];
    return q.eval_fn(q.domain.clamp(t));
  };
  const bool all_c1 =
      std::all_of(shared->begin(), shared->end(), [](const PathSpec& q) { return q.is_c1(); });
  if (all_c1)
    p.deriv_fn = [shared](double t) {
      const PathSpec& q = (*shared)[detail::piece_index(*shared, t)];
      return q.deriv_fn(q.domain.clamp(t));
    };
  p.pieces = *shared;
  return p;
}

inline PathSpec restrict_path(const PathSpec& p, Interval sub) {
  if (!p.domain.contains(sub)) throw domain_error("restrict: interval not contained in domain");
  sub = Interval{p.domain.clamp(sub.lo), p.domain.clamp(sub.hi)};
  if (p.kind == PathKind::piecewise && !p.pieces.empty() && !sub.is_point()) {
    std::vector<PathSpec> kept;
    for (const PathSpec& q : p.pieces) {
      const double a = std::max(q.domain.lo, sub.lo);
      const double b = std::min(q.domain.hi, sub.hi);
      if (b - a > kParamTol) kept.push_back(restrict_path(q, Interval{a, b}));
    }
    if (kept.size() == 1) return kept.front();
    PathSpec r = piecewise_path(std::move(kept), p.id);
    return r;
  }
  PathSpec r = p;
  r.domain = sub;
  r.pieces.clear();
  std::vector<double> kept_breaks;
  for (double b : r.breakpoints)
    if (b > sub.lo + kParamTol && b < sub.hi - kParamTol) kept_breaks.push_back(b);
  r.breakpoints = std::move(kept_breaks);
  return r;
}

inline PathSpec reparametrize(const PathSpec& p, const Reparam& chi) {
  if (!nearly_equal(chi.target, p.domain))
    throw domain_error("reparametrize: reparam target does not match path domain");
  PathSpec r;
  r.domain = chi.source;
  r.kind = p.kind;
  r.id = p.id;
  r.space_dim = p.space_dim;
  r.eval_fn = [pe = p.eval_fn, chi, tgt = p.domain](double t) {
    return pe(tgt.clamp(chi.map(chi.source.clamp(t))));
  };
  if (p.is_c1())
    r.deriv_fn = [pd = p.deriv_fn, chi, tgt = p.domain](double t) {
      const double tc = chi.source.clamp(t);
      return Vec(pd(tgt.clamp(chi.map(tc))) * chi.deriv(tc));
    };

  if (p.kind == PathKind::piecewise && !p.pieces.empty() && !chi.source.is_point()) {
    std::vector<PathSpec> new_pieces;
    for (std::size_t i = 0; i < p.pieces.size(); ++i) {
      const PathSpec& child =
          chi.orientation_preserving ? p.pieces[i] : p.pieces[p.pieces.size() - 1 - i];
      double a = chi.inverse_map(child.domain.lo);
      double b = chi.inverse_map(child.domain.hi);
      if (a > b) std::swap(a, b);
      Reparam sub = chi;
      sub.source = Interval{chi.source.clamp(a), chi.source.clamp(b)};
      sub.target = child.domain;
      new_pieces.push_back(reparametrize(child, sub));
    }
    r.pieces = std::move(new_pieces);
    r.breakpoints.clear();
    for (std::size_t i = 0; i + 1 < r.pieces.size(); ++i)
      r.breakpoints.push_back(r.pieces[i].domain.hi);
    for (const PathSpec& q : r.pieces)
      r.breakpoints.insert(r.breakpoints.end(), q.breakpoints.begin(), q.breakpoints.end());
    std::sort(r.breakpoints.begin(), r.breakpoints.end());
    r.breakpoints.erase(std::unique(r.breakpoints.begin(), r.breakpoints.end()),
                        r.breakpoints.end());
  } else {
    r.breakpoints.clear();
    for (double b : p.breakpoints) r.breakpoints.push_back(chi.inverse_map(b));
    std::sort(r.breakpoints.begin(), r.breakpoints.end());
  }
  return r;
}

// gamma_-(t) = gamma(1 - t) on [0,1].
inline PathSpec canonical_inverse(const PathSpec& p) {
  if (!nearly_equal(p.domain, Interval::unit()))
    throw domain_error("canonical inverse: path domain must be [0,1]");
  Reparam flip;
  flip.source = flip.target = Interval::unit();
  flip.map = flip.inverse_map = [](double t) { return 1.0 - t; };
  flip.map_deriv = [](double) { return -1.0; };
  flip.orientation_preserving = false;
  PathSpec r = reparametrize(p, flip);
  r.id = p.id.empty() ? "" : p.id + "-";
  return r;
}

// (p1 p2)(t) = p1(2t) on [0,1/2], p2(2t-1) on [1/2,1].
inline PathSpec canonical_product(const PathSpec& p1, const PathSpec& p2) {
  if (!nearly_equal(p1.domain, Interval::unit()) || !nearly_equal(p2.domain, Interval::unit()))
    throw domain_error("canonical product: both domains must be [0,1]");
  const Vec end = p1.eval(1.0), start = p2.eval(0.0);
  if ((end - start).norm() > kPathEqTol * std::max(1.0, end.norm()))
    throw composition_error("canonical product: p1(1) != p2(0)");
  PathSpec left = reparametrize(p1, Reparam::affine(Interval{0.0, 0.5}, Interval::unit()));
  PathSpec right = reparametrize(p2, Reparam::affine(Interval{0.5, 1.0}, Interval::unit()));
  std::string id;
  if (!p1.id.empty() || !p2.id.empty()) id = p1.id + "*" + p2.id;
  return piecewise_path({std::move(left), std::move(right)}, std::move(id));
}

// Affine change of parameter onto [0,1].
inline PathSpec to_unit_domain(const PathSpec& p) {
  if (nearly_equal(p.domain, Interval::unit())) return p;
  return reparametrize(p, Reparam::affine(Interval::unit(), p.domain));
}

// Deepest piece whose domain contains t; closures of the result are smooth
// up to and including its endpoints.
inline const PathSpec& leaf_piece(const PathSpec& p, double t) {
  const PathSpec* q = &p;
  while (!q->pieces.empty()) q = &q->pieces[detail::piece_index(q->pieces, t)];
  return *q;
}

// Monotone parameter chain from s to t, split at interior breakpoints.
inline std::vector<double> smooth_segments(const PathSpec& p, double s, double t) {
  std::vector<double> knots{s};
  if (s <= t) {
    for (double b : p.breakpoints)
      if (b > s + kParamTol && b < t - kParamTol) knots.push_back(b);
  } else {
    for (auto it = p.breakpoints.rbegin(); it != p.breakpoints.rend(); ++it)
      if (*it < s - kParamTol && *it > t + kParamTol) knots.push_back(*it);
  }
  knots.push_back(t);
  return knots;
}

// Largest pointwise evaluation gap over a uniform sample grid.
inline double max_pointwise_gap(const PathSpec& a, const PathSpec& b, int samples = 101) {
  if (!nearly_equal(a.domain, b.domain, 1e-6))
    throw domain_error("pointwise gap: domains differ");
  double worst = 0.0;
  for (double t : a.domain.grid(samples))
    worst = std::max(worst, (a.eval(t) - b.eval(b.domain.clamp(t))).norm());
  return worst;
}

}  // namespace translift
