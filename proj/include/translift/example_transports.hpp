#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <utility>

#include "translift/bundle.hpp"
#include "translift/transport.hpp"

namespace translift {

// How a group-valued path functional f(gamma, s) depends on its arguments.
// The dependency decides whether the induced transport is parallel:
// pointwise functionals pass the restriction and reparametrization
// conditions, parametric and whole-path ones do not.
enum class Dependency { pointwise, parametric, global_path };

inline std::string to_string(Dependency d) {
  switch (d) {
    case Dependency::pointwise: return "pointwise";
    case Dependency::parametric: return "parametric";
    case Dependency::global_path: return "global";
  }
  return "?";
}

namespace detail {

// Arc length of gamma from its left endpoint to s, split at breakpoints so
// that each Simpson panel sees a smooth integrand.
inline double arc_length_to(const PathSpec& gamma, double s) {
  if (!gamma.is_c1()) throw domain_error("arc length: path is not C1");
  double total = 0.0;
  const auto knots = smooth_segments(gamma, gamma.domain.lo, s);
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k], b = knots[k + 1];
    const PathSpec& leaf = leaf_piece(gamma, 0.5 * (a + b));
    const int panels = 128;
    const double h = (b - a) / panels;
    double acc = 0.0;
    for (int i = 0; i <= panels; ++i) {
      const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * leaf.deriv_fn(a + i * h).norm();
    }
    total += acc * h / 3.0;
  }
  return total;
}

}  // namespace detail

struct PathFunctional {
  GroupModel group;
  Dependency tag = Dependency::pointwise;
  std::function<Mat(const PathSpec&, double)> eval;
  std::string name;

  Mat operator()(const PathSpec& gamma, double s) const { return eval(gamma, s); }

  static PathFunctional constant(GroupModel g, Mat value, std::string name = "constant") {
    if (g.constraint_residual(value) > 1e-8)
      throw model_error("path functional: constant outside the group");
    return {g, Dependency::pointwise,
            [value = std::move(value)](const PathSpec&, double) { return value; },
            std::move(name)};
  }

  // f(gamma, s) = h(gamma(s)).
  static PathFunctional field(GroupModel g, std::function<Mat(const Vec&)> h,
                              std::string name = "field") {
    return {g, Dependency::pointwise,
            [h = std::move(h)](const PathSpec& gamma, double s) { return h(gamma.eval(s)); },
            std::move(name)};
  }

  // Rotation field with angle rate * x[0]; the standard pointwise example.
  static PathFunctional coordinate_rotation_field(GroupModel g, double rate) {
    return field(
        g, [g, rate](const Vec& x) { return g.rotation(rate * x[0]); },
        "rotation-field(" + std::to_string(rate) + ")");
  }

  // f(gamma, s) = R(rate * s): depends on the raw parameter, so the induced
  // transport changes under reparametrization.
  static PathFunctional parametric_rotation(GroupModel g, double rate) {
    return {g, Dependency::parametric,
            [g, rate](const PathSpec&, double s) { return g.rotation(rate * s); },
            "parametric(" + std::to_string(rate) + ")"};
  }

  // f(gamma, s) = R(rate * arclength(gamma|[lo, s])): depends on the path as
  // a whole, invariant under orientation-preserving reparametrization.
  static PathFunctional arclength_rotation(GroupModel g, double rate) {
    return {g, Dependency::global_path,
            [g, rate](const PathSpec& gamma, double s) {
              return g.rotation(rate * detail::arc_length_to(gamma, s));
            },
            "arclength(" + std::to_string(rate) + ")"};
  }

  // f(gamma, s) = R(rate * s * |domain|): the span of the whole domain enters,
  // so the induced transport changes under restriction.
  static PathFunctional domain_span_rotation(GroupModel g, double rate) {
    return {g, Dependency::global_path,
            [g, rate](const PathSpec& gamma, double s) {
              return g.rotation(rate * s * gamma.domain.length());
            },
            "domain-span(" + std::to_string(rate) + ")"};
  }
};

// Transport on the trivial bundle B x G acting by left multiplication with
// f(gamma,t)^{-1} f(gamma,s). The groupoid laws hold for every f; the
// parallel conditions depend on f's dependency tag.
inline TransportFamily group_transport_left(PathFunctional f, int base_dim) {
  TransportFamily T;
  T.bundle = BundleModel::group_bundle(base_dim, f.group);
  T.tag = BackendTag::group_left;
  T.law_abiding = true;
  T.at = [f = std::move(f), bundle = T.bundle](const PathSpec& gamma, double s, double t) {
    const FibreDescriptor src = bundle.fiber_at(gamma.eval(s));
    const FibreDescriptor dst = bundle.fiber_at(gamma.eval(t));
    const GroupModel g = *bundle.group;
    const Mat factor = g.multiply(g.invert(f(gamma, t)), f(gamma, s));
    const Mat factor_inv = g.invert(factor);
    return FiberMap{src, dst,
                    [factor, dst, g](const FiberElement& u) {
                      return dst.group_element(g.multiply(factor, u.mat()));
                    },
                    [factor_inv, src, g](const FiberElement& u) {
                      return src.group_element(g.multiply(factor_inv, u.mat()));
                    }};
  };
  return T;
}

// Right-multiplication variant: u = (gamma(s), g) goes to
// (gamma(t), g · f(gamma,s) · f(gamma,t)^{-1}).
inline TransportFamily group_transport_right(PathFunctional f, int base_dim) {
  TransportFamily T;
  T.bundle = BundleModel::group_bundle(base_dim, f.group);
  T.tag = BackendTag::group_right;
  T.law_abiding = true;
  T.at = [f = std::move(f), bundle = T.bundle](const PathSpec& gamma, double s, double t) {
    const FibreDescriptor src = bundle.fiber_at(gamma.eval(s));
    const FibreDescriptor dst = bundle.fiber_at(gamma.eval(t));
    const GroupModel g = *bundle.group;
    const Mat factor = g.multiply(f(gamma, s), g.invert(f(gamma, t)));
    const Mat factor_inv = g.invert(factor);
    return FiberMap{src, dst,
                    [factor, dst, g](const FiberElement& u) {
                      return dst.group_element(g.multiply(u.mat(), factor));
                    },
                    [factor_inv, src, g](const FiberElement& u) {
                      return src.group_element(g.multiply(u.mat(), factor_inv));
                    }};
  };
  return T;
}

// Transport defined by a foliation: an element moves along its leaf to the
// unique leaf point over gamma(t). Depends only on the endpoints, hence
// passes the full parallel suite.
inline TransportFamily foliation_transport(FoliationModel fol) {
  auto shared = std::make_shared<const FoliationModel>(std::move(fol));
  TransportFamily T;
  T.bundle = shared->bundle;
  T.tag = BackendTag::foliation;
  T.law_abiding = true;
  T.at = [shared](const PathSpec& gamma, double s, double t) {
    const FibreDescriptor src = shared->bundle.fiber_at(gamma.eval(s));
    const FibreDescriptor dst = shared->bundle.fiber_at(gamma.eval(t));
    auto follow = [shared](const FibreDescriptor& to) {
      return [shared, to](const FiberElement& u) {
        return shared->leaf_point(shared->classify(u), to.base);
      };
    };
    return FiberMap{src, dst, follow(dst), follow(src)};
  };
  return T;
}

}  // namespace translift
