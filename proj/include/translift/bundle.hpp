#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "translift/common.hpp"
#include "translift/group.hpp"

namespace translift {

enum class FiberKind { vector, group, label };

inline std::string to_string(FiberKind k) {
  switch (k) {
    case FiberKind::vector: return "vector";
    case FiberKind::group: return "group";
    case FiberKind::label: return "label";
  }
  return "?";
}

// A point of one fibre: its base point plus a payload whose shape depends on
// the bundle model (vector coordinates, a group element, or a discrete leaf
// label for finite-fibre models).
struct FiberElement {
  Vec base;
  std::variant<Vec, Mat, int> payload;

  FiberKind kind() const {
    if (std::holds_alternative<Vec>(payload)) return FiberKind::vector;
    if (std::holds_alternative<Mat>(payload)) return FiberKind::group;
    return FiberKind::label;
  }
  const Vec& vec() const {
    if (!std::holds_alternative<Vec>(payload)) throw model_error("fibre element: not a vector payload");
    return std::get<Vec>(payload);
  }
  const Mat& mat() const {
    if (!std::holds_alternative<Mat>(payload)) throw model_error("fibre element: not a group payload");
    return std::get<Mat>(payload);
  }
  int label() const {
    if (!std::holds_alternative<int>(payload)) throw model_error("fibre element: not a label payload");
    return std::get<int>(payload);
  }
};

// Description of the fibre over one base point: enough to validate, build
// and (for finite fibres) enumerate its elements.
struct FibreDescriptor {
  Vec base;
  FiberKind kind = FiberKind::vector;
  int dim = 1;  // vector size | matrix size | label count
  std::optional<GroupModel> group;

  FiberElement vector_element(Vec coords) const {
    if (kind != FiberKind::vector || coords.size() != dim)
      throw model_error("fibre: vector payload shape mismatch");
    return {base, std::move(coords)};
  }
  FiberElement group_element(Mat g) const {
    if (kind != FiberKind::group || !group || g.rows() != dim || g.cols() != dim)
      throw model_error("fibre: group payload shape mismatch");
    if (group->constraint_residual(g) > 1e-8)
      throw model_error("fibre: payload violates the group constraints");
    return {base, std::move(g)};
  }
  FiberElement label_element(int a) const {
    if (kind != FiberKind::label || a < 0 || a >= dim)
      throw model_error("fibre: label outside the label space");
    return {base, a};
  }

  bool contains(const FiberElement& u, double base_tol = kFibreMatchTol) const {
    if (u.kind() != kind) return false;
    if ((u.base - base).norm() > base_tol) return false;
    switch (kind) {
      case FiberKind::vector: return u.vec().size() == dim;
      case FiberKind::group: return u.mat().rows() == dim && u.mat().cols() == dim;
      case FiberKind::label: return u.label() >= 0 && u.label() < dim;
    }
    return false;
  }

  // All elements of a finite fibre.
  std::vector<FiberElement> all_elements() const {
    if (kind != FiberKind::label) throw model_error("fibre: only label fibres are finite");
    std::vector<FiberElement> out;
    out.reserve(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) out.push_back(label_element(a));
    return out;
  }

  // Deterministic fibre sampling: every element for finite fibres, `count`
  // seeded draws otherwise.
  std::vector<FiberElement> sample(int count, std::mt19937& rng) const {
    if (kind == FiberKind::label) return all_elements();
    std::vector<FiberElement> out;
    out.reserve(static_cast<std::size_t>(count));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
      if (kind == FiberKind::vector) {
        Vec v(dim);
        for (int j = 0; j < dim; ++j) v[j] = gauss(rng);
        out.push_back(vector_element(std::move(v)));
      } else {
        out.push_back(group_element(group->random_element(rng)));
      }
    }
    return out;
  }
};

// A trivializable bundle over a single chart of the base.
struct BundleModel {
  int base_dim = 1;
  FiberKind fiber_kind = FiberKind::vector;
  int fiber_dim = 1;
  std::optional<GroupModel> group;
  std::function<bool(const Vec&)> chart;  // empty: the whole of R^n
  std::string name;

  bool in_chart(const Vec& x) const {
    return x.size() == base_dim && (!chart || chart(x));
  }

  FibreDescriptor fiber_at(const Vec& x) const {
    if (x.size() != base_dim) throw domain_error("bundle '" + name + "': base point dimension mismatch");
    if (!in_chart(x)) throw chart_error("bundle '" + name + "': base point outside chart");
    return FibreDescriptor{x, fiber_kind, fiber_dim, group};
  }

  Vec project(const FiberElement& u) const { return u.base; }

  // Fibre-appropriate distance between payloads: Euclidean for vectors, the
  // group metric for group elements, discrete 0/1 for labels.
  double fibre_distance(const FiberElement& a, const FiberElement& b) const {
    if (a.kind() != b.kind()) throw model_error("fibre distance: payload kinds differ");
    switch (a.kind()) {
      case FiberKind::vector: return (a.vec() - b.vec()).norm();
      case FiberKind::group: return group ? group->distance(a.mat(), b.mat())
                                          : (a.mat() - b.mat()).norm();
      case FiberKind::label: return a.label() == b.label() ? 0.0 : 1.0;
    }
    return 0.0;
  }

  std::vector<FiberElement> sample_fibre(const Vec& x, int count, std::mt19937& rng) const {
    return fiber_at(x).sample(count, rng);
  }

  bool finite_fibres() const { return fiber_kind == FiberKind::label; }

  static BundleModel vector_bundle(int base_dim, int k) {
    BundleModel b;
    b.base_dim = base_dim;
    b.fiber_kind = FiberKind::vector;
    b.fiber_dim = k;
    b.name = "R" + std::to_string(base_dim) + "xR" + std::to_string(k);
    return b;
  }

  static BundleModel group_bundle(int base_dim, GroupModel g) {
    BundleModel b;
    b.base_dim = base_dim;
    b.fiber_kind = FiberKind::group;
    b.fiber_dim = g.n;
    b.group = g;
    b.name = "R" + std::to_string(base_dim) + "x" + to_string(g.id);
    return b;
  }

  static BundleModel label_bundle(int base_dim, int labels) {
    if (labels < 1) throw model_error("label bundle: need at least one label");
    BundleModel b;
    b.base_dim = base_dim;
    b.fiber_kind = FiberKind::label;
    b.fiber_dim = labels;
    b.name = "R" + std::to_string(base_dim) + "x{" + std::to_string(labels) + "}";
    return b;
  }

  // Tangent bundle of the unit sphere in the colatitude/longitude chart;
  // the chart excludes the poles.
  static BundleModel sphere_tangent() {
    BundleModel b = vector_bundle(2, 2);
    b.chart = [](const Vec& x) { return x[0] > 0.0 && x[0] < M_PI; };
    b.name = "TS2";
    return b;
  }
};

// Foliation of a product bundle: disjoint leaves, each intersecting every
// fibre exactly once, classified by a vector label.
struct FoliationModel {
  BundleModel bundle;
  std::function<Vec(const FiberElement&)> classify_fn;
  std::function<FiberElement(const Vec&, const Vec&)> leaf_point_fn;  // (label, x) -> element
  std::string name;

  Vec classify(const FiberElement& u) const {
    Vec label = classify_fn(u);
    if (label.size() != bundle.fiber_dim) throw model_error("foliation: classification failed");
    return label;
  }
  FiberElement leaf_point(const Vec& label, const Vec& x) const {
    if (!bundle.in_chart(x)) throw chart_error("foliation: base point outside chart");
    return leaf_point_fn(label, x);
  }

  // Leaves K_c = {(x, sigma(x) + c)} for a fixed section sigma. These satisfy
  // the disjoint-cover and one-point-per-fibre requirements by construction.
  static FoliationModel section_offsets(int base_dim, int k, std::function<Vec(const Vec&)> sigma,
                                        std::string name = "section-offsets") {
    FoliationModel f;
    f.bundle = BundleModel::vector_bundle(base_dim, k);
    f.name = std::move(name);
    f.classify_fn = [sigma](const FiberElement& u) { return Vec(u.vec() - sigma(u.base)); };
    f.leaf_point_fn = [sigma, b = f.bundle](const Vec& label, const Vec& x) {
      return b.fiber_at(x).vector_element(sigma(x) + label);
    };
    return f;
  }

  // Arbitrary classify/leaf_point pair; the round-trip laws are checked on
  // the given samples and violations are rejected here.
  static FoliationModel custom(BundleModel bundle, std::function<Vec(const FiberElement&)> classify,
                               std::function<FiberElement(const Vec&, const Vec&)> leaf_point,
                               const std::vector<Vec>& base_samples,
                               const std::vector<Vec>& label_samples, double tol = 1e-9,
                               std::string name = "custom") {
    FoliationModel f;
    f.bundle = std::move(bundle);
    f.classify_fn = std::move(classify);
    f.leaf_point_fn = std::move(leaf_point);
    f.name = std::move(name);
    for (const Vec& x : base_samples)
      for (const Vec& c : label_samples) {
        const FiberElement u = f.leaf_point(c, x);
        if ((f.classify(u) - c).norm() > tol)
          throw model_error("foliation: classify(leaf_point) mismatch");
        const FiberElement v = f.leaf_point(f.classify(u), x);
        if (f.bundle.fibre_distance(u, v) > tol)
          throw model_error("foliation: leaf does not meet the fibre in a single point");
      }
    return f;
  }
};

// Parametric surface chart with metric and Levi-Civita symbols.
// christoffel(x)[i] is the matrix (j,k) -> Gamma^i_{jk}.
struct SurfaceModel {
  std::function<Vec(const Vec&)> embed;
  std::function<Mat(const Vec&)> metric;
  std::function<std::array<Mat, 2>(const Vec&)> christoffel;
  std::function<bool(const Vec&)> chart;
  std::string name;

  static SurfaceModel sphere();
};

// Levi-Civita symbols of the round metric diag(1, sin^2 theta).
inline std::array<Mat, 2> sphere_christoffel(double theta, double /*phi*/) {
  if (!(theta > 0.0 && theta < M_PI))
    throw chart_error("sphere chart: colatitude at a pole");
  const double s = std::sin(theta), c = std::cos(theta);
  Mat g_theta = Mat::Zero(2, 2), g_phi = Mat::Zero(2, 2);
  g_theta(1, 1) = -s * c;       // Gamma^theta_{phi phi}
  const double cot = c / s;
  g_phi(0, 1) = cot;            // Gamma^phi_{theta phi}
  g_phi(1, 0) = cot;            // Gamma^phi_{phi theta}
  return {g_theta, g_phi};
}

inline SurfaceModel SurfaceModel::sphere() {
  SurfaceModel m;
  m.name = "S2";
  m.chart = [](const Vec& x) { return x[0] > 0.0 && x[0] < M_PI; };
  m.embed = [](const Vec& x) {
    const double th = x[0], ph = x[1];
    return make_vec({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
  };
  m.metric = [](const Vec& x) {
    Mat g = Mat::Zero(2, 2);
    g(0, 0) = 1.0;
    g(1, 1) = std::sin(x[0]) * std::sin(x[0]);
    return g;
  };
  m.christoffel = [](const Vec& x) { return sphere_christoffel(x[0], x[1]); };
  return m;
}

inline double metric_norm(const SurfaceModel& m, const Vec& x, const Vec& v) {
  return std::sqrt(v.dot(m.metric(x) * v));
}

}  // namespace translift
