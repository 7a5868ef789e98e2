#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "translift/bundle.hpp"
#include "translift/parallel.hpp"
#include "translift/transport.hpp"

namespace translift {

// Linear connection on a chart, given by its coefficient matrices: for each
// base direction j a fiber_dim x fiber_dim matrix G_j(x) with entries
// (i,k) -> Gamma^i_{jk}. The lift equation is vdot = -sum_j gammadot^j G_j v.
struct ChristoffelChart {
  int base_dim = 2;
  int fiber_dim = 2;
  std::function<std::vector<Mat>(const Vec&)> coeffs;
  std::function<bool(const Vec&)> chart;
  std::optional<SurfaceModel> surface;
  std::string name;
};

// Lie-algebra valued connection one-form on a trivial principal bundle:
// form(x, v) is linear in the tangent argument v. The lift equation is
// gdot = -form(gamma, gammadot) g.
struct PrincipalForm {
  GroupModel group;
  int base_dim = 2;
  std::function<Mat(const Vec&, const Vec&)> form;
  std::string name;
};

struct ConnectionModel {
  std::variant<ChristoffelChart, PrincipalForm> model;

  const ChristoffelChart* christoffel() const { return std::get_if<ChristoffelChart>(&model); }
  const PrincipalForm* principal() const { return std::get_if<PrincipalForm>(&model); }

  BundleModel bundle() const {
    if (const auto* c = christoffel()) {
      BundleModel b = BundleModel::vector_bundle(c->base_dim, c->fiber_dim);
      b.chart = c->chart;
      b.name = c->name.empty() ? b.name : c->name;
      return b;
    }
    const auto& p = std::get<PrincipalForm>(model);
    BundleModel b = BundleModel::group_bundle(p.base_dim, p.group);
    b.name = p.name.empty() ? b.name : p.name;
    return b;
  }

  static ConnectionModel flat(int base_dim, int k) {
    ChristoffelChart c;
    c.base_dim = base_dim;
    c.fiber_dim = k;
    c.name = "flat";
    c.coeffs = [base_dim, k](const Vec&) {
      return std::vector<Mat>(static_cast<std::size_t>(base_dim), Mat::Zero(k, k));
    };
    return {c};
  }

  // Levi-Civita connection of the round unit sphere in the (theta, phi)
  // chart, acting on tangent components.
  static ConnectionModel levi_civita_sphere() {
    ChristoffelChart c;
    c.base_dim = 2;
    c.fiber_dim = 2;
    c.name = "sphere-levi-civita";
    c.surface = SurfaceModel::sphere();
    c.chart = c.surface->chart;
    c.coeffs = [](const Vec& x) {
      const auto gamma = sphere_christoffel(x[0], x[1]);
      // Reindex Gamma^i_{jk} into per-direction matrices (G_j)_{ik}.
      std::vector<Mat> g(2, Mat::Zero(2, 2));
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          for (int k = 0; k < 2; ++k) g[static_cast<std::size_t>(j)](i, k) = gamma[static_cast<std::size_t>(i)](j, k);
      return g;
    };
    return {c};
  }

  static ConnectionModel principal_form(GroupModel g, int base_dim,
                                        std::function<Mat(const Vec&, const Vec&)> form,
                                        std::string name = "principal") {
    PrincipalForm p;
    p.group = g;
    p.base_dim = base_dim;
    p.form = std::move(form);
    p.name = std::move(name);
    return {p};
  }

  // A = omega dx^0 on R^2, valued in the u(1) generator.
  static ConnectionModel u1_uniform(double omega) {
    Mat j(2, 2);
    j << 0.0, -1.0, 1.0, 0.0;
    return principal_form(
        GroupModel::u1(), 2,
        [omega, j](const Vec&, const Vec& v) { return Mat(omega * v[0] * j); },
        "u1-uniform(" + std::to_string(omega) + ")");
  }

  // A = c (x dy - y dx) on R^2; around a closed loop the holonomy phase is
  // -2c times the enclosed area.
  static ConnectionModel u1_area_law(double c = 0.5) {
    Mat j(2, 2);
    j << 0.0, -1.0, 1.0, 0.0;
    return principal_form(
        GroupModel::u1(), 2,
        [c, j](const Vec& x, const Vec& v) { return Mat(c * (x[0] * v[1] - x[1] * v[0]) * j); },
        "u1-area-law(" + std::to_string(c) + ")");
  }
};

struct OdeOptions {
  double step = 0.0;  // 0: path domain length / 1000
  int lift_samples = 1001;

  double resolve_step(const Interval& domain) const {
    if (step > 0.0) return step;
    const double span = domain.length();
    return span > 0.0 ? span / 1000.0 : 1.0;
  }
};

namespace detail {

// One RK4 sweep of the matrix equation M' = L(t) M across [a, b] (either
// direction), with an optional per-step postprocessing hook.
inline Mat rk4_linear(const std::function<Mat(double)>& rhs, Mat m, double a, double b,
                      double step, const std::function<Mat(const Mat&)>& post = {}) {
  if (a == b) return m;
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(b - a) / step - 1e-12)));
  const double h = (b - a) / n;
  double t = a;
  for (int i = 0; i < n; ++i) {
    const Mat k1 = rhs(t) * m;
    const Mat k2 = rhs(t + 0.5 * h) * (m + 0.5 * h * k1);
    const Mat k3 = rhs(t + 0.5 * h) * (m + 0.5 * h * k2);
    const Mat k4 = rhs(t + h) * (m + h * k3);
    m += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (post) m = post(m);
    t = a + (i + 1) * h;
  }
  return m;
}

// Fundamental solution of the lift equation from s to t, integrating each
// smooth segment of the path with the segment's own closures so that stage
// evaluations at breakpoints stay one-sided.
inline Mat fundamental_solution(const ConnectionModel& conn, const PathSpec& gamma, double s,
                                double t, double step) {
  if (!gamma.is_c1()) throw domain_error("horizontal lift: path must be C1");
  const int dim = conn.christoffel() ? conn.christoffel()->fiber_dim : conn.principal()->group.n;
  Mat m = Mat::Identity(dim, dim);
  if (s == t) return m;

  auto guard = [&conn](const Vec& x) {
    const bool ok = conn.christoffel()
                        ? (!conn.christoffel()->chart || conn.christoffel()->chart(x))
                        : true;
    if (!ok) throw chart_error("horizontal lift: path exits the chart");
  };

  std::function<Mat(const Mat&)> post;
  if (conn.principal() && conn.principal()->group.rotation_like())
    post = [g = conn.principal()->group](const Mat& u) { return g.stabilize(u); };

  const auto knots = smooth_segments(gamma, s, t);
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k], b = knots[k + 1];
    const PathSpec& leaf = leaf_piece(gamma, 0.5 * (a + b));
    std::function<Mat(double)> rhs;
    if (const auto* c = conn.christoffel()) {
      rhs = [c, &leaf, &guard](double u) {
        const Vec x = leaf.eval_fn(leaf.domain.clamp(u));
        guard(x);
        const Vec v = leaf.deriv_fn(leaf.domain.clamp(u));
        const auto g = c->coeffs(x);
        Mat l = Mat::Zero(c->fiber_dim, c->fiber_dim);
        for (int j = 0; j < c->base_dim; ++j) l -= v[j] * g[static_cast<std::size_t>(j)];
        return l;
      };
    } else {
      const auto* p = conn.principal();
      rhs = [p, &leaf](double u) {
        const double uc = leaf.domain.clamp(u);
        return Mat(-p->form(leaf.eval_fn(uc), leaf.deriv_fn(uc)));
      };
    }
    m = rk4_linear(rhs, std::move(m), a, b, step, post);
  }
  return m;
}

// Deferred, thread-safe single computation of a matrix.
class LazyMat {
 public:
  explicit LazyMat(std::function<Mat()> f) : f_(std::move(f)) {}
  const Mat& get() const {
    std::call_once(flag_, [this] { value_ = f_(); });
    return value_;
  }

 private:
  std::function<Mat()> f_;
  mutable std::once_flag flag_;
  mutable Mat value_;
};

}  // namespace detail

// Parallel transport generated by a connection: the fibre map from s to t is
// the fundamental solution of the horizontal-lift equation. Fixed-step RK4;
// the default step is (path domain length)/1000, so residuals are
// deterministic and reproducible.
inline TransportFamily transport_from_connection(const ConnectionModel& conn, OdeOptions ode = {}) {
  TransportFamily T;
  T.bundle = conn.bundle();
  T.tag = BackendTag::connection;
  T.law_abiding = true;
  T.at = [conn, ode, bundle = T.bundle](const PathSpec& gamma, double s, double t) {
    const FibreDescriptor src = bundle.fiber_at(gamma.eval(s));
    const FibreDescriptor dst = bundle.fiber_at(gamma.eval(t));
    if (s == t) return FiberMap::identity(src);
    const double step = ode.resolve_step(gamma.domain);
    const Mat fwd = detail::fundamental_solution(conn, gamma, s, t, step);
    auto bwd = std::make_shared<detail::LazyMat>(
        [conn, gamma, s, t, step] { return detail::fundamental_solution(conn, gamma, t, s, step); });
    if (bundle.fiber_kind == FiberKind::vector)
      return FiberMap{src, dst,
                      [fwd, dst](const FiberElement& u) { return dst.vector_element(fwd * u.vec()); },
                      [bwd, src](const FiberElement& u) {
                        return src.vector_element(bwd->get() * u.vec());
                      }};
    const GroupModel g = *bundle.group;
    return FiberMap{src, dst,
                    [fwd, dst, g](const FiberElement& u) {
                      return dst.group_element(g.stabilize(fwd * u.mat()));
                    },
                    [bwd, src, g](const FiberElement& u) {
                      return src.group_element(g.stabilize(bwd->get() * u.mat()));
                    }};
  };
  return T;
}

// A lift of a base path into the bundle, sampled on a parameter grid that
// contains the anchor exactly. Tangent estimates are divided differences of
// the total-space coordinates.
struct LiftedPath {
  PathSpec base;
  double anchor = 0.0;
  FiberElement start;
  std::vector<double> params;
  std::vector<FiberElement> samples;
  std::vector<Vec> tangents;

  std::size_t index_of(double t) const {
    for (std::size_t i = 0; i < params.size(); ++i)
      if (std::abs(params[i] - t) <= kParamTol) return i;
    throw domain_error("lifted path: parameter not sampled");
  }
  const FiberElement& sample_at(double t) const { return samples[index_of(t)]; }
};

// Chart coordinates of the total space: base coordinates followed by the
// payload coordinates (vector entries, or the flattened group matrix).
inline Vec total_coords(const FiberElement& u) {
  switch (u.kind()) {
    case FiberKind::vector: {
      Vec out(u.base.size() + u.vec().size());
      out << u.base, u.vec();
      return out;
    }
    case FiberKind::group: {
      const Mat& m = u.mat();
      Vec flat(m.size());
      for (Eigen::Index c = 0, k = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r) flat[k++] = m(r, c);
      Vec out(u.base.size() + flat.size());
      out << u.base, flat;
      return out;
    }
    case FiberKind::label: throw model_error("total coordinates: label fibres have no chart");
  }
  throw model_error("total coordinates: unknown payload");
}

inline int total_dim(const BundleModel& b) {
  switch (b.fiber_kind) {
    case FiberKind::vector: return b.base_dim + b.fiber_dim;
    case FiberKind::group: return b.base_dim + b.fiber_dim * b.fiber_dim;
    case FiberKind::label: throw model_error("total dimension: label fibres have no chart");
  }
  return 0;
}

namespace detail {

inline std::vector<double> anchored_grid(const Interval& domain, double s0, int count) {
  std::vector<double> g = domain.grid(count);
  bool have = false;
  for (double t : g)
    if (std::abs(t - s0) <= kParamTol) { have = true; break; }
  if (!have) g.push_back(s0);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

inline std::vector<Vec> divided_tangents(const std::vector<double>& ts,
                                         const std::vector<FiberElement>& us) {
  std::vector<Vec> out;
  if (ts.size() < 2) return out;
  out.resize(ts.size());
  std::vector<Vec> coords;
  coords.reserve(us.size());
  for (const FiberElement& u : us) coords.push_back(total_coords(u));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == ts.size() ? i : i + 1;
    out[i] = (coords[hi] - coords[lo]) / (ts[hi] - ts[lo]);
  }
  return out;
}

}  // namespace detail

// Horizontal lift through (s0, p), integrated outward in both directions.
// The projection identity pi(lift(t)) = gamma(t) holds exactly because
// samples are assembled over the evaluated base points.
inline LiftedPath horizontal_lift(const ConnectionModel& conn, const PathSpec& gamma, double s0,
                                  const FiberElement& p, OdeOptions ode = {}) {
  if (!gamma.domain.contains(s0)) throw domain_error("horizontal lift: anchor outside domain");
  const BundleModel bundle = conn.bundle();
  if (!bundle.fiber_at(gamma.eval(s0)).contains(p))
    throw domain_error("horizontal lift: initial element not in the fibre over gamma(s0)");

  LiftedPath lift;
  lift.base = gamma;
  lift.anchor = gamma.domain.clamp(s0);
  lift.start = p;
  lift.params = detail::anchored_grid(gamma.domain, lift.anchor, ode.lift_samples);
  lift.samples.resize(lift.params.size());

  const double step = ode.resolve_step(gamma.domain);
  const std::size_t i0 = lift.index_of(lift.anchor);
  lift.samples[i0] = p;
  auto advance = [&](const FiberElement& from, double a, double b) {
    const Mat m = detail::fundamental_solution(conn, gamma, a, b, step);
    const FibreDescriptor dst = bundle.fiber_at(gamma.eval(b));
    if (bundle.fiber_kind == FiberKind::vector) return dst.vector_element(m * from.vec());
    return dst.group_element(bundle.group->stabilize(m * from.mat()));
  };
  for (std::size_t i = i0; i + 1 < lift.params.size(); ++i)
    lift.samples[i + 1] = advance(lift.samples[i], lift.params[i], lift.params[i + 1]);
  for (std::size_t i = i0; i-- > 0;)
    lift.samples[i] = advance(lift.samples[i + 1], lift.params[i + 1], lift.params[i]);
  lift.tangents = detail::divided_tangents(lift.params, lift.samples);
  return lift;
}

// Lift defined by an arbitrary transport family: sample t -> T(gamma, s0, t)(p).
inline LiftedPath lift_via_transport(const TransportFamily& T, const PathSpec& gamma, double s0,
                                     const FiberElement& p, int sample_count = 201) {
  if (!gamma.domain.contains(s0)) throw domain_error("lift: anchor outside domain");
  LiftedPath lift;
  lift.base = gamma;
  lift.anchor = gamma.domain.clamp(s0);
  lift.start = p;
  lift.params = detail::anchored_grid(gamma.domain, lift.anchor, sample_count);
  lift.samples.reserve(lift.params.size());
  for (double t : lift.params)
    lift.samples.push_back(std::abs(t - lift.anchor) <= kParamTol
                               ? p
                               : T.map(gamma, lift.anchor, t).apply(p));
  if (lift.base.space_dim > 0 && T.bundle.fiber_kind != FiberKind::label)
    lift.tangents = detail::divided_tangents(lift.params, lift.samples);
  return lift;
}

// Endpoint self-map of the fibre over the basepoint of a closed loop.
inline FiberMap holonomy(const ConnectionModel& conn, const PathSpec& loop, OdeOptions ode = {}) {
  const Vec a = loop.eval(loop.domain.lo), b = loop.eval(loop.domain.hi);
  if ((a - b).norm() > kFibreMatchTol) throw domain_error("holonomy: path is not closed");
  return transport_from_connection(conn, ode).map(loop, loop.domain.lo, loop.domain.hi);
}

// A C1 path through a point of interest at its anchor parameter.
struct ProbePath {
  PathSpec path;
  double anchor = 0.0;
};

inline ProbePath line_probe(const Vec& x0, const Vec& direction, double extent = 0.05,
                            std::string id = "probe") {
  PathSpec p = analytic_path(
      Interval{-extent, extent}, [x0, direction](double t) { return Vec(x0 + t * direction); },
      [direction](double) { return direction; }, std::move(id));
  return {std::move(p), 0.0};
}

// Default probe family: both coordinate directions through x0 plus seeded
// random unit directions, all injective C1 lines.
inline std::vector<ProbePath> default_probes(const Vec& x0, int base_dim, unsigned seed,
                                             double extent = 0.05) {
  std::vector<ProbePath> probes;
  for (int j = 0; j < base_dim; ++j) {
    Vec e = Vec::Zero(base_dim);
    e[j] = 1.0;
    probes.push_back(line_probe(x0, e, extent, "probe+e" + std::to_string(j)));
    probes.push_back(line_probe(x0, Vec(-e), extent, "probe-e" + std::to_string(j)));
  }
  std::mt19937 rng = seeded_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int j = 0; j < base_dim; ++j) {
    Vec d(base_dim);
    do {
      for (int i = 0; i < base_dim; ++i) d[i] = gauss(rng);
    } while (d.norm() < 1e-6);
    d.normalize();
    probes.push_back(line_probe(x0, d, extent, "probe-rand" + std::to_string(j)));
  }
  return probes;
}

// Central-difference tangent of the lift of a probe at its anchor, in total
// chart coordinates.
inline Vec lift_tangent(const TransportFamily& T, const ProbePath& probe, const FiberElement& p,
                        double fd_step = 1e-4) {
  const double a = probe.anchor;
  if (!probe.path.domain.contains(a - fd_step) || !probe.path.domain.contains(a + fd_step))
    throw domain_error("lift tangent: finite-difference stencil leaves the probe domain");
  const FiberElement up = T.map(probe.path, a, a + fd_step).apply(p);
  const FiberElement um = T.map(probe.path, a, a - fd_step).apply(p);
  return (total_coords(up) - total_coords(um)) / (2.0 * fd_step);
}

// Tangent directions of the fibre through p, as columns in total chart
// coordinates. For group fibres these are the left-translated algebra
// directions, matching the left action used by the transports here.
inline Mat vertical_basis(const BundleModel& b, const FiberElement& p) {
  const int n = b.base_dim;
  if (b.fiber_kind == FiberKind::vector) {
    const int k = b.fiber_dim;
    Mat v = Mat::Zero(n + k, k);
    v.block(n, 0, k, k) = Mat::Identity(k, k);
    return v;
  }
  if (b.fiber_kind != FiberKind::group)
    throw model_error("vertical basis: label fibres have no chart");
  const int m = b.fiber_dim;
  std::vector<Mat> algebra;
  if (b.group->rotation_like()) {
    for (int r = 0; r < m; ++r)
      for (int c = r + 1; c < m; ++c) {
        Mat x = Mat::Zero(m, m);
        x(r, c) = -1.0;
        x(c, r) = 1.0;
        algebra.push_back(x);
      }
  } else {
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) {
        Mat x = Mat::Zero(m, m);
        x(r, c) = 1.0;
        algebra.push_back(x);
      }
  }
  Mat v = Mat::Zero(n + m * m, static_cast<Eigen::Index>(algebra.size()));
  for (std::size_t a = 0; a < algebra.size(); ++a) {
    const Mat dir = algebra[a] * p.mat();
    for (Eigen::Index c = 0, k = 0; c < dir.cols(); ++c)
      for (Eigen::Index r = 0; r < dir.rows(); ++r) v(n + k++, static_cast<Eigen::Index>(a)) = dir(r, c);
  }
  return v;
}

// Estimated horizontal subspace at a total-space point.
struct SubspaceEstimate {
  Vec point;          // total chart coordinates
  Mat spanning;       // orthonormal columns
  int dim = 0;
  double rank_margin = 0.0;  // relative singular value at the rank cut
  std::vector<Vec> raw_tangents;
};

// Reconstructs the horizontal space at p from probe lifts: collect the lift
// tangents of all probes, normalize, and truncate by rank to the base
// dimension. A rank below the base dimension is reported through `dim` and
// `rank_margin` rather than thrown.
inline SubspaceEstimate horizontal_space_from_transport(const TransportFamily& T,
                                                        const FiberElement& p,
                                                        const std::vector<ProbePath>& probes,
                                                        double fd_step = 1e-4) {
  if (probes.empty()) throw domain_error("horizontal space: no probes");
  SubspaceEstimate est;
  est.point = total_coords(p);
  const Vec x0 = p.base;
  Mat stack(est.point.size(), static_cast<Eigen::Index>(probes.size()));
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Vec at = probes[i].path.eval(probes[i].anchor);
    if ((at - x0).norm() > kFibreMatchTol)
      throw domain_error("horizontal space: probe does not pass through the base point");
    Vec tau = lift_tangent(T, probes[i], p, fd_step);
    est.raw_tangents.push_back(tau);
    const double n = tau.norm();
    stack.col(static_cast<Eigen::Index>(i)) = n > 1e-14 ? Vec(tau / n) : tau;
  }
  Eigen::JacobiSVD<Mat> svd(stack, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const int want = std::min<int>(T.bundle.base_dim, static_cast<int>(sv.size()));
  int rank = 0;
  for (int i = 0; i < want; ++i)
    if (sv[i] > 1e-8 * sv[0]) ++rank;
  est.dim = rank;
  est.rank_margin = sv[want - 1] / sv[0];
  est.spanning = svd.matrixU().leftCols(rank);
  return est;
}

// Analytic horizontal space of a connection at p: the span of the lift
// directions of the coordinate tangents.
inline SubspaceEstimate analytic_horizontal_space(const ConnectionModel& conn,
                                                  const FiberElement& p) {
  SubspaceEstimate est;
  est.point = total_coords(p);
  const int n = conn.christoffel() ? conn.christoffel()->base_dim : conn.principal()->base_dim;
  Mat span(est.point.size(), n);
  for (int j = 0; j < n; ++j) {
    Vec e = Vec::Zero(n);
    e[j] = 1.0;
    Vec col = Vec::Zero(est.point.size());
    col.head(n) = e;
    if (const auto* c = conn.christoffel()) {
      const auto g = c->coeffs(p.base);
      col.tail(c->fiber_dim) = -g[static_cast<std::size_t>(j)] * p.vec();
    } else {
      const Mat dir = -conn.principal()->form(p.base, e) * p.mat();
      for (Eigen::Index cidx = 0, k = 0; cidx < dir.cols(); ++cidx)
        for (Eigen::Index r = 0; r < dir.rows(); ++r) col[n + k++] = dir(r, cidx);
    }
    span.col(j) = col;
  }
  Eigen::HouseholderQR<Mat> qr(span);
  est.spanning = Mat(qr.householderQ()).leftCols(n);
  est.dim = n;
  est.rank_margin = 1.0;
  return est;
}

// Largest principal angle between two subspaces given by spanning columns.
inline double max_principal_angle(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw domain_error("principal angles: subspace shapes differ");
  auto orthonormal = [](const Mat& m) {
    Eigen::HouseholderQR<Mat> qr(m);
    return Mat(Mat(qr.householderQ()).leftCols(m.cols()));
  };
  const Mat qa = orthonormal(a), qb = orthonormal(b);
  Eigen::JacobiSVD<Mat> svd(Mat(qa.transpose() * qb));
  const double c = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  return std::acos(c);
}

// Direct-sum test of the vertical space and an estimated horizontal space:
// the assembled unit-column matrix must have full rank. The margin is its
// smallest singular value; the report carries residual = 1 - margin so that
// pass <=> residual < tolerance = 1 - min_margin.
inline LawReport check_complementarity(const SubspaceEstimate& est, const BundleModel& bundle,
                                       const FiberElement& p, double min_margin = 0.1) {
  LawReport rep;
  rep.law = "complementarity";
  rep.tolerance = 1.0 - min_margin;
  const Mat vert = vertical_basis(bundle, p);
  const int total = static_cast<int>(est.point.size());
  Mat assembled(total, vert.cols() + est.spanning.cols());
  assembled << vert, est.spanning;
  for (Eigen::Index c = 0; c < assembled.cols(); ++c) {
    const double n = assembled.col(c).norm();
    if (n > 1e-14) assembled.col(c) /= n;
  }
  double margin = 0.0;
  if (assembled.cols() == total) {
    Eigen::JacobiSVD<Mat> svd(assembled);
    margin = svd.singularValues().minCoeff();
  }
  rep.record(est.raw_tangents.empty() ? "analytic" : "estimate", 0, 0, 0, 1.0 - margin);
  return rep;
}

// Two probes with equal position and velocity at their anchors must produce
// equal lift tangents.
inline LawReport check_initial_uniqueness(const TransportFamily& T, const FiberElement& p,
                                          const ProbePath& a, const ProbePath& b,
                                          const CheckOptions& opts, double fd_step = 1e-4) {
  const Vec xa = a.path.eval(a.anchor), xb = b.path.eval(b.anchor);
  if ((xa - xb).norm() > 1e-9 || (a.path.deriv(a.anchor) - b.path.deriv(b.anchor)).norm() > 1e-9)
    throw domain_error("initial uniqueness: probes do not share position and velocity");
  LawReport rep = opts.report("initial-uniqueness");
  const Vec ta = lift_tangent(T, a, p, fd_step);
  const Vec tb = lift_tangent(T, b, p, fd_step);
  rep.record(a.path.id + "/" + b.path.id, a.anchor, b.anchor, 0.0, (ta - tb).norm());
  return rep;
}

// Linearization of lift tangents: the straight chart path with velocity
// a1*v1 + a2*v2 lifts to the matching combination of tangents. A vanishing
// combined velocity degenerates to the point-path case and is reported as a
// skipped check (zero samples).
inline LawReport check_linearization(const TransportFamily& T, const FiberElement& p,
                                     const ProbePath& a, const ProbePath& b, double a1, double a2,
                                     const CheckOptions& opts, double fd_step = 1e-4,
                                     double extent = 0.05) {
  const Vec xa = a.path.eval(a.anchor), xb = b.path.eval(b.anchor);
  if ((xa - xb).norm() > 1e-9)
    throw domain_error("linearization: probes do not share their base point");
  LawReport rep = opts.report("linearization");
  const Vec va = a.path.deriv(a.anchor), vb = b.path.deriv(b.anchor);
  const Vec w = a1 * va + a2 * vb;
  if (w.norm() < 1e-12) return rep;  // degenerate; skipped
  const ProbePath combined = line_probe(xa, w, extent, "probe-combined");
  const Vec t3 = lift_tangent(T, combined, p, fd_step);
  const Vec expected = a1 * lift_tangent(T, a, p, fd_step) + a2 * lift_tangent(T, b, p, fd_step);
  rep.record("combined", a1, a2, 0.0, (t3 - expected).norm());
  return rep;
}

// Bounded-second-difference proxy for C1 smoothness of a sampled lift.
inline LawReport check_lift_smoothness(const LiftedPath& lift, double bound = 1e-4) {
  LawReport rep;
  rep.law = "lift-smoothness";
  rep.tolerance = bound;
  if (lift.params.size() < 3) return rep;
  const double hbar =
      (lift.params.back() - lift.params.front()) / static_cast<double>(lift.params.size() - 1);
  std::vector<Vec> coords;
  coords.reserve(lift.samples.size());
  for (const FiberElement& u : lift.samples) coords.push_back(total_coords(u));
  for (std::size_t i = 1; i + 1 < lift.params.size(); ++i) {
    const double h0 = lift.params[i] - lift.params[i - 1];
    const double h1 = lift.params[i + 1] - lift.params[i];
    const Vec dd =
        2.0 * ((coords[i + 1] - coords[i]) / h1 - (coords[i] - coords[i - 1]) / h0) / (h0 + h1);
    rep.record(lift.base.id, lift.params[i], lift.params[i], lift.params[i],
               dd.norm() * hbar * hbar);
  }
  return rep;
}

// Endpoint-map (parallel transport) variants of the smoothness, initial
// uniqueness and linearization conditions, routed through the generated
// transport along paths.
inline LawReport check_lift_smoothness(const ParallelTransport& psi, const PathSpec& gamma,
                                       double s0, const FiberElement& p, double bound = 1e-4,
                                       int samples = 201) {
  return check_lift_smoothness(lift_via_transport(to_transport(psi), gamma, s0, p, samples), bound);
}

inline LawReport check_initial_uniqueness(const ParallelTransport& psi, const FiberElement& p,
                                          const ProbePath& a, const ProbePath& b,
                                          const CheckOptions& opts, double fd_step = 1e-4) {
  return check_initial_uniqueness(to_transport(psi), p, a, b, opts, fd_step);
}

inline LawReport check_linearization(const ParallelTransport& psi, const FiberElement& p,
                                     const ProbePath& a, const ProbePath& b, double a1, double a2,
                                     const CheckOptions& opts, double fd_step = 1e-4,
                                     double extent = 0.05) {
  return check_linearization(to_transport(psi), p, a, b, a1, a2, opts, fd_step, extent);
}

}  // namespace translift
