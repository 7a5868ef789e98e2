#pragma once

#include <string>
#include <utility>
#include <vector>

#include "translift/transport.hpp"

namespace translift {

// Wire-format axiom identifiers used in serialized reports.
namespace axiom_ids {
inline constexpr const char* reparam = "reparam-8.11";
inline constexpr const char* inverse = "inverse-8.12";
inline constexpr const char* concat = "concat-8.13";
inline constexpr const char* point = "point-8.14";
}  // namespace axiom_ids

// Axiomatic parallel transport: one fibre map per path, from the fibre over
// the start point to the fibre over the end point.
struct ParallelTransport {
  BundleModel bundle;
  std::function<FiberMap(const PathSpec&)> at;

  FiberMap map(const PathSpec& gamma) const { return at(gamma); }
};

// The endpoint map of a transport along paths. When the input satisfies the
// restriction and reparametrization conditions the result satisfies all four
// parallel-transport axioms; the construction itself never refuses, a
// law-violating input simply produces an axiom-violating output that the
// axiom suite will flag.
inline ParallelTransport to_parallel(const TransportFamily& T) {
  ParallelTransport psi;
  psi.bundle = T.bundle;
  psi.at = [T](const PathSpec& gamma) { return T.map(gamma, gamma.domain.lo, gamma.domain.hi); };
  return psi;
}

// The transport along paths generated by a parallel transport: restriction
// of the path for increasing parameters, the inverse map for decreasing
// ones. Both case arms agree at s == t where the restriction is a point path.
inline TransportFamily to_transport(const ParallelTransport& psi) {
  TransportFamily T;
  T.bundle = psi.bundle;
  T.tag = BackendTag::factorized;
  T.law_abiding = true;
  T.at = [psi](const PathSpec& beta, double s, double t) {
    if (s <= t) return psi.at(restrict_path(beta, Interval{s, t}));
    return psi.at(restrict_path(beta, Interval{t, s})).inverse();
  };
  return T;
}

// Residuals of the four parallel-transport axioms.
struct AxiomReport {
  LawReport reparam;
  LawReport inverse;
  LawReport concat;
  LawReport point;

  bool pass() const { return reparam.pass && inverse.pass && concat.pass && point.pass; }
  double max_residual() const {
    return std::max(std::max(reparam.max_residual, inverse.max_residual),
                    std::max(concat.max_residual, point.max_residual));
  }
  std::vector<const LawReport*> laws() const { return {&reparam, &inverse, &concat, &point}; }
};

// Sampling data for the axiom suite. Composition pairs must live on [0,1]
// with matching endpoints; reparametrizations must be orientation
// preserving.
struct AxiomPlan {
  struct Entry {
    PathSpec path;
    std::vector<Reparam> reparams;
  };
  std::vector<Entry> entries;
  std::vector<std::pair<PathSpec, PathSpec>> composable_pairs;
  std::vector<std::pair<double, Vec>> points;  // (r, x) for point paths
  CheckOptions opts;

  // Interval-changing affine and smooth non-affine reparametrizations per
  // path; composable pairs from splitting each path at its midpoint and
  // rescaling the halves onto [0,1]; point paths at each path's endpoints.
  static AxiomPlan standard(const std::vector<PathSpec>& paths, CheckOptions opts = {}) {
    AxiomPlan plan;
    plan.opts = opts;
    for (const PathSpec& p : paths) {
      Entry e;
      e.path = p;
      if (!p.domain.is_point()) {
        e.reparams.push_back(Reparam::affine(Interval{0.0, 2.0}, p.domain));
        e.reparams.push_back(
            compose(Reparam::affine(Interval::unit(), p.domain), Reparam::square()));

        const double mid = p.domain.midpoint();
        PathSpec first = to_unit_domain(restrict_path(p, Interval{p.domain.lo, mid}));
        PathSpec second = to_unit_domain(restrict_path(p, Interval{mid, p.domain.hi}));
        plan.composable_pairs.emplace_back(std::move(first), std::move(second));
      }
      plan.points.emplace_back(p.domain.lo, p.eval(p.domain.lo));
      plan.points.emplace_back(0.75, p.eval(p.domain.hi));
      plan.entries.push_back(std::move(e));
    }
    return plan;
  }
};

namespace detail {

inline void compare_maps(const BundleModel& bundle, const FiberMap& a, const FiberMap& b,
                         LawReport& rep, const std::string& id, double where,
                         const CheckOptions& opts) {
  std::mt19937 rng = seeded_rng(opts.seed);
  for (const FiberElement& u : a.source.sample(opts.fibre_samples, rng))
    rep.record(id, where, where, where, bundle.fibre_distance(a.apply(u), b.apply(u)));
}

}  // namespace detail

// Verifies the four axioms on the plan's samples: invariance under
// orientation-preserving reparametrization, compatibility with the canonical
// inverse, the canonical product rule (first path applied first), and
// identity on point paths.
inline AxiomReport check_axioms(const ParallelTransport& psi, const AxiomPlan& plan) {
  AxiomReport rep;
  rep.reparam = plan.opts.report(axiom_ids::reparam);
  rep.inverse = plan.opts.report(axiom_ids::inverse);
  rep.concat = plan.opts.report(axiom_ids::concat);
  rep.point = plan.opts.report(axiom_ids::point);

  for (const auto& e : plan.entries) {
    for (const Reparam& chi : e.reparams) {
      if (!chi.orientation_preserving)
        throw domain_error("axiom suite: reparametrizations must preserve orientation");
      detail::compare_maps(psi.bundle, psi.at(reparametrize(e.path, chi)), psi.at(e.path),
                           rep.reparam, e.path.id, chi.source.lo, plan.opts);
    }
    if (!e.path.domain.is_point()) {
      const PathSpec unit = to_unit_domain(e.path);
      detail::compare_maps(psi.bundle, psi.at(canonical_inverse(unit)), psi.at(unit).inverse(),
                           rep.inverse, e.path.id, 0.0, plan.opts);
    }
  }
  for (const auto& [first, second] : plan.composable_pairs) {
    const FiberMap joined = psi.at(canonical_product(first, second));
    const FiberMap chained = FiberMap::compose(psi.at(second), psi.at(first));
    detail::compare_maps(psi.bundle, joined, chained, rep.concat, first.id + "*" + second.id, 0.0,
                         plan.opts);
  }
  for (const auto& [r, x] : plan.points) {
    const FiberMap m = psi.at(point_path(r, x));
    std::mt19937 rng = seeded_rng(plan.opts.seed);
    for (const FiberElement& u : m.source.sample(plan.opts.fibre_samples, rng))
      rep.point.record("point", r, r, r, psi.bundle.fibre_distance(m.apply(u), u));
  }
  return rep;
}

// Round trip through the correspondence, starting from a transport along
// paths: the composite of both directions must reproduce the family on all
// sampled paths, parameter pairs and fibre elements.
inline double round_trip_along_paths(const TransportFamily& T, const SamplingPlan& plan) {
  const TransportFamily back = to_transport(to_parallel(T));
  double worst = 0.0;
  for (const auto& e : plan.entries) {
    auto samples = detail::grid_samples(T, e.path, e.grid, plan.opts);
    for (std::size_t i = 0; i < e.grid.size(); ++i)
      for (std::size_t j = 0; j < e.grid.size(); ++j) {
        const FiberMap a = back.map(e.path, e.grid[i], e.grid[j]);
        const FiberMap b = T.map(e.path, e.grid[i], e.grid[j]);
        for (const FiberElement& u : samples[i])
          worst = std::max(worst, T.bundle.fibre_distance(a.apply(u), b.apply(u)));
      }
  }
  return worst;
}

// Round trip starting from a parallel transport.
inline double round_trip_parallel(const ParallelTransport& psi, const std::vector<PathSpec>& paths,
                                  const CheckOptions& opts = {}) {
  const ParallelTransport back = to_parallel(to_transport(psi));
  double worst = 0.0;
  std::mt19937 rng = seeded_rng(opts.seed);
  for (const PathSpec& p : paths) {
    const FiberMap a = back.at(p);
    const FiberMap b = psi.at(p);
    for (const FiberElement& u : a.source.sample(opts.fibre_samples, rng))
      worst = std::max(worst, psi.bundle.fibre_distance(a.apply(u), b.apply(u)));
  }
  return worst;
}

}  // namespace translift
