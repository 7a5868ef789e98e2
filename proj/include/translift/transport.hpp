#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "translift/bundle.hpp"
#include "translift/common.hpp"
#include "translift/path.hpp"

namespace translift {

// Wire-format law identifiers used in serialized reports.
namespace law_ids {
inline constexpr const char* identity = "identity";
inline constexpr const char* groupoid = "groupoid-composition";
inline constexpr const char* inverse = "inverse";
inline constexpr const char* restriction = "restriction-8.5";
inline constexpr const char* reparam = "reparam-8.6";
}  // namespace law_ids

// An invertible map between two fibres. Both directions are stored; the
// inverse of a map is the same object with the directions swapped.
struct FiberMap {
  FibreDescriptor source;
  FibreDescriptor target;
  std::function<FiberElement(const FiberElement&)> forward;
  std::function<FiberElement(const FiberElement&)> backward;

  FiberElement apply(const FiberElement& u) const {
    if (!source.contains(u)) throw domain_error("fibre map: element not in the source fibre");
    return forward(u);
  }

  FiberMap inverse() const { return {target, source, backward, forward}; }

  static FiberMap identity(FibreDescriptor f) {
    auto id = [](const FiberElement& u) { return u; };
    return {f, f, id, id};
  }

  // outer ∘ inner.
  static FiberMap compose(const FiberMap& outer, const FiberMap& inner) {
    if ((inner.target.base - outer.source.base).norm() > kFibreMatchTol ||
        inner.target.kind != outer.source.kind)
      throw composition_error("fibre map compose: inner target does not match outer source");
    return {inner.source, outer.target,
            [o = outer.forward, i = inner.forward](const FiberElement& u) { return o(i(u)); },
            [o = outer.backward, i = inner.backward](const FiberElement& u) { return i(o(u)); }};
  }
};

enum class BackendTag { foliation, group_left, group_right, connection, factorized, adversarial };

inline std::string to_string(BackendTag t) {
  switch (t) {
    case BackendTag::foliation: return "foliation";
    case BackendTag::group_left: return "group-left";
    case BackendTag::group_right: return "group-right";
    case BackendTag::connection: return "connection";
    case BackendTag::factorized: return "factorized";
    case BackendTag::adversarial: return "adversarial";
  }
  return "?";
}

// Family of transports along paths: for each path and parameter pair (s,t)
// an invertible map between the fibres over gamma(s) and gamma(t).
// Evaluation is pure; families are safe to share across threads.
struct TransportFamily {
  BundleModel bundle;
  BackendTag tag = BackendTag::adversarial;
  bool law_abiding = true;  // groupoid laws hold by construction
  std::function<FiberMap(const PathSpec&, double, double)> at;

  FiberMap map(const PathSpec& gamma, double s, double t) const {
    if (!gamma.domain.contains(s) || !gamma.domain.contains(t))
      throw domain_error("transport: parameter outside the path domain");
    return at(gamma, gamma.domain.clamp(s), gamma.domain.clamp(t));
  }

  double default_tolerance() const {
    return tag == BackendTag::connection ? kOdeTol : kAlgebraicTol;
  }
};

inline FiberElement apply_transport(const TransportFamily& T, const PathSpec& gamma, double s,
                                    double t, const FiberElement& u) {
  return T.map(gamma, s, t).apply(u);
}

struct Witness {
  std::string path_id;
  double r = 0.0, s = 0.0, t = 0.0;
  double residual = 0.0;
};

// Outcome of one law check: the worst residual over all samples, the
// verdict at the given tolerance, and the failing tuples (only failures are
// recorded, so witnesses are nonempty exactly when the check fails).
struct LawReport {
  std::string law;
  std::size_t samples = 0;
  double max_residual = 0.0;
  double tolerance = kAlgebraicTol;
  bool pass = true;
  std::vector<Witness> witnesses;
  std::size_t max_witnesses = 8;

  void record(const std::string& path_id, double r, double s, double t, double residual) {
    ++samples;
    max_residual = std::max(max_residual, residual);
    if (residual >= tolerance) {
      pass = false;
      if (witnesses.size() < max_witnesses) witnesses.push_back({path_id, r, s, t, residual});
    }
  }

  // Associative merge; used when the same law is checked over several paths.
  void merge(const LawReport& other) {
    samples += other.samples;
    max_residual = std::max(max_residual, other.max_residual);
    pass = pass && other.pass;
    for (const Witness& w : other.witnesses)
      if (witnesses.size() < max_witnesses) witnesses.push_back(w);
  }
};

struct CheckOptions {
  double tolerance = kAlgebraicTol;
  int fibre_samples = 8;
  unsigned seed = 17;
  std::size_t max_witnesses = 8;

  LawReport report(std::string law) const {
    LawReport r;
    r.law = std::move(law);
    r.tolerance = tolerance;
    r.max_witnesses = max_witnesses;
    return r;
  }
};

namespace detail {

// Transport maps between all grid points of one path, built on demand.
class MapTable {
 public:
  MapTable(const TransportFamily& T, const PathSpec& gamma, std::vector<double> grid)
      : T_(T), gamma_(gamma), grid_(std::move(grid)) {}

  const FiberMap& at(std::size_t i, std::size_t j) {
    auto key = std::make_pair(i, j);
    auto it = cache_.find(key);
    if (it == cache_.end())
      it = cache_.emplace(key, T_.map(gamma_, grid_[i], grid_[j])).first;
    return it->second;
  }

  const std::vector<double>& grid() const { return grid_; }

 private:
  const TransportFamily& T_;
  const PathSpec& gamma_;
  std::vector<double> grid_;
  std::map<std::pair<std::size_t, std::size_t>, FiberMap> cache_;
};

inline std::vector<std::vector<FiberElement>> grid_samples(const TransportFamily& T,
                                                           const PathSpec& gamma,
                                                           const std::vector<double>& grid,
                                                           const CheckOptions& opts) {
  std::mt19937 rng = seeded_rng(opts.seed);
  std::vector<std::vector<FiberElement>> out;
  out.reserve(grid.size());
  for (double s : grid) out.push_back(T.bundle.sample_fibre(gamma.eval(s), opts.fibre_samples, rng));
  return out;
}

}  // namespace detail

// Identity law: the transport from s to s fixes every fibre element.
inline LawReport check_identity(const TransportFamily& T, const PathSpec& gamma,
                                const std::vector<double>& grid, const CheckOptions& opts) {
  LawReport rep = opts.report(law_ids::identity);
  auto samples = detail::grid_samples(T, gamma, grid, opts);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const FiberMap m = T.map(gamma, grid[i], grid[i]);
    for (const FiberElement& u : samples[i])
      rep.record(gamma.id, grid[i], grid[i], grid[i], T.bundle.fibre_distance(m.apply(u), u));
  }
  return rep;
}

// Composition law over all grid triples (r,s,t):
// transporting r->s then s->t must agree with transporting r->t.
inline LawReport check_groupoid(const TransportFamily& T, const PathSpec& gamma,
                                const std::vector<double>& grid, const CheckOptions& opts) {
  for (double g : grid)
    if (!gamma.domain.contains(g)) throw domain_error("groupoid check: grid point outside domain");
  LawReport rep = opts.report(law_ids::groupoid);
  detail::MapTable maps(T, gamma, grid);
  auto samples = detail::grid_samples(T, gamma, grid, opts);
  const std::size_t n = grid.size();
  for (std::size_t ir = 0; ir < n; ++ir)
    for (std::size_t is = 0; is < n; ++is)
      for (std::size_t it = 0; it < n; ++it)
        for (const FiberElement& u : samples[ir]) {
          const FiberElement via = maps.at(is, it).apply(maps.at(ir, is).apply(u));
          const FiberElement direct = maps.at(ir, it).apply(u);
          rep.record(gamma.id, grid[ir], grid[is], grid[it],
                     T.bundle.fibre_distance(via, direct));
        }
  return rep;
}

// Invertibility: transporting s->t then t->s returns every element.
inline LawReport check_inverse(const TransportFamily& T, const PathSpec& gamma,
                               const std::vector<double>& grid, const CheckOptions& opts) {
  LawReport rep = opts.report(law_ids::inverse);
  detail::MapTable maps(T, gamma, grid);
  auto samples = detail::grid_samples(T, gamma, grid, opts);
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (const FiberElement& u : samples[i]) {
        const FiberElement back = maps.at(j, i).apply(maps.at(i, j).apply(u));
        rep.record(gamma.id, grid[i], grid[i], grid[j], T.bundle.fibre_distance(back, u));
      }
  return rep;
}

// Restriction condition: the transport assigned to gamma|sub agrees with the
// one assigned to gamma for parameters inside sub.
inline LawReport check_restriction(const TransportFamily& T, const PathSpec& gamma,
                                   const Interval& sub, const std::vector<double>& grid,
                                   const CheckOptions& opts) {
  if (!gamma.domain.contains(sub)) throw domain_error("restriction check: interval not contained");
  for (double g : grid)
    if (!sub.contains(g)) throw domain_error("restriction check: grid point outside subinterval");
  LawReport rep = opts.report(law_ids::restriction);
  const PathSpec restricted = restrict_path(gamma, sub);
  auto samples = detail::grid_samples(T, gamma, grid, opts);
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const FiberMap a = T.map(restricted, grid[i], grid[j]);
      const FiberMap b = T.map(gamma, grid[i], grid[j]);
      for (const FiberElement& u : samples[i])
        rep.record(gamma.id, grid[i], grid[i], grid[j],
                   T.bundle.fibre_distance(a.apply(u), b.apply(u)));
    }
  return rep;
}

// Reparametrization condition: the transport assigned to gamma∘chi from s to
// t agrees with the one assigned to gamma from chi(s) to chi(t).
inline LawReport check_reparam(const TransportFamily& T, const PathSpec& gamma, const Reparam& chi,
                               const std::vector<double>& grid, const CheckOptions& opts) {
  if (!nearly_equal(chi.target, gamma.domain))
    throw domain_error("reparam check: chi target does not match path domain");
  for (double g : grid)
    if (!chi.source.contains(g)) throw domain_error("reparam check: grid point outside chi source");
  LawReport rep = opts.report(law_ids::reparam);
  const PathSpec pulled = reparametrize(gamma, chi);
  auto samples = detail::grid_samples(T, pulled, grid, opts);
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const FiberMap a = T.map(pulled, grid[i], grid[j]);
      const FiberMap b = T.map(gamma, chi(grid[i]), chi(grid[j]));
      for (const FiberElement& u : samples[i])
        rep.record(gamma.id, grid[i], grid[i], grid[j],
                   T.bundle.fibre_distance(a.apply(u), b.apply(u)));
    }
  return rep;
}

// What to quantify over when deciding whether a family is a parallel
// transport along paths: per path a grid, subintervals and changes of
// parameter.
struct SamplingPlan {
  struct Entry {
    PathSpec path;
    std::vector<double> grid;
    std::vector<Interval> subintervals;
    std::vector<Reparam> reparams;
  };
  std::vector<Entry> entries;
  CheckOptions opts;
  int grid_size = 11;

  // Middle-half subinterval plus three standard changes of parameter:
  // an interval-changing affine map, a smooth non-affine map, and an
  // orientation-reversing affine map.
  static SamplingPlan standard(const std::vector<PathSpec>& paths, int grid_size = 11,
                               CheckOptions opts = {}) {
    SamplingPlan plan;
    plan.opts = opts;
    plan.grid_size = grid_size;
    for (const PathSpec& p : paths) {
      Entry e;
      e.path = p;
      e.grid = p.domain.grid(grid_size);
      if (!p.domain.is_point()) {
        const double q = p.domain.length() / 4.0;
        e.subintervals.push_back(Interval{p.domain.lo + q, p.domain.hi - q});
        e.reparams.push_back(Reparam::affine(Interval{0.0, 2.0}, p.domain));
        e.reparams.push_back(compose(Reparam::affine(Interval::unit(), p.domain), Reparam::square()));
        e.reparams.push_back(Reparam::affine(Interval::unit(), p.domain, /*preserving=*/false));
      }
      plan.entries.push_back(std::move(e));
    }
    return plan;
  }
};

// Aggregate of the five law checks over a sampling plan.
struct SuiteReport {
  std::vector<LawReport> laws;
  bool pass = true;
  double max_residual = 0.0;

  void add(const LawReport& rep) {
    for (LawReport& have : laws)
      if (have.law == rep.law) {
        have.merge(rep);
        pass = pass && rep.pass;
        max_residual = std::max(max_residual, rep.max_residual);
        return;
      }
    laws.push_back(rep);
    pass = pass && rep.pass;
    max_residual = std::max(max_residual, rep.max_residual);
  }

  const LawReport* find(const std::string& law) const {
    for (const LawReport& r : laws)
      if (r.law == law) return &r;
    return nullptr;
  }
};

// Runs identity, composition, inverse, restriction and reparametrization
// checks; the family is a parallel transport along paths on the sampled data
// exactly when every law passes.
inline SuiteReport is_parallel_transport_along_paths(const TransportFamily& T,
                                                     const SamplingPlan& plan) {
  SuiteReport suite;
  for (const auto& e : plan.entries) {
    suite.add(check_identity(T, e.path, e.grid, plan.opts));
    suite.add(check_groupoid(T, e.path, e.grid, plan.opts));
    suite.add(check_inverse(T, e.path, e.grid, plan.opts));
    for (const Interval& sub : e.subintervals)
      suite.add(check_restriction(T, e.path, sub, sub.grid(plan.grid_size), plan.opts));
    for (const Reparam& chi : e.reparams)
      suite.add(check_reparam(T, e.path, chi, chi.source.grid(plan.grid_size), plan.opts));
  }
  return suite;
}

}  // namespace translift
