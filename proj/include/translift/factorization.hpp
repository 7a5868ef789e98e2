#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <utility>
#include <vector>

#include "translift/transport.hpp"

namespace translift {

// Representation of a transport along one path through a model set Q: a
// family of bijections F(s) from the fibre over gamma(s) onto Q, with
// the transport recovered as F(t)^{-1} ∘ F(s). Q is a tagged copy of the
// fibre over the anchor parameter; F is memoized per queried parameter
// behind an internal lock, so concurrent queries are safe.
struct Factorization {
  PathSpec path;
  double anchor = 0.0;
  FibreDescriptor model_set;
  std::function<FiberMap(double)> F;

  FiberMap at(double s) const {
    if (!path.domain.contains(s)) throw domain_error("factorization: parameter outside domain");
    return F(path.domain.clamp(s));
  }
};

// Constructive factorization: F(s) is the transport from s to the anchor.
// For a family satisfying the groupoid laws the reconstruction below then
// reproduces the transport on this path; the residual of that round trip is
// the validation, not this constructor.
inline Factorization factorize(const TransportFamily& T, const PathSpec& gamma, double anchor) {
  if (!gamma.domain.contains(anchor)) throw domain_error("factorize: anchor outside domain");
  Factorization fac;
  fac.path = gamma;
  fac.anchor = gamma.domain.clamp(anchor);
  fac.model_set = T.bundle.fiber_at(gamma.eval(fac.anchor));

  struct Cache {
    std::mutex lock;
    std::map<double, FiberMap> entries;
  };
  auto cache = std::make_shared<Cache>();
  fac.F = [T, gamma, anchor = fac.anchor, cache](double s) {
    std::lock_guard<std::mutex> hold(cache->lock);
    auto it = cache->entries.find(s);
    if (it == cache->entries.end()) it = cache->entries.emplace(s, T.map(gamma, s, anchor)).first;
    return it->second;
  };
  return fac;
}

// The transport defined by a factorization on its own path. Accepts the
// stored path or any restriction of it (the evaluations at the queried
// parameters must agree).
inline TransportFamily reconstruct(const Factorization& fac, BundleModel bundle) {
  TransportFamily T;
  T.bundle = std::move(bundle);
  T.tag = BackendTag::factorized;
  T.law_abiding = true;
  T.at = [fac](const PathSpec& gamma, double s, double t) {
    if ((gamma.eval(s) - fac.path.eval(s)).norm() > kFibreMatchTol ||
        (gamma.eval(t) - fac.path.eval(t)).norm() > kFibreMatchTol)
      throw domain_error("reconstruct: path does not agree with the factorized path");
    return FiberMap::compose(fac.at(t).inverse(), fac.at(s));
  };
  return T;
}

inline TransportFamily reconstruct(const Factorization& fac, const TransportFamily& origin) {
  return reconstruct(fac, origin.bundle);
}

// The bijection relating two factorizations of the same transport, together
// with the measured independence of the defining parameter.
struct GaugeMap {
  FiberMap map;              // model set of fac2 -> model set of fac1
  LawReport independence;    // spread of F1(s) ∘ F2(s)^{-1} across s
};

namespace detail {

inline std::vector<FiberElement> model_samples(const FibreDescriptor& q, const CheckOptions& opts) {
  std::mt19937 rng = seeded_rng(opts.seed);
  return q.sample(opts.fibre_samples, rng);
}

}  // namespace detail

// Recovers D with F1(s) = D ∘ F2(s). D is computed at the first sampled
// parameter and its independence of the parameter is verified at all others;
// factorizations of different transports show up as independence failures.
inline GaugeMap gauge_map(const Factorization& fac1, const Factorization& fac2,
                          const std::vector<double>& params, const CheckOptions& opts = {}) {
  if (params.empty()) throw domain_error("gauge map: no sample parameters");
  GaugeMap g{FiberMap::compose(fac1.at(params.front()), fac2.at(params.front()).inverse()),
             opts.report("gauge-independence")};
  const auto probes = detail::model_samples(fac2.model_set, opts);
  for (double s : params) {
    const FiberMap d_s = FiberMap::compose(fac1.at(s), fac2.at(s).inverse());
    for (const FiberElement& u : probes) {
      // Both candidates land in fac1's model set; compare there.
      const double residual =
          fac1.model_set.kind == FiberKind::label
              ? (d_s.apply(u).label() == g.map.apply(u).label() ? 0.0 : 1.0)
              : [&] {
                  const FiberElement a = d_s.apply(u), b = g.map.apply(u);
                  return a.kind() == FiberKind::vector ? (a.vec() - b.vec()).norm()
                                                       : (a.mat() - b.mat()).norm();
                }();
      g.independence.record(fac1.path.id, s, s, params.front(), residual);
    }
  }
  return g;
}

// Residual of F1(s) against D ∘ F2(s) over the sampled parameters.
inline LawReport verify_gauge(const GaugeMap& gauge, const Factorization& fac1,
                              const Factorization& fac2, const std::vector<double>& params,
                              const CheckOptions& opts = {}) {
  LawReport rep = opts.report("gauge-consistency");
  std::mt19937 rng = seeded_rng(opts.seed);
  for (double s : params) {
    const FiberMap left = fac1.at(s);
    const FiberMap right = FiberMap::compose(gauge.map, fac2.at(s));
    for (const FiberElement& u : fac1.at(s).source.sample(opts.fibre_samples, rng)) {
      const FiberElement a = left.apply(u), b = right.apply(u);
      double residual = 0.0;
      switch (a.kind()) {
        case FiberKind::vector: residual = (a.vec() - b.vec()).norm(); break;
        case FiberKind::group: residual = (a.mat() - b.mat()).norm(); break;
        case FiberKind::label: residual = a.label() == b.label() ? 0.0 : 1.0; break;
      }
      rep.record(fac1.path.id, s, s, s, residual);
    }
  }
  return rep;
}

// --- Finite-fibre mode -----------------------------------------------------
//
// Fibres are explicit label sets and bijections are permutation tables; every
// check is exhaustive. This grounds the factorization laws in enumerable
// instances.

// One bijection per grid parameter, each a permutation of {0..k-1}.
struct BijectionFamily {
  std::vector<double> params;
  std::vector<std::vector<int>> tables;

  static BijectionFamily random(int labels, std::vector<double> params, std::mt19937& rng) {
    BijectionFamily fam;
    fam.params = std::move(params);
    fam.tables.reserve(fam.params.size());
    for (std::size_t i = 0; i < fam.params.size(); ++i) {
      std::vector<int> perm(static_cast<std::size_t>(labels));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      fam.tables.push_back(std::move(perm));
    }
    return fam;
  }

  std::size_t index_of(double s) const {
    for (std::size_t i = 0; i < params.size(); ++i)
      if (std::abs(params[i] - s) <= kParamTol) return i;
    throw domain_error("bijection family: parameter not on the family grid");
  }
};

inline std::vector<int> invert_table(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
  return inv;
}

// Exact transport on a finite-fibre bundle defined by an explicit family of
// bijections onto the label set: the map from s to t sends a label through
// F(s) and back through F(t)^{-1}. Defined for parameters on the family grid.
inline TransportFamily transport_from_bijections(const PathSpec& gamma, int labels,
                                                 BijectionFamily family) {
  TransportFamily T;
  T.bundle = BundleModel::label_bundle(gamma.space_dim, labels);
  T.tag = BackendTag::factorized;
  T.law_abiding = true;
  auto fam = std::make_shared<const BijectionFamily>(std::move(family));
  T.at = [fam, bundle = T.bundle](const PathSpec& gamma, double s, double t) {
    const std::vector<int>& fs = fam->tables[fam->index_of(s)];
    const std::vector<int> ft_inv = invert_table(fam->tables[fam->index_of(t)]);
    const FibreDescriptor src = bundle.fiber_at(gamma.eval(s));
    const FibreDescriptor dst = bundle.fiber_at(gamma.eval(t));
    std::vector<int> fwd(fs.size()), bwd(fs.size());
    for (std::size_t a = 0; a < fs.size(); ++a)
      fwd[a] = ft_inv[static_cast<std::size_t>(fs[a])];
    bwd = invert_table(fwd);
    return FiberMap{src, dst,
                    [fwd, dst](const FiberElement& u) {
                      return dst.label_element(fwd[static_cast<std::size_t>(u.label())]);
                    },
                    [bwd, src](const FiberElement& u) {
                      return src.label_element(bwd[static_cast<std::size_t>(u.label())]);
                    }};
  };
  return T;
}

// Permutation tables of a finite-fibre factorization: row i lists the image
// labels of F(params[i]).
inline std::vector<std::vector<int>> permutation_tables(const Factorization& fac,
                                                        const std::vector<double>& params) {
  if (fac.model_set.kind != FiberKind::label)
    throw model_error("permutation tables: factorization is not finite-fibre");
  std::vector<std::vector<int>> tables;
  tables.reserve(params.size());
  for (double s : params) {
    const FiberMap f = fac.at(s);
    std::vector<int> row;
    row.reserve(static_cast<std::size_t>(fac.model_set.dim));
    for (const FiberElement& u : f.source.all_elements()) row.push_back(f.apply(u).label());
    tables.push_back(std::move(row));
  }
  return tables;
}

}  // namespace translift
