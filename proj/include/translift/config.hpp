#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "translift/connection.hpp"
#include "translift/example_transports.hpp"
#include "translift/factorization.hpp"
#include "translift/transport.hpp"

namespace translift {

// Parsed run configuration; the raw document is kept verbatim for echoing
// into reports.
struct RunConfig {
  nlohmann::json raw;
  std::string source;

  nlohmann::json bundle;
  nlohmann::json backend;
  std::vector<nlohmann::json> path_specs;
  std::vector<std::string> checks;
  int grid = 11;
  unsigned seed = 17;
  int fibre_samples = 8;
  double ode_step = 0.0;  // 0: per-path default
  double tol_algebraic = kAlgebraicTol;
  double tol_ode = kOdeTol;
  nlohmann::json jobs;  // subcommand payloads: transport / holonomy / factorize / reconstruct
  std::string out_dir;
  std::string report_name = "report.json";
  std::string csv_name;
};

namespace detail {

inline std::string line_of_offset(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

inline const nlohmann::json& require(const nlohmann::json& j, const std::string& key,
                                     const std::string& ctx) {
  if (!j.is_object() || !j.contains(key))
    throw config_error(ctx + ": missing required key '" + key + "'");
  return j.at(key);
}

template <typename T>
inline T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
  if (j.is_object() && j.contains(key)) return j.at(key).get<T>();
  return fallback;
}

}  // namespace detail

inline RunConfig load_run_config(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw config_error(file + ": cannot open config file");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  RunConfig cfg;
  cfg.source = file;
  try {
    cfg.raw = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(file + ":" + detail::line_of_offset(text, e.byte) + ": " + e.what());
  }
  const auto& j = cfg.raw;
  const std::string ctx = file;
  cfg.bundle = detail::require(j, "bundle", ctx);
  cfg.backend = detail::require(j, "backend", ctx);
  if (j.contains("paths"))
    for (const auto& p : j.at("paths")) cfg.path_specs.push_back(p);
  if (j.contains("checks"))
    for (const auto& c : j.at("checks")) cfg.checks.push_back(c.get<std::string>());
  cfg.grid = detail::get_or(j, "grid", 11);
  if (cfg.grid < 2 && !cfg.path_specs.empty())
    throw config_error(ctx + ": grid must have at least 2 points");
  cfg.seed = detail::get_or(j, "seed", 17u);
  cfg.fibre_samples = detail::get_or(j, "fibre_samples", 8);
  cfg.ode_step = detail::get_or(j, "ode_step", 0.0);
  if (j.contains("tolerance")) {
    const auto& t = j.at("tolerance");
    cfg.tol_algebraic = detail::get_or(t, "algebraic", kAlgebraicTol);
    cfg.tol_ode = detail::get_or(t, "ode", kOdeTol);
    if (cfg.tol_algebraic <= 0.0 || cfg.tol_ode <= 0.0)
      throw config_error(ctx + ": tolerances must be positive");
  }
  cfg.jobs = j;
  if (j.contains("output")) {
    cfg.report_name = detail::get_or(j.at("output"), "report", std::string("report.json"));
    cfg.csv_name = detail::get_or(j.at("output"), "csv", std::string());
  }
  if (const char* env = std::getenv("TRANSLIFT_OUT_DIR")) cfg.out_dir = env;
  return cfg;
}

namespace detail {

inline PathSpec parse_path(const nlohmann::json& p, const std::string& ctx);

inline PathSpec parse_analytic(const nlohmann::json& p, const std::string& ctx) {
  const std::string formula = require(p, "formula", ctx).get<std::string>();
  std::vector<double> a;
  if (p.contains("params"))
    for (const auto& v : p.at("params")) a.push_back(v.get<double>());
  const auto& dom = require(p, "domain", ctx);
  if (!dom.is_array() || dom.size() != 2) throw config_error(ctx + ": domain must be [lo, hi]");
  const Interval domain{dom.at(0).get<double>(), dom.at(1).get<double>()};
  const std::string id = get_or(p, "id", std::string(formula));

  if (formula == "line") {
    if (a.empty() || a.size() % 2 != 0)
      throw config_error(ctx + ": line needs params [origin..., direction...]");
    const int n = static_cast<int>(a.size() / 2);
    Vec x0(n), d(n);
    for (int i = 0; i < n; ++i) {
      x0[i] = a[static_cast<std::size_t>(i)];
      d[i] = a[static_cast<std::size_t>(n + i)];
    }
    return analytic_path(domain, [x0, d](double t) { return Vec(x0 + t * d); },
                         [d](double) { return d; }, id);
  }
  if (formula == "circle") {
    if (a.size() != 5)
      throw config_error(ctx + ": circle needs params [cx, cy, r, omega, phase]");
    const double cx = a[0], cy = a[1], r = a[2], w = a[3], ph = a[4];
    return analytic_path(
        domain,
        [=](double t) { return make_vec({cx + r * std::cos(w * t + ph), cy + r * std::sin(w * t + ph)}); },
        [=](double t) { return make_vec({-r * w * std::sin(w * t + ph), r * w * std::cos(w * t + ph)}); },
        id);
  }
  if (formula == "parabola") {
    if (a.size() != 2) throw config_error(ctx + ": parabola needs params [a, b]");
    const double ca = a[0], cb = a[1];
    return analytic_path(domain, [=](double t) { return make_vec({t, ca * t * t + cb * t}); },
                         [=](double t) { return make_vec({1.0, 2.0 * ca * t + cb}); }, id);
  }
  if (formula == "latitude") {
    if (a.size() != 1) throw config_error(ctx + ": latitude needs params [theta0]");
    const double th = a[0];
    return analytic_path(domain, [th](double t) { return make_vec({th, t}); },
                         [](double) { return make_vec({0.0, 1.0}); }, id);
  }
  if (formula == "meridian") {
    if (a.size() != 1) throw config_error(ctx + ": meridian needs params [phi0]");
    const double ph = a[0];
    return analytic_path(domain, [ph](double t) { return make_vec({t, ph}); },
                         [](double) { return make_vec({1.0, 0.0}); }, id);
  }
  if (formula == "point") {
    Vec x(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) x[static_cast<Eigen::Index>(i)] = a[i];
    return point_path(domain.lo, x);
  }
  throw config_error(ctx + ": unknown path formula '" + formula + "'");
}

inline PathSpec parse_path(const nlohmann::json& p, const std::string& ctx) {
  const std::string kind = require(p, "kind", ctx).get<std::string>();
  if (kind == "analytic") return parse_analytic(p, ctx);
  if (kind == "sampled") {
    const auto& knots = require(p, "knots", ctx);
    std::vector<double> ts;
    std::vector<Vec> xs;
    for (const auto& k : knots) {
      ts.push_back(k.at(0).get<double>());
      const auto& point = k.at(1);
      Vec x(static_cast<Eigen::Index>(point.size()));
      for (std::size_t i = 0; i < point.size(); ++i)
        x[static_cast<Eigen::Index>(i)] = point.at(i).get<double>();
      xs.push_back(std::move(x));
    }
    return sampled_path(std::move(ts), std::move(xs), get_or(p, "order", 3),
                        get_or(p, "id", std::string("sampled")));
  }
  if (kind == "piecewise") {
    std::vector<PathSpec> pieces;
    for (const auto& q : require(p, "pieces", ctx)) pieces.push_back(parse_path(q, ctx));
    return piecewise_path(std::move(pieces), get_or(p, "id", std::string("piecewise")));
  }
  throw config_error(ctx + ": unknown path kind '" + kind + "'");
}

inline GroupModel parse_group(const nlohmann::json& j, const std::string& ctx) {
  const std::string id = j.get<std::string>();
  if (id == "SO2") return GroupModel::so2();
  if (id == "SO3") return GroupModel::so3();
  if (id == "U1") return GroupModel::u1();
  if (id.rfind("GL", 0) == 0) return GroupModel::gl(std::stoi(id.substr(2)));
  throw config_error(ctx + ": unknown group '" + id + "'");
}

inline std::function<Vec(const Vec&)> parse_sigma(const std::string& name, int base_dim, int k,
                                                  const std::string& ctx) {
  if (name == "zero")
    return [k](const Vec&) { return Vec(Vec::Zero(k)); };
  if (name == "linear")
    return [k, base_dim](const Vec& x) {
      Vec s(k);
      for (int j = 0; j < k; ++j) s[j] = x[j % base_dim];
      return s;
    };
  if (name == "sine")
    return [k, base_dim](const Vec& x) {
      Vec s(k);
      for (int j = 0; j < k; ++j) s[j] = std::sin(x[j % base_dim] + j);
      return s;
    };
  throw config_error(ctx + ": unknown section '" + name + "'");
}

}  // namespace detail

// Everything a subcommand needs, resolved from a config: the bundle, the
// transport backend over it, the named paths, and the matched tolerance.
struct Setup {
  BundleModel bundle;
  TransportFamily transport;
  std::optional<ConnectionModel> connection;
  std::optional<FoliationModel> foliation;
  std::vector<PathSpec> paths;
  std::map<std::string, std::size_t> path_index;
  double tolerance = kAlgebraicTol;
  CheckOptions opts;

  const PathSpec& path(const std::string& id) const {
    auto it = path_index.find(id);
    if (it == path_index.end()) throw config_error("unknown path id '" + id + "'");
    return paths[it->second];
  }
};

inline Setup resolve(const RunConfig& cfg) {
  const std::string ctx = cfg.source;
  Setup setup;

  // Base + fibre.
  const auto& base = detail::require(cfg.bundle, "base", ctx + ": bundle");
  const std::string base_kind = detail::require(base, "kind", ctx + ": bundle.base").get<std::string>();
  int base_dim = 0;
  bool sphere_base = false;
  if (base_kind == "Rn") {
    base_dim = detail::require(base, "dim", ctx + ": bundle.base").get<int>();
  } else if (base_kind == "sphere") {
    base_dim = 2;
    sphere_base = true;
  } else {
    throw config_error(ctx + ": bundle.base.kind must be 'Rn' or 'sphere'");
  }

  const auto& fiber = detail::require(cfg.bundle, "fiber", ctx + ": bundle");
  const std::string fiber_kind =
      detail::require(fiber, "kind", ctx + ": bundle.fiber").get<std::string>();
  if (fiber_kind == "vector") {
    setup.bundle = BundleModel::vector_bundle(base_dim, detail::require(fiber, "dim", ctx).get<int>());
  } else if (fiber_kind == "group") {
    setup.bundle = BundleModel::group_bundle(
        base_dim, detail::parse_group(detail::require(fiber, "id", ctx), ctx));
  } else if (fiber_kind == "foliation") {
    const int k = detail::get_or(fiber, "dim", 1);
    const std::string sigma = detail::get_or(fiber, "sigma", std::string("linear"));
    setup.foliation = FoliationModel::section_offsets(
        base_dim, k, detail::parse_sigma(sigma, base_dim, k, ctx), "sigma-" + sigma);
    setup.bundle = setup.foliation->bundle;
  } else if (fiber_kind == "labels") {
    setup.bundle = BundleModel::label_bundle(base_dim, detail::require(fiber, "count", ctx).get<int>());
  } else {
    throw config_error(ctx + ": unknown fibre kind '" + fiber_kind + "'");
  }
  if (sphere_base) setup.bundle.chart = [](const Vec& x) { return x[0] > 0.0 && x[0] < M_PI; };

  // Paths.
  for (const auto& p : cfg.path_specs) {
    PathSpec path = detail::parse_path(p, ctx + ": paths");
    if (path.space_dim != base_dim)
      throw config_error(ctx + ": path '" + path.id + "' has dimension " +
                         std::to_string(path.space_dim) + ", base has " + std::to_string(base_dim));
    setup.path_index[path.id] = setup.paths.size();
    setup.paths.push_back(std::move(path));
  }

  // Backend.
  const std::string backend_kind =
      detail::require(cfg.backend, "kind", ctx + ": backend").get<std::string>();
  OdeOptions ode{cfg.ode_step};
  if (backend_kind == "connection") {
    const auto& cj = detail::require(cfg.backend, "connection", ctx + ": backend");
    const std::string ck = detail::require(cj, "kind", ctx + ": backend.connection").get<std::string>();
    if (ck == "christoffel") {
      const std::string chart = detail::require(cj, "chart", ctx).get<std::string>();
      if (chart == "flat")
        setup.connection = ConnectionModel::flat(base_dim, setup.bundle.fiber_dim);
      else if (chart == "sphere")
        setup.connection = ConnectionModel::levi_civita_sphere();
      else
        throw config_error(ctx + ": unknown christoffel chart '" + chart + "'");
    } else if (ck == "principal") {
      const GroupModel g = detail::parse_group(detail::require(cj, "group", ctx), ctx);
      const std::string form = detail::require(cj, "form", ctx).get<std::string>();
      std::vector<double> params;
      if (cj.contains("params"))
        for (const auto& v : cj.at("params")) params.push_back(v.get<double>());
      if (g.id != GroupId::U1)
        throw config_error(ctx + ": principal forms are provided for U1 only");
      if (form == "uniform")
        setup.connection = ConnectionModel::u1_uniform(params.empty() ? 1.0 : params[0]);
      else if (form == "area-law")
        setup.connection = ConnectionModel::u1_area_law(params.empty() ? 0.5 : params[0]);
      else
        throw config_error(ctx + ": unknown principal form '" + form + "'");
    } else {
      throw config_error(ctx + ": unknown connection kind '" + ck + "'");
    }
    setup.bundle = setup.connection->bundle();
    setup.transport = transport_from_connection(*setup.connection, ode);
    setup.tolerance = cfg.tol_ode;
  } else if (backend_kind == "group-left" || backend_kind == "group-right") {
    if (setup.bundle.fiber_kind != FiberKind::group)
      throw config_error(ctx + ": group backends need a group fibre");
    const auto& fj = detail::require(cfg.backend, "f", ctx + ": backend");
    const std::string fk = detail::require(fj, "kind", ctx + ": backend.f").get<std::string>();
    const GroupModel g = *setup.bundle.group;
    PathFunctional f = [&]() {
      if (fk == "constant") {
        if (fj.contains("angle")) return PathFunctional::constant(g, g.rotation(fj.at("angle").get<double>()));
        return PathFunctional::constant(g, g.identity());
      }
      const double rate = detail::get_or(fj, "rate", 1.0);
      if (fk == "field") return PathFunctional::coordinate_rotation_field(g, rate);
      if (fk == "parametric") return PathFunctional::parametric_rotation(g, rate);
      if (fk == "arclength") return PathFunctional::arclength_rotation(g, rate);
      if (fk == "domain-span") return PathFunctional::domain_span_rotation(g, rate);
      throw config_error(ctx + ": unknown path functional '" + fk + "'");
    }();
    setup.transport = backend_kind == "group-left" ? group_transport_left(std::move(f), base_dim)
                                                   : group_transport_right(std::move(f), base_dim);
    setup.tolerance = cfg.tol_algebraic;
  } else if (backend_kind == "foliation") {
    if (!setup.foliation) throw config_error(ctx + ": foliation backend needs a foliation fibre");
    setup.transport = foliation_transport(*setup.foliation);
    setup.tolerance = cfg.tol_algebraic;
  } else if (backend_kind == "permutation") {
    if (setup.bundle.fiber_kind != FiberKind::label)
      throw config_error(ctx + ": permutation backend needs a label fibre");
    if (setup.paths.empty()) throw config_error(ctx + ": permutation backend needs a path");
    std::vector<double> grid;
    if (cfg.backend.contains("grid"))
      for (const auto& v : cfg.backend.at("grid")) grid.push_back(v.get<double>());
    else
      grid = setup.paths.front().domain.grid(cfg.grid);
    std::mt19937 rng = seeded_rng(detail::get_or(cfg.backend, "seed", cfg.seed));
    setup.transport = transport_from_bijections(
        setup.paths.front(), setup.bundle.fiber_dim,
        BijectionFamily::random(setup.bundle.fiber_dim, std::move(grid), rng));
    setup.tolerance = cfg.tol_algebraic;
  } else {
    throw config_error(ctx + ": unknown backend kind '" + backend_kind + "'");
  }

  setup.opts.tolerance = setup.tolerance;
  setup.opts.fibre_samples = cfg.fibre_samples;
  setup.opts.seed = cfg.seed;
  return setup;
}

}  // namespace translift
