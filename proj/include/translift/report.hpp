#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "translift/connection.hpp"
#include "translift/parallel.hpp"
#include "translift/transport.hpp"

namespace translift {

using json = nlohmann::json;

inline json to_json(const Witness& w) {
  return json{{"path", w.path_id}, {"r", w.r}, {"s", w.s}, {"t", w.t}, {"residual", w.residual}};
}

inline json to_json(const LawReport& r) {
  json witnesses = json::array();
  for (const Witness& w : r.witnesses) witnesses.push_back(to_json(w));
  return json{{"law", r.law},
              {"samples", r.samples},
              {"max_residual", r.max_residual},
              {"tolerance", r.tolerance},
              {"pass", r.pass},
              {"witnesses", witnesses}};
}

inline json to_json(const SuiteReport& s) {
  json laws = json::array();
  for (const LawReport& r : s.laws) laws.push_back(to_json(r));
  return json{{"laws", laws}, {"pass", s.pass}, {"max_residual", s.max_residual}};
}

inline json to_json(const AxiomReport& a) {
  json axioms = json::array();
  for (const LawReport* r : a.laws()) axioms.push_back(to_json(*r));
  return json{{"axioms", axioms}, {"pass", a.pass()}, {"max_residual", a.max_residual()}};
}

inline json to_json(const FiberElement& u) {
  json payload;
  switch (u.kind()) {
    case FiberKind::vector: {
      payload = json::array();
      for (Eigen::Index i = 0; i < u.vec().size(); ++i) payload.push_back(u.vec()[i]);
      break;
    }
    case FiberKind::group: {
      payload = json::array();
      for (Eigen::Index r = 0; r < u.mat().rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < u.mat().cols(); ++c) row.push_back(u.mat()(r, c));
        payload.push_back(row);
      }
      break;
    }
    case FiberKind::label: payload = u.label(); break;
  }
  json base = json::array();
  for (Eigen::Index i = 0; i < u.base.size(); ++i) base.push_back(u.base[i]);
  return json{{"base", base}, {"payload", payload}, {"kind", to_string(u.kind())}};
}

inline FiberElement element_from_json(const json& j, const FibreDescriptor& fibre) {
  const json& payload = j.is_object() && j.contains("payload") ? j.at("payload") : j;
  switch (fibre.kind) {
    case FiberKind::vector: {
      Vec v(fibre.dim);
      if (!payload.is_array() || static_cast<int>(payload.size()) != fibre.dim)
        throw config_error("fibre element: expected a vector of length " + std::to_string(fibre.dim));
      for (int i = 0; i < fibre.dim; ++i) v[i] = payload.at(static_cast<std::size_t>(i)).get<double>();
      return fibre.vector_element(std::move(v));
    }
    case FiberKind::group: {
      if (payload.is_string() && payload.get<std::string>() == "identity")
        return fibre.group_element(fibre.group->identity());
      Mat m(fibre.dim, fibre.dim);
      if (!payload.is_array() || static_cast<int>(payload.size()) != fibre.dim)
        throw config_error("fibre element: expected a " + std::to_string(fibre.dim) + "x" +
                           std::to_string(fibre.dim) + " matrix");
      for (int r = 0; r < fibre.dim; ++r)
        for (int c = 0; c < fibre.dim; ++c)
          m(r, c) = payload.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
      return fibre.group_element(std::move(m));
    }
    case FiberKind::label: return fibre.label_element(payload.get<int>());
  }
  throw config_error("fibre element: unknown fibre kind");
}

inline json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

// Machine-readable run report. Timing is deliberately kept out of the
// serialized form so that a fixed config and seed reproduce the bytes
// exactly; wall-clock numbers go to the console instead.
struct RunReport {
  json config_echo;
  std::vector<json> checks;
  bool all_pass = true;
  double worst_residual = 0.0;

  void add_check(const std::string& id, json payload, bool pass, double residual) {
    payload["id"] = id;
    payload["pass"] = pass;
    checks.push_back(std::move(payload));
    all_pass = all_pass && pass;
    worst_residual = std::max(worst_residual, residual);
  }

  json to_json() const {
    json summary = json::array();
    for (const json& c : checks)
      summary.push_back(json{{"id", c.at("id")},
                             {"pass", c.at("pass")},
                             {"max_residual", c.contains("max_residual") ? c.at("max_residual") : json()}});
    return json{{"schema", "translift-report/1"},
                {"config", config_echo},
                {"checks", checks},
                {"summary", summary},
                {"pass", all_pass}};
  }

  std::string dump() const { return to_json().dump(2) + "\n"; }
};

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open output file: " + path);
  out << content;
}

inline std::string csv_of_lift(const LiftedPath& lift) {
  std::ostringstream out;
  out.precision(17);
  out << "t";
  const int n = static_cast<int>(lift.base.space_dim);
  for (int i = 0; i < n; ++i) out << ",base" << i;
  const Vec first = total_coords(lift.samples.front());
  for (Eigen::Index i = n; i < first.size(); ++i) out << ",fibre" << (i - n);
  out << "\n";
  for (std::size_t k = 0; k < lift.params.size(); ++k) {
    out << lift.params[k];
    const Vec c = total_coords(lift.samples[k]);
    for (Eigen::Index i = 0; i < c.size(); ++i) out << "," << c[i];
    out << "\n";
  }
  return out.str();
}

struct TransportRow {
  std::string path_id;
  double s = 0.0, t = 0.0;
  FiberElement input;
  FiberElement output;
};

inline std::string csv_of_transports(const std::vector<TransportRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "path,s,t,input,output\n";
  for (const TransportRow& r : rows) {
    auto flat = [](const FiberElement& u) {
      std::ostringstream cell;
      cell.precision(17);
      if (u.kind() == FiberKind::label) {
        cell << u.label();
      } else {
        const Vec c = total_coords(u);
        for (Eigen::Index i = static_cast<Eigen::Index>(u.base.size()); i < c.size(); ++i) {
          if (i > static_cast<Eigen::Index>(u.base.size())) cell << ";";
          cell << c[i];
        }
      }
      return cell.str();
    };
    out << r.path_id << "," << r.s << "," << r.t << "," << flat(r.input) << "," << flat(r.output)
        << "\n";
  }
  return out.str();
}

}  // namespace translift
