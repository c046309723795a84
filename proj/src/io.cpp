#include "billiards/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace billiards {

std::string digest64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

namespace {

Json vec_to_json(const Vec& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const Json& a) {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

}  // namespace

Json orbit_to_json(const CriticalOrbit& orbit) {
  Json j;
  j["n"] = orbit.config.n();
  j["length"] = orbit.length;
  j["grad_residual"] = orbit.grad_residual;
  j["canonical_key"] = orbit.canonical_key;
  if (orbit.rotation_number)
    j["rotation_number"] = *orbit.rotation_number;
  else
    j["rotation_number"] = nullptr;
  Json pts = Json::array();
  for (const SurfacePoint& p : orbit.config.points) pts.push_back(vec_to_json(p.coords));
  j["points"] = pts;
  return j;
}

CriticalOrbit orbit_from_json(const ConvexBody& body, const Json& j) {
  std::vector<SurfacePoint> pts;
  for (const Json& p : j.at("points"))
    pts.push_back(make_surface_point(body, vec_from_json(p)));
  return make_orbit(body, make_configuration(body, std::move(pts)));
}

Json iteration_report_to_json(const IterationReport& report) {
  Json j;
  j["base"] = orbit_to_json(report.base);
  j["mean_ind"] = report.mean.avind;
  j["mean_coind"] = report.mean.avcoind;
  j["quadrature_fallback"] = report.mean.quadrature_fallback;
  j["all_ok"] = report.all_ok;
  Json rows = Json::array();
  for (const IterationRow& r : report.rows) {
    Json row;
    row["m"] = r.m;
    row["ind"] = r.direct.ind;
    row["coind"] = r.direct.coind;
    row["nul"] = r.direct.nul;
    row["bott_ind"] = r.bott.ind;
    row["bott_coind"] = r.bott.coind;
    row["bott_nul"] = r.bott.nul;
    row["verdicts"] = {{"bott_match", r.bott_match},
                       {"nul_bound", r.nul_bound_ok},
                       {"ind_chain", r.ind_chain_ok},
                       {"coind_chain", r.coind_chain_ok},
                       {"limit_law", r.limit_law_ok}};
    row["hypothesis_coind_nul_preserved"] = r.hypothesis_preserved;
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

void write_orbits_json(const std::string& path, const std::string& digest,
                       const ConvexBody& body,
                       const std::vector<CriticalOrbit>& orbits) {
  Json j;
  j["run_config_digest"] = digest;
  j["body"] = body.name();
  Json arr = Json::array();
  for (const CriticalOrbit& o : orbits) arr.push_back(orbit_to_json(o));
  j["orbits"] = arr;
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open output file " + path);
  out << j.dump(2) << '\n';
}

std::vector<CriticalOrbit> read_orbits_json(const ConvexBody& body,
                                            const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open orbit file " + path);
  Json j;
  in >> j;
  std::vector<CriticalOrbit> orbits;
  for (const Json& rec : j.at("orbits")) orbits.push_back(orbit_from_json(body, rec));
  return orbits;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open output file " + path);
  for (const std::string& line : table.metadata) out << "# " << line << '\n';
  out << table.header << '\n';
  for (const std::string& row : table.rows) out << row << '\n';
}

std::string index_row(int m, Cplx z, const IndexTriple& t,
                      const std::string& source) {
  std::ostringstream row;
  row << std::setprecision(17);
  row << m << ',' << z.real() << ',' << z.imag() << ',' << t.ind << ','
      << t.coind << ',' << t.nul << ',' << source;
  return row.str();
}

}  // namespace billiards
