// Command-line front end: orbit search, index tables, iteration reports,
// configuration-space topology utilities and a plane Birkhoff sweep.
//
// Exit codes: 0 success, 2 nothing found, 3 property violation, 4 input error.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "billiards/io.hpp"

namespace billiards {
namespace {

struct RunConfig {
  std::string command;
  std::string body = "circle 1";
  int n = 2;
  std::vector<int> m_list = {1, 2, 3, 4, 5, 6, 7, 8};
  int seeds = 16;
  std::string strategy = "both";  // structured | random | both
  std::uint64_t rng_seed = 1;
  std::string mode = "both";  // maximize | newton | both
  double tol_critical = kTolCritical;

  std::vector<double> start;
  std::vector<double> direction;
  int bounces = 4;
  int check_period = 0;

  std::string orbits_file;
  int orbit_index = -1;  // -1 means every orbit in the file
  int z_samples = 16;

  std::string topo_op;
  std::vector<std::int64_t> topo_args;
  int bangert_m = 10;
  int bangert_samples = 64;
  std::string bangert_path = "circle-triangle";

  std::string pairs = "3:1,4:1,5:1,5:2";
  std::string out = "out";
};

Json run_config_json(const RunConfig& rc) {
  Json j;
  j["command"] = rc.command;
  j["body"] = rc.body;
  j["n"] = rc.n;
  j["m_list"] = rc.m_list;
  j["seeds"] = rc.seeds;
  j["strategy"] = rc.strategy;
  j["rng_seed"] = rc.rng_seed;
  j["mode"] = rc.mode;
  j["tol_critical"] = rc.tol_critical;
  j["start"] = rc.start;
  j["direction"] = rc.direction;
  j["bounces"] = rc.bounces;
  j["check_period"] = rc.check_period;
  j["orbits_file"] = rc.orbits_file;
  j["orbit_index"] = rc.orbit_index;
  j["z_samples"] = rc.z_samples;
  j["topo_op"] = rc.topo_op;
  j["topo_args"] = rc.topo_args;
  j["bangert_m"] = rc.bangert_m;
  j["bangert_samples"] = rc.bangert_samples;
  j["bangert_path"] = rc.bangert_path;
  j["pairs"] = rc.pairs;
  j["out"] = rc.out;
  return j;
}

void apply_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file " + path);
  Json j;
  in >> j;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("body", rc.body);
  get("n", rc.n);
  get("m_list", rc.m_list);
  get("seeds", rc.seeds);
  get("strategy", rc.strategy);
  get("rng_seed", rc.rng_seed);
  get("mode", rc.mode);
  get("tol_critical", rc.tol_critical);
  get("start", rc.start);
  get("direction", rc.direction);
  get("bounces", rc.bounces);
  get("check_period", rc.check_period);
  get("orbits_file", rc.orbits_file);
  get("orbit_index", rc.orbit_index);
  get("z_samples", rc.z_samples);
  get("bangert_m", rc.bangert_m);
  get("bangert_samples", rc.bangert_samples);
  get("bangert_path", rc.bangert_path);
  get("pairs", rc.pairs);
  get("out", rc.out);
}

Vec to_vec(const std::vector<double>& v) {
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
  return out;
}

FindResult run_find(const ConvexBody& body, const RunConfig& rc) {
  SeedOptions seed_opt;
  seed_opt.random_count = rc.strategy == "structured" ? 0 : rc.seeds;
  seed_opt.structured = rc.strategy != "random";
  seed_opt.rng_seed = rc.rng_seed;
  std::vector<Configuration> seeds = make_seeds(body, rc.n, seed_opt);

  SolveOptions solve_opt;
  solve_opt.tol_critical = rc.tol_critical;

  std::vector<CriticalOrbit> all;
  std::vector<SolveFailure> failures;
  auto run_mode = [&](SolveMode mode) {
    FindResult r = find_critical(body, rc.n, seeds, mode, solve_opt);
    all.insert(all.end(), r.orbits.begin(), r.orbits.end());
    failures.insert(failures.end(), r.failures.begin(), r.failures.end());
  };
  if (rc.mode == "maximize" || rc.mode == "both") run_mode(SolveMode::maximize);
  if (rc.mode == "newton" || rc.mode == "both") run_mode(SolveMode::newton);

  std::sort(all.begin(), all.end(),
            [](const CriticalOrbit& a, const CriticalOrbit& b) {
              if (a.length != b.length) return a.length < b.length;
              return a.canonical_key < b.canonical_key;
            });
  FindResult merged;
  merged.failures = std::move(failures);
  for (const CriticalOrbit& cand : all) {
    bool fresh = true;
    for (const CriticalOrbit& kept : merged.orbits)
      if (!distinct(kept, cand)) {
        fresh = false;
        break;
      }
    if (fresh) merged.orbits.push_back(cand);
  }
  return merged;
}

std::vector<CriticalOrbit> load_orbits(const ConvexBody& body,
                                       const RunConfig& rc) {
  std::vector<CriticalOrbit> orbits;
  if (!rc.orbits_file.empty())
    orbits = read_orbits_json(body, rc.orbits_file);
  else
    orbits = run_find(body, rc).orbits;
  if (orbits.empty()) throw DomainError("no orbits to analyze");
  if (rc.orbit_index >= 0) {
    if (rc.orbit_index >= static_cast<int>(orbits.size()))
      throw DomainError("orbit index out of range");
    return {orbits[rc.orbit_index]};
  }
  return orbits;
}

int cmd_simulate(const RunConfig& rc, const std::string& digest) {
  ConvexBody body = make_body(rc.body);
  if (static_cast<int>(rc.start.size()) != body.ambient_dim() ||
      static_cast<int>(rc.direction.size()) != body.ambient_dim())
    throw DomainError("--start/--dir must match the body's ambient dimension");
  SurfacePoint p0 = project_to_surface(body, to_vec(rc.start));
  Vec d0 = to_vec(rc.direction).normalized();
  std::vector<SurfacePoint> trace = billiard_flow(body, p0, d0, rc.bounces);

  CsvTable table;
  table.metadata.push_back("run_config_digest " + digest);
  table.metadata.push_back("body " + body.name());
  if (rc.check_period > 0) {
    double dev = 0.0;
    for (size_t j = 0; j + rc.check_period < trace.size(); ++j)
      dev = std::max(dev, (trace[j + rc.check_period].coords - trace[j].coords)
                              .norm());
    std::ostringstream line;
    line << std::setprecision(17) << "max_period_deviation " << dev;
    table.metadata.push_back(line.str());
    std::cout << line.str() << '\n';
  }
  std::ostringstream header;
  header << "bounce";
  for (int i = 0; i < body.ambient_dim(); ++i) header << ",x" << i;
  table.header = header.str();
  for (size_t j = 0; j < trace.size(); ++j) {
    std::ostringstream row;
    row << std::setprecision(17) << j;
    for (int i = 0; i < body.ambient_dim(); ++i) row << ',' << trace[j].coords[i];
    table.rows.push_back(row.str());
  }
  write_csv(rc.out, table);
  std::cout << "wrote " << trace.size() << " bounce points to " << rc.out << '\n';
  return 0;
}

int cmd_find(const RunConfig& rc, const std::string& digest) {
  ConvexBody body = make_body(rc.body);
  FindResult result = run_find(body, rc);
  for (const SolveFailure& f : result.failures)
    std::cerr << "seed " << f.seed_index << ": " << f.reason << '\n';
  write_orbits_json(rc.out, digest, body, result.orbits);
  std::cout << "found " << result.orbits.size() << " distinct orbit(s)";
  if (!result.orbits.empty()) {
    std::cout << ", lengths:";
    for (const CriticalOrbit& o : result.orbits)
      std::cout << ' ' << std::setprecision(12) << o.length;
  }
  std::cout << '\n';
  return result.orbits.empty() ? 2 : 0;
}

int cmd_indices(const RunConfig& rc, const std::string& digest) {
  ConvexBody body = make_body(rc.body);
  std::vector<CriticalOrbit> orbits = load_orbits(body, rc);

  CsvTable table;
  table.metadata.push_back("run_config_digest " + digest);
  table.metadata.push_back("body " + body.name());
  table.header = "m,z_re,z_im,ind,coind,nul,source";
  bool crosscheck_ok = true;

  for (size_t oi = 0; oi < orbits.size(); ++oi) {
    const CriticalOrbit& orbit = orbits[oi];
    HessianOperator H = assemble_hessian(body, orbit.config, false,
                                         std::max(rc.tol_critical, 1e-8));
    Monodromy mono = monodromy(H);
    MeanIndex mean = mean_index(H, mono);
    SemicontinuityReport scan = semicontinuity_scan(H);

    std::ostringstream meta;
    meta << std::setprecision(17) << "orbit " << oi << " n " << orbit.config.n()
         << " length " << orbit.length << " avind " << mean.avind
         << " avcoind " << mean.avcoind
         << (mean.quadrature_fallback ? " quadrature_fallback" : "");
    table.metadata.push_back(meta.str());
    int nul_sum = 0;
    for (const PoincarePoint& p : mono.poincare_points) {
      std::ostringstream pp;
      pp << std::setprecision(17) << "orbit " << oi << " poincare_point "
         << p.z.real() << ' ' << p.z.imag() << " nullity " << p.nullity;
      table.metadata.push_back(pp.str());
      nul_sum += p.nullity;
    }
    table.metadata.push_back("orbit " + std::to_string(oi) +
                             " poincare_nullity_sum " + std::to_string(nul_sum));
    table.metadata.push_back(
        "orbit " + std::to_string(oi) + " semicontinuity arc_constancy=" +
        std::to_string(scan.arc_constancy) + " jump_bounds=" +
        std::to_string(scan.jump_bounds) + " inconclusive=" +
        std::to_string(scan.inconclusive_count));

    for (int k = 0; k < rc.z_samples; ++k) {
      Cplx z = std::polar(1.0, 2.0 * M_PI * k / rc.z_samples);
      IndexTriple t = index_triple(twisted_hessian(H, z));
      table.rows.push_back(index_row(1, z, t, "direct"));
      if (t.nul != monodromy_nullity(mono, z)) crosscheck_ok = false;
    }
    for (const PoincarePoint& p : mono.poincare_points) {
      IndexTriple t = index_triple(twisted_hessian(H, p.z));
      table.rows.push_back(index_row(1, p.z, t, "direct"));
    }
    if (nul_sum > 2 * body.surface_dim()) crosscheck_ok = false;
  }
  write_csv(rc.out, table);
  std::cout << "wrote index table for " << orbits.size() << " orbit(s) to "
            << rc.out << '\n';
  if (!crosscheck_ok) {
    std::cerr << "property violation: twisted nullity / monodromy kernel mismatch\n";
    return 3;
  }
  return 0;
}

int cmd_iterate(const RunConfig& rc, const std::string& digest) {
  ConvexBody body = make_body(rc.body);
  std::vector<CriticalOrbit> orbits = load_orbits(body, rc);

  Json out_json;
  out_json["run_config_digest"] = digest;
  out_json["body"] = body.name();
  Json reports = Json::array();
  int exit_code = 0;
  std::string failing;
  for (size_t oi = 0; oi < orbits.size(); ++oi) {
    IterationReport report = iteration_report(body, orbits[oi], rc.m_list);
    reports.push_back(iteration_report_to_json(report));
    for (const IterationRow& row : report.rows) {
      if (!row.bott_match || !row.nul_bound_ok || !row.ind_chain_ok ||
          !row.coind_chain_ok || !row.limit_law_ok) {
        exit_code = 3;
        if (failing.empty())
          failing = "orbit " + std::to_string(oi) + " m " + std::to_string(row.m);
      }
    }
  }
  out_json["reports"] = reports;
  std::ofstream out(rc.out);
  if (!out) throw DomainError("cannot open output file " + rc.out);
  out << out_json.dump(2) << '\n';
  if (exit_code == 3)
    std::cerr << "property violation at " << failing << '\n';
  else
    std::cout << "all iteration verdicts hold for " << orbits.size()
              << " orbit(s)\n";
  return exit_code;
}

Configuration circle_triangle(const ConvexBody& circle, double s) {
  double delta = 0.15 + s * (M_PI / 3.0 - 0.15);
  std::vector<SurfacePoint> pts;
  for (double angle : {0.0, M_PI - delta, M_PI + delta})
    pts.push_back(surface_point_in_direction(circle, Vec(Eigen::Vector2d(
                                                  std::cos(angle), std::sin(angle)))));
  return make_configuration(circle, std::move(pts));
}

Configuration circle_pentagon(const ConvexBody& circle, double s) {
  std::vector<SurfacePoint> pts;
  for (int j = 0; j < 5; ++j) {
    double angle = 2.0 * M_PI * j / 5.0 + 0.35 * s * std::sin(2.0 * M_PI * j / 5.0 + 1.0);
    pts.push_back(surface_point_in_direction(circle, Vec(Eigen::Vector2d(
                                                  std::cos(angle), std::sin(angle)))));
  }
  return make_configuration(circle, std::move(pts));
}

Configuration sphere_triangle(const ConvexBody& sphere, double s) {
  double tilt = 0.7 * s;
  std::vector<SurfacePoint> pts;
  for (int j = 0; j < 3; ++j) {
    double angle = 2.0 * M_PI * j / 3.0;
    Eigen::Vector3d u(std::cos(angle), std::sin(angle) * std::cos(tilt),
                      std::sin(angle) * std::sin(tilt));
    pts.push_back(surface_point_in_direction(sphere, Vec(u)));
  }
  return make_configuration(sphere, std::move(pts));
}

int cmd_topology(const RunConfig& rc, const std::string& digest) {
  if (rc.topo_op == "betti" || rc.topo_op == "equivariant" ||
      rc.topo_op == "equivariant-rank-sum") {
    if (rc.topo_args.size() != 2)
      throw DomainError("usage: topology " + rc.topo_op + " N n");
    int N = static_cast<int>(rc.topo_args[0]);
    int n = static_cast<int>(rc.topo_args[1]);
    if (rc.topo_op == "betti") {
      PoincarePolynomial p = betti_polynomial(N, n);
      if (!(p == betti_polynomial_rational(N, n)))
        throw DomainError("factored and rational forms disagree");
      std::cout << p.to_string() << '\n';
    } else if (rc.topo_op == "equivariant") {
      PoincarePolynomial p = equivariant_polynomial(N, n);
      if (!(p == equivariant_polynomial_rational(N, n)))
        throw DomainError("factored and rational forms disagree");
      std::cout << p.to_string() << '\n';
    } else {
      std::cout << equivariant_rank_sum(N, n) << '\n';
    }
    return 0;
  }
  if (rc.topo_op == "bangert") {
    ConvexBody circle = make_body("circle 1");
    ConvexBody sphere = make_body("sphere 1");
    std::function<Configuration(double)> path;
    if (rc.bangert_path == "circle-triangle")
      path = [&circle](double s) { return circle_triangle(circle, s); };
    else if (rc.bangert_path == "circle-pentagon")
      path = [&circle](double s) { return circle_pentagon(circle, s); };
    else if (rc.bangert_path == "sphere-triangle")
      path = [&sphere](double s) { return sphere_triangle(sphere, s); };
    else
      throw DomainError("unknown bangert path '" + rc.bangert_path + "'");

    BangertPath lift =
        bangert_lift(path, 0.0, 1.0, rc.bangert_samples, rc.bangert_m);
    BangertCheck check = verify_bangert_estimate(lift);
    CsvTable table;
    table.metadata.push_back("run_config_digest " + digest);
    table.metadata.push_back("path " + rc.bangert_path + " m " +
                             std::to_string(rc.bangert_m));
    table.header = "x,lifted_length,bound";
    for (const BangertCheckRow& row : check.rows) {
      std::ostringstream line;
      line << std::setprecision(17) << row.x << ',' << row.lifted_length << ','
           << row.bound;
      table.rows.push_back(line.str());
    }
    write_csv(rc.out, table);
    std::cout << (check.pass ? "PASS" : "FAIL")
              << " lifted length >= (m-3) * min endpoint length\n";
    return check.pass ? 0 : 3;
  }
  throw DomainError("unknown topology operation '" + rc.topo_op + "'");
}

int cmd_birkhoff(const RunConfig& rc, const std::string& digest) {
  ConvexBody body = make_body(rc.body);
  if (body.ambient_dim() != 2)
    throw DomainError("birkhoff sweep needs a plane body");

  std::vector<std::pair<int, int>> pairs;
  std::stringstream in(rc.pairs);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos)
      throw DomainError("pairs must look like 3:1,5:2");
    pairs.emplace_back(std::stoi(item.substr(0, colon)),
                       std::stoi(item.substr(colon + 1)));
  }

  CsvTable table;
  table.metadata.push_back("run_config_digest " + digest);
  table.metadata.push_back("body " + body.name());
  table.header = "n,r,distinct_orbits,min_length,max_length";
  bool all_found = true;
  for (auto [n, r] : pairs) {
    if (std::gcd(n, r) != 1 || r < 1 || 2 * r > n)
      throw DomainError("pair " + std::to_string(n) + ":" + std::to_string(r) +
                        " is not an admissible coprime pair");
    RunConfig sub = rc;
    sub.n = n;
    FindResult result = run_find(body, sub);
    std::vector<const CriticalOrbit*> matching;
    for (const CriticalOrbit& o : result.orbits)
      if (o.rotation_number && *o.rotation_number == r)
        matching.push_back(&o);
    double lo = 0.0, hi = 0.0;
    if (!matching.empty()) {
      lo = matching.front()->length;
      hi = matching.back()->length;
      for (const CriticalOrbit* o : matching) {
        lo = std::min(lo, o->length);
        hi = std::max(hi, o->length);
      }
    }
    std::ostringstream row;
    row << std::setprecision(17) << n << ',' << r << ',' << matching.size()
        << ',' << lo << ',' << hi;
    table.rows.push_back(row.str());
    if (matching.size() < 2) all_found = false;
  }
  write_csv(rc.out, table);
  std::cout << (all_found ? "every pair has >= 2 distinct orbits"
                          : "some pair is missing its second orbit")
            << '\n';
  return all_found ? 0 : 2;
}

int dispatch(RunConfig& rc) {
  std::string digest = digest64(run_config_json(rc).dump());
  if (rc.command == "simulate") return cmd_simulate(rc, digest);
  if (rc.command == "find") return cmd_find(rc, digest);
  if (rc.command == "indices") return cmd_indices(rc, digest);
  if (rc.command == "iterate") return cmd_iterate(rc, digest);
  if (rc.command == "topology") return cmd_topology(rc, digest);
  if (rc.command == "birkhoff") return cmd_birkhoff(rc, digest);
  throw DomainError("unknown command " + rc.command);
}

}  // namespace
}  // namespace billiards

int main(int argc, char** argv) {
  using namespace billiards;
  RunConfig rc;

  // The config file provides defaults; explicit flags win.
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") {
      try {
        apply_config_file(rc, argv[i + 1]);
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 4;
      }
    }

  CLI::App app{"Periodic billiard trajectories in convex bodies: search, "
               "Morse index tables, iteration theory, configuration-space "
               "topology."};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file with defaults");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--body", rc.body, "body spec, e.g. 'ellipse 2 1'");
    cmd->add_option("--out", rc.out, "output file path");
    cmd->add_option("--rng-seed", rc.rng_seed, "deterministic RNG seed");
    cmd->add_option("--tol-critical", rc.tol_critical, "gradient residual tolerance");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "trace a billiard flow");
  add_common(simulate);
  simulate->add_option("--start", rc.start, "start point (projected to the surface)")
      ->delimiter(',');
  simulate->add_option("--dir", rc.direction, "initial direction")->delimiter(',');
  simulate->add_option("--bounces", rc.bounces, "number of bounces");
  simulate->add_option("--check-period", rc.check_period,
                       "report max deviation from the given period");

  CLI::App* find = app.add_subcommand("find", "find periodic orbits");
  add_common(find);
  find->add_option("--n", rc.n, "number of bounce points");
  find->add_option("--seeds", rc.seeds, "number of random seeds");
  find->add_option("--strategy", rc.strategy, "structured | random | both");
  find->add_option("--mode", rc.mode, "maximize | newton | both");

  CLI::App* indices = app.add_subcommand("indices", "twisted index tables");
  add_common(indices);
  indices->add_option("--n", rc.n, "period when searching orbits inline");
  indices->add_option("--orbits", rc.orbits_file, "orbit JSON from 'find'");
  indices->add_option("--orbit-index", rc.orbit_index, "restrict to one orbit");
  indices->add_option("--z-samples", rc.z_samples, "unit-circle sample count");
  indices->add_option("--seeds", rc.seeds, "number of random seeds");
  indices->add_option("--mode", rc.mode, "maximize | newton | both");

  CLI::App* iterate_cmd = app.add_subcommand("iterate", "iteration report");
  add_common(iterate_cmd);
  iterate_cmd->add_option("--n", rc.n, "period when searching orbits inline");
  iterate_cmd->add_option("--orbits", rc.orbits_file, "orbit JSON from 'find'");
  iterate_cmd->add_option("--orbit-index", rc.orbit_index, "restrict to one orbit");
  iterate_cmd->add_option("--m-list", rc.m_list, "iteration orders")->delimiter(',');
  iterate_cmd->add_option("--seeds", rc.seeds, "number of random seeds");
  iterate_cmd->add_option("--mode", rc.mode, "maximize | newton | both");

  CLI::App* topology = app.add_subcommand("topology", "polynomials and path lifts");
  add_common(topology);
  topology->add_option("op", rc.topo_op,
                       "betti | equivariant | equivariant-rank-sum | bangert");
  topology->add_option("args", rc.topo_args, "N n for the polynomial ops");
  topology->add_option("--m", rc.bangert_m, "lift order");
  topology->add_option("--samples", rc.bangert_samples, "path sample count");
  topology->add_option("--path", rc.bangert_path,
                       "circle-triangle | circle-pentagon | sphere-triangle");

  CLI::App* birkhoff = app.add_subcommand("birkhoff", "plane (n, r) sweep");
  add_common(birkhoff);
  birkhoff->add_option("--pairs", rc.pairs, "comma list like 3:1,5:2");
  birkhoff->add_option("--seeds", rc.seeds, "number of random seeds");
  birkhoff->add_option("--mode", rc.mode, "maximize | newton | both");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 4;
  }

  rc.command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(rc);
  } catch (const GrazingRay& e) {
    std::cerr << "GrazingRay: " << e.what() << '\n';
    return 4;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 4;
  } catch (const InvalidBody& e) {
    std::cerr << "invalid body: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
