#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

struct RunOutput {
  int exit_code = 0;
  std::string stdout_text;
  std::string stderr_text;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

RunOutput run_cli(const std::string& args) {
  std::string out_path = "cli_stdout.txt";
  std::string err_path = "cli_stderr.txt";
  std::string cmd = std::string(BILLIARDS_CLI_PATH) + " " + args + " > " +
                    out_path + " 2> " + err_path;
  int status = std::system(cmd.c_str());
  RunOutput result;
  result.exit_code = WEXITSTATUS(status);
  result.stdout_text = slurp(out_path);
  result.stderr_text = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return result;
}

std::vector<double> csv_lengths(const std::string& json_path) {
  std::ifstream in(json_path);
  nlohmann::json j;
  in >> j;
  std::vector<double> lengths;
  for (const auto& orbit : j.at("orbits"))
    lengths.push_back(orbit.at("length").get<double>());
  return lengths;
}

bool contains_length(const std::vector<double>& lengths, double target,
                     double tol = 1e-8) {
  for (double l : lengths)
    if (std::abs(l - target) <= tol) return true;
  return false;
}

}  // namespace

TEST_CASE("simulate traces the circle diameter and checks periodicity") {
  RunOutput run = run_cli(
      "simulate --body 'circle 1' --start 1,0 --dir -1,0 --bounces 4 "
      "--check-period 2 --out sim_diameter.csv");
  CHECK(run.exit_code == 0);

  std::string csv = slurp("sim_diameter.csv");
  CHECK(csv.find("run_config_digest") != std::string::npos);
  CHECK(csv.find("bounce,x0,x1") != std::string::npos);
  {
    std::stringstream ss(csv);
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(ss, line)) {
      if (line.rfind("# ", 0) == 0 || line.rfind("bounce", 0) == 0 || line.empty())
        continue;
      std::stringstream fields(line);
      std::string field;
      std::vector<double> row;
      while (std::getline(fields, field, ',')) row.push_back(std::stod(field));
      rows.push_back(row);
    }
    REQUIRE(rows.size() == 4);
    for (size_t j = 0; j < rows.size(); ++j) {
      double expected_x = (j % 2 == 0) ? -1.0 : 1.0;
      CHECK(std::abs(rows[j][1] - expected_x) < 1e-9);
      CHECK(std::abs(rows[j][2]) < 1e-9);
    }
  }

  // Period-2 deviation printed and tiny.
  auto pos = run.stdout_text.find("max_period_deviation");
  REQUIRE(pos != std::string::npos);
  double dev = std::stod(run.stdout_text.substr(pos + 21));
  CHECK(dev <= 1e-10);
  std::remove("sim_diameter.csv");
}

TEST_CASE("simulate rejects grazing starts with exit code 4") {
  RunOutput run = run_cli(
      "simulate --body 'circle 1' --start 1,0 --dir 0,1 --bounces 2 "
      "--out sim_graze.csv");
  CHECK(run.exit_code == 4);
  CHECK(run.stderr_text.find("GrazingRay") != std::string::npos);
}

TEST_CASE("find recovers the circle diameter and the pentagon family") {
  RunOutput run = run_cli(
      "find --body 'circle 1' --n 2 --seeds 6 --rng-seed 5 --out find_c2.json");
  CHECK(run.exit_code == 0);
  CHECK(contains_length(csv_lengths("find_c2.json"), 4.0));
  std::remove("find_c2.json");

  RunOutput run5 = run_cli(
      "find --body 'circle 1' --n 5 --seeds 8 --rng-seed 5 --out find_c5.json");
  CHECK(run5.exit_code == 0);
  auto lengths = csv_lengths("find_c5.json");
  CHECK(contains_length(lengths, 10.0 * std::sin(M_PI / 5.0)));
  CHECK(contains_length(lengths, 10.0 * std::sin(2.0 * M_PI / 5.0)));
  std::remove("find_c5.json");
}

TEST_CASE("find locates both ellipse axes") {
  RunOutput run = run_cli(
      "find --body 'ellipse 2 1' --n 2 --seeds 8 --rng-seed 3 --out find_e2.json");
  CHECK(run.exit_code == 0);
  auto lengths = csv_lengths("find_e2.json");
  CHECK(contains_length(lengths, 8.0));
  CHECK(contains_length(lengths, 4.0));
  std::remove("find_e2.json");
}

TEST_CASE("identical run configs produce byte-identical outputs") {
  std::string args =
      "find --body 'ellipse 2 1' --n 2 --seeds 5 --rng-seed 11 --out det_a.json";
  RunOutput first = run_cli(args);
  std::string a = slurp("det_a.json");
  RunOutput second = run_cli(
      "find --body 'ellipse 2 1' --n 2 --seeds 5 --rng-seed 11 --out det_b.json");
  std::string b = slurp("det_b.json");
  CHECK(first.exit_code == 0);
  CHECK(second.exit_code == 0);
  // The output path is not part of the payload, so drop the digest lines
  // (they hash the full config including the file name) before comparing.
  CHECK(!a.empty());
  auto strip_digest = [](std::string text) {
    auto pos = text.find("run_config_digest");
    if (pos != std::string::npos) {
      auto end = text.find('\n', pos);
      text.erase(pos, end - pos);
    }
    return text;
  };
  CHECK(strip_digest(a) == strip_digest(b));
  std::remove("det_a.json");
  std::remove("det_b.json");
}

TEST_CASE("indices writes a table with the dimension identity") {
  RunOutput find_run = run_cli(
      "find --body 'ellipse 2 1' --n 2 --seeds 6 --rng-seed 3 --out idx_orbits.json");
  REQUIRE(find_run.exit_code == 0);
  RunOutput run = run_cli(
      "indices --body 'ellipse 2 1' --orbits idx_orbits.json --z-samples 8 "
      "--out idx.csv");
  CHECK(run.exit_code == 0);

  std::ifstream in("idx.csv");
  std::string line;
  bool saw_header = false;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) continue;
    if (!saw_header) {
      CHECK(line == "m,z_re,z_im,ind,coind,nul,source");
      saw_header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 7);
    int ind = std::stoi(fields[3]), coind = std::stoi(fields[4]),
        nul = std::stoi(fields[5]);
    CHECK(ind + coind + nul == 2);  // nN = 2 for ellipse 2-orbits
    ++rows;
  }
  CHECK(rows >= 16);
  std::remove("idx_orbits.json");
  std::remove("idx.csv");
}

TEST_CASE("iterate reports all verdicts true on the ellipse axes") {
  RunOutput find_run = run_cli(
      "find --body 'ellipse 2 1' --n 2 --seeds 6 --rng-seed 3 --out it_orbits.json");
  REQUIRE(find_run.exit_code == 0);
  RunOutput run = run_cli(
      "iterate --body 'ellipse 2 1' --orbits it_orbits.json "
      "--m-list 1,2,4,8,16,32 --out it_report.json");
  CHECK(run.exit_code == 0);

  std::ifstream in("it_report.json");
  nlohmann::json j;
  in >> j;
  for (const auto& report : j.at("reports")) {
    CHECK(report.at("all_ok").get<bool>());
    for (const auto& row : report.at("rows")) {
      for (const auto& [name, value] : row.at("verdicts").items())
        CHECK(value.get<bool>());
      CHECK(row.contains("hypothesis_coind_nul_preserved"));
    }
  }
  std::remove("it_orbits.json");
  std::remove("it_report.json");
}

TEST_CASE("topology subcommands print polynomials and rank sums") {
  RunOutput betti = run_cli("topology betti 2 3 --out unused.csv");
  CHECK(betti.exit_code == 0);
  CHECK(betti.stdout_text.find("1 + t + t^2 + t^3") != std::string::npos);

  RunOutput rank = run_cli("topology equivariant-rank-sum 3 5 --out unused.csv");
  CHECK(rank.exit_code == 0);
  CHECK(rank.stdout_text.find("4") != std::string::npos);

  RunOutput bangert = run_cli(
      "topology bangert --m 10 --path circle-triangle --samples 64 "
      "--out bangert.csv");
  CHECK(bangert.exit_code == 0);
  CHECK(bangert.stdout_text.find("PASS") != std::string::npos);
  std::string csv = slurp("bangert.csv");
  CHECK(csv.find("x,lifted_length,bound") != std::string::npos);
  std::remove("bangert.csv");

  RunOutput bad = run_cli("topology equivariant 3 4 --out unused.csv");
  CHECK(bad.exit_code == 4);
}

TEST_CASE("config file provides defaults and flags win") {
  {
    std::ofstream cfg("run_cfg.json");
    cfg << R"({"body": "circle 1", "n": 2, "seeds": 5, "rng_seed": 7})" << '\n';
  }
  RunOutput run = run_cli("find --config run_cfg.json --out cfg_orbits.json");
  CHECK(run.exit_code == 0);
  CHECK(contains_length(csv_lengths("cfg_orbits.json"), 4.0));

  // Flag overrides the config file's n.
  RunOutput over = run_cli(
      "find --config run_cfg.json --n 3 --out cfg_orbits3.json");
  CHECK(over.exit_code == 0);
  CHECK(contains_length(csv_lengths("cfg_orbits3.json"), 3.0 * std::sqrt(3.0)));
  std::remove("run_cfg.json");
  std::remove("cfg_orbits.json");
  std::remove("cfg_orbits3.json");
}
