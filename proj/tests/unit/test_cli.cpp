#include <cli.hpp>
#include <phinv/states.hpp>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace phinv;

namespace {

const fs::path kConfigs = PHINV_CONFIG_DIR;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("phinv_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "phinv");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  fs::path p = dir / "scenario.cfg";
  std::ofstream(p) << text;
  return p;
}

// Reduced special case to keep sweeps quick.
const char* kSmallSpecial =
    "m = 1\nhbar = 1\nomega = const(1)\nlambda = linear(1)\nalpha_dot0 = particular\n"
    "t = [0, 1]\nsteps = 500\nfock_dim = 32\ngrid_N = 512\ngrid_L = 12\n";

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

// residual of `check` per sweep value
std::map<double, double> sweep_column(const fs::path& csv, const std::string& check) {
  std::map<double, double> out;
  std::istringstream is(slurp(csv));
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
    REQUIRE(cols.size() == 4);
    if (cols[2] == check) out[std::stod(cols[1])] = std::stod(cols[3]);
  }
  return out;
}

}  // namespace

TEST_CASE("usage and config errors exit with code 2") {
  TempDir d("usage");
  CHECK(invoke({}) == 2);
  CHECK(invoke({"verify"}) == 2);
  CHECK(invoke({"verify", "--config", (d.path / "missing.cfg").string(), "--out", d.path.string()}) == 2);
  fs::path bad = write_config(d.path, "m = 1\nomega = const(-1)\n");
  CHECK(invoke({"verify", "--config", bad.string(), "--out", (d.path / "o").string()}) == 2);
  fs::path syn = write_config(d.path, "m = (1\n");
  CHECK(invoke({"solve", "--config", syn.string(), "--out", (d.path / "o").string()}) == 2);
  fs::path ok = write_config(d.path, kSmallSpecial);
  CHECK(invoke({"sweep", "--config", ok.string(), "--out", d.path.string(), "--param", "mass",
                "--values", "1"}) == 2);
  CHECK(invoke({"sweep", "--config", ok.string(), "--out", d.path.string(), "--param", "n",
                "--values", "1.5"}) == 2);
}

TEST_CASE("Hermitian reference verifies cleanly") {
  TempDir d("zero");
  CHECK(invoke({"verify", "--config", (kConfigs / "zero_coupling.cfg").string(), "--out",
                d.path.string()}) == 0);
  auto report = nlohmann::json::parse(slurp(d.path / "run_report.json"));
  CHECK(report["header"]["command"] == "verify");
  CHECK(report["header"]["flip_lambda"] == false);
  CHECK(report["passed"] == true);
  auto residuals = nlohmann::json::parse(slurp(d.path / "residuals.json"));
  CHECK(residuals.is_array());
  CHECK(residuals.size() > 10);
  for (auto& v : report["verdicts"]) CHECK(v["verdict"] == "PASS");
}

TEST_CASE("special case reports its failing operator checks") {
  TempDir d("special");
  CHECK(invoke({"verify", "--config", (kConfigs / "special_case.cfg").string(), "--out",
                d.path.string()}) == 1);
  auto report = nlohmann::json::parse(slurp(d.path / "run_report.json"));
  std::map<std::string, bool> pass;
  for (auto& v : report["verdicts"]) pass[v["check"].get<std::string>()] = v["verdict"] == "PASS";
  CHECK(pass.at("ph_relation") == false);
  CHECK(pass.at("liouville") == true);
  CHECK(pass.at("tdse") == true);
  CHECK(pass.at("propagator") == true);
  CHECK(pass.at("eta_norm") == true);
  CHECK(pass.at("phase_imag") == true);
  CHECK(pass.at("phase_overlap") == true);
  CHECK(report["header"]["timings_s"].contains("oracle"));
  CHECK(report["passed"] == false);
}

TEST_CASE("negated coupling is caught by the relation checks") {
  Scenario s = parse_scenario(kSmallSpecial);
  cli::CheckSuite good = cli::run_checks(s, false);
  cli::CheckSuite flip = cli::run_checks(s, true);
  auto worst = [](const cli::CheckSuite& c, const std::string& name) {
    double w = 0.0;
    for (auto& r : c.records)
      if (r.check == name) w = std::max(w, r.residual);
    return w;
  };
  CHECK(worst(flip, "liouville") > 1e-2);
  CHECK(worst(flip, "tdse") > 1e-2);
  CHECK(worst(good, "liouville") < 1e-5);
  CHECK(std::abs(good.eps_t1 + 2.0 / 3.0) < 1e-8);
  CHECK(good.mean_H_eta_t1 == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("solve writes observables and reruns are byte identical") {
  TempDir a("solve_a"), b("solve_b");
  fs::path cfg = write_config(a.path, std::string(kSmallSpecial) + "save_t = [0, 0.5, 1]\n");
  CHECK(invoke({"solve", "--config", cfg.string(), "--out", (a.path / "out").string()}) == 0);
  CHECK(invoke({"solve", "--config", cfg.string(), "--out", (b.path / "out").string()}) == 0);

  fs::path out = a.path / "out";
  for (const char* f : {"aux.csv", "phase_n0.csv", "wave_n0_t0.csv", "wave_n0_t0.5.csv",
                        "wave_n0_t1.csv", "observables_n0.csv", "trajectory_n0/norms.csv",
                        "run_report.json"})
    CHECK_MESSAGE(fs::exists(out / f), f);

  std::istringstream obs(slurp(out / "observables_n0.csv"));
  std::string line, last;
  std::getline(obs, line);
  CHECK(line == "t,eps_n,mean_H_eta,eta_norm");
  int rows = 0;
  while (std::getline(obs, line)) {
    last = line;
    ++rows;
  }
  CHECK(rows >= 100);
  std::vector<double> cols;
  std::stringstream ls(last);
  for (std::string c; std::getline(ls, c, ',');) cols.push_back(std::stod(c));
  REQUIRE(cols.size() == 4);
  CHECK(cols[0] == 1.0);
  CHECK(cols[1] == doctest::Approx(-2.0 / 3.0).epsilon(1e-8));
  CHECK(cols[2] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(cols[3] == doctest::Approx(1.0).epsilon(1e-6));

  auto ta = tree(out), tb = tree(b.path / "out");
  ta.erase("run_report.json");
  tb.erase("run_report.json");
  CHECK(ta.size() == tb.size());
  CHECK(ta == tb);
  for (auto& [name, _] : ta) CHECK_MESSAGE(name.find(".tmp") == std::string::npos, name);
}

TEST_CASE("sweep over mode index matches the closed-form phase") {
  TempDir d("sweep_n");
  fs::path cfg = write_config(d.path, kSmallSpecial);
  fs::path o1 = d.path / "w1", o2 = d.path / "w2";
  CHECK(invoke({"sweep", "--config", cfg.string(), "--out", o1.string(), "--param", "n", "--values",
                "0,1,2", "--workers", "1"}) != 2);
  CHECK(invoke({"sweep", "--config", cfg.string(), "--out", o2.string(), "--param", "n", "--values",
                "0,1,2", "--workers", "2"}) != 2);
  auto eps = sweep_column(o1 / "sweep.csv", "eps_t1");
  REQUIRE(eps.size() == 3);
  for (auto [n, e] : eps)
    CHECK(std::abs(e - special_case_phase(static_cast<int>(n), 1, 1, 1, 1, 1)) < 1e-8);
  CHECK(slurp(o1 / "sweep.csv") == slurp(o2 / "sweep.csv"));
  for (auto& e : fs::recursive_directory_iterator(d.path))
    CHECK(e.path().string().find(".tmp") == std::string::npos);
}

TEST_CASE("sweep over the difference step shows second-order convergence") {
  TempDir d("sweep_dt");
  fs::path cfg = write_config(d.path, kSmallSpecial);
  invoke({"sweep", "--config", cfg.string(), "--out", d.path.string(), "--param", "dt", "--values",
          "4e-3,2e-3,1e-3"});
  auto tdse = sweep_column(d.path / "sweep.csv", "tdse");
  REQUIRE(tdse.size() == 3);
  CHECK(tdse.at(4e-3) / tdse.at(2e-3) == doctest::Approx(4.0).epsilon(0.1));
  CHECK(tdse.at(2e-3) / tdse.at(1e-3) == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("atomic writes leave no temporary files") {
  TempDir d("atomic");
  fs::path p = d.path / "x.txt";
  cli::write_file_atomic(p, "one");
  cli::write_file_atomic(p, "two");
  CHECK(slurp(p) == "two");
  int count = 0;
  for (auto& e : fs::directory_iterator(d.path)) {
    (void)e;
    ++count;
  }
  CHECK(count == 1);
}
