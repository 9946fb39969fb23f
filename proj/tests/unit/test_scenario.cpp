#include <phinv/error.hpp>
#include <phinv/scenario.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"

using namespace phinv;

TEST_CASE("one-line config maps fields directly") {
  Scenario s = parse_scenario(
      "m=1, hbar=1, omega=const(1.0), lambda=linear(1.0), t=[0,1], steps=1000, n=[0]");
  CHECK(s.mass == 1.0);
  CHECK(s.hbar == 1.0);
  CHECK(s.omega == CoefficientFunction::constant(1.0));
  CHECK(s.lambda == CoefficientFunction::linear(1.0));
  CHECK(s.t0 == 0.0);
  CHECK(s.t1 == 1.0);
  CHECK(s.n_steps == 1000);
  CHECK(s.quantum_n == std::vector<int>{0});
  CHECK(eval_lambda(s, 0.3) == doctest::Approx(0.3));
}

TEST_CASE("multi-line config with comments and grid keys") {
  Scenario s = parse_scenario(
      "# header comment\n"
      "m = 2.5   # trailing comment\n"
      "hbar = 0.5\n"
      "\n"
      "omega = sin_mod(1.0, 0.1, 2.0)\n"
      "n = [0, 2, 5]\n"
      "grid_L = 10\n"
      "grid_N = 2048\n"
      "fock_dim = 96\n"
      "tol.tdse = 3e-5\n");
  CHECK(s.mass == 2.5);
  CHECK(s.hbar == 0.5);
  CHECK(s.quantum_n == std::vector<int>{0, 2, 5});
  CHECK(s.grid_L == 10.0);
  CHECK(s.grid_N == 2048);
  CHECK(s.fock_dim == 96);
  CHECK(s.tol.tdse == 3e-5);
}

TEST_CASE("negative omega is rejected by name") {
  try {
    parse_scenario("omega=const(-1.0)");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("omega must be positive") != std::string::npos);
  }
}

TEST_CASE("sinusoidal frequency evaluates the closed form") {
  Scenario s = parse_scenario("omega=sin_mod(1.0, 0.1, 2.0)");
  double t = std::numbers::pi / 4;
  CHECK(eval_omega(s, t) == doctest::Approx(1.0 + 0.1 * std::sin(2.0 * t)).epsilon(1e-15));
  CHECK(eval_omega(s, t) == doctest::Approx(1.1).epsilon(1e-15));
}

TEST_CASE("coefficient evaluation examples") {
  CHECK(eval_lambda(parse_scenario("lambda=linear(1)"), 0.5) == 0.5);
  Scenario w = parse_scenario("omega=const(2)");
  for (double t : {0.0, 0.3, 0.99}) CHECK(eval_omega(w, t) == 2.0);
  CHECK(eval_lambda(parse_scenario("lambda=const(0)"), 7.0) == 0.0);
  CHECK(eval_lambda_dot(parse_scenario("lambda=linear(3)"), 0.2) == 3.0);
}

TEST_CASE("syntax errors report line and column") {
  auto position = [](const char* text) {
    try {
      parse_scenario(text);
    } catch (const ConfigSyntaxError& e) {
      return std::pair{e.line(), e.column()};
    }
    return std::pair{0, 0};
  };
  CHECK(position("m = 1\nomega = cst(1)") == std::pair{2, 9});
  CHECK(position("m = 1\nhbar 2") == std::pair{2, 1});
  CHECK(position("m = 1\nsteps = 10x") == std::pair{2, 11});
  CHECK(position("t = [0, 1") == std::pair{1, 5});
  CHECK(position("m = 1)") == std::pair{1, 6});
  CHECK(position("mass = 1") == std::pair{1, 1});
  CHECK(position("m = 1\nm = 2") == std::pair{2, 1});
  CHECK(position("m =") == std::pair{1, 4});
  CHECK_THROWS_AS(parse_scenario("omega = const(1, 2)"), ConfigSyntaxError);
}

TEST_CASE("every invariant is validated") {
  CHECK_THROWS_WITH_AS(parse_scenario("m = 0"), doctest::Contains("mass"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario("hbar = -1"), doctest::Contains("hbar"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario("t = [1, 1]"), doctest::Contains("t1"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario("steps = 1"), doctest::Contains("steps"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario("n = [0, -1]"), doctest::Contains("mode"), ValidationError);
  CHECK_THROWS_WITH_AS(parse_scenario("omega = sin_mod(1, -1.5, 2)"), doctest::Contains("omega"),
                       ValidationError);
  CHECK_THROWS_AS(parse_scenario("grid_N = 64"), ValidationError);
  CHECK_THROWS_AS(parse_scenario("fock_dim = 8"), ValidationError);
  CHECK_THROWS_AS(parse_scenario("lambda = const(1), alpha_dot0 = particular"), ValidationError);
}

TEST_CASE("table coefficients interpolate linearly and refuse extrapolation") {
  auto dir = std::filesystem::temp_directory_path() / "phinv_table_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "w.csv");
    out << "t,value\n0,1\n0.5,2\n1,1.5\n";
  }
  {
    std::ofstream out(dir / "s.cfg");
    out << "omega = table(w.csv)\n";
  }
  Scenario s = load_scenario(dir / "s.cfg");
  CHECK(eval_omega(s, 0.25) == doctest::Approx(1.5));
  CHECK(eval_omega(s, 0.75) == doctest::Approx(1.75));
  CHECK(s.omega.derivative(0.25) == doctest::Approx(2.0));
  CHECK_THROWS_AS(eval_omega(s, 1.5), ValidationError);

  {
    std::ofstream out(dir / "short.cfg");
    out << "omega = table(w.csv)\nt = [0, 2]\n";
  }
  CHECK_THROWS_AS(load_scenario(dir / "short.cfg"), ValidationError);
}

TEST_CASE("serialize then parse round-trips") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    Scenario s;
    s.mass = u(rng);
    s.hbar = u(rng);
    s.omega = trial % 2 ? CoefficientFunction::constant(u(rng))
                        : CoefficientFunction::sin_mod(u(rng), 0.3 * u(rng) / 3.0, u(rng));
    s.lambda = trial % 3 ? CoefficientFunction::linear(u(rng) - 1.5)
                         : CoefficientFunction::constant(u(rng));
    s.t0 = u(rng) - 1.0;
    s.t1 = s.t0 + u(rng);
    s.n_steps = 10 + trial;
    s.quantum_n = {trial % 4, trial % 7};
    s.grid_L = 5.0 + u(rng);
    s.fock_dim = 16 + trial;
    if (trial % 2) s.sigma0 = u(rng);
    if (trial % 5 == 0) s.alpha_dot0 = u(rng);
    if (trial % 3 == 0) s.save_t = {s.t0, s.t1};
    s.tol.tdse = u(rng) * 1e-5;
    validate(s);
    Scenario back = parse_scenario(serialize_scenario(s));
    CHECK(back == s);
    CHECK(parse_scenario(serialize_scenario(back)) == back);
  }
  Scenario sc = parse_scenario("lambda = linear(1), alpha_dot0 = particular");
  CHECK(parse_scenario(serialize_scenario(sc)) == sc);
}

TEST_CASE("coefficient evaluation is pure") {
  Scenario s = parse_scenario("omega = sin_mod(1.3, 0.2, 2.7), lambda = linear(0.7)");
  for (double t = 0.0; t < 1.0; t += 0.137) {
    double a = eval_omega(s, t);
    double b = eval_omega(s, t);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    double c = eval_lambda(s, t);
    double d = eval_lambda(s, t);
    CHECK(std::memcmp(&c, &d, sizeof c) == 0);
  }
}

TEST_CASE("flipping lambda only changes the Hamiltonian under test") {
  Scenario s = parse_scenario("lambda = linear(2)");
  Hamiltonian h = Hamiltonian::from(s, true);
  CHECK(h.eval_lambda(0.5) == -1.0);
  CHECK(eval_lambda(s, 0.5) == 1.0);
  CHECK(h.eval_omega(0.5) == eval_omega(s, 0.5));
}
