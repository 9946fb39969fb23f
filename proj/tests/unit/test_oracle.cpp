#include <phinv/error.hpp>
#include <phinv/oracle.hpp>

#include <cmath>
#include <numbers>

#include "doctest.h"

using namespace phinv;

namespace {

const cplx I(0.0, 1.0);

Scenario special_case() {
  return parse_scenario(
      "m = 1, hbar = 1, omega = const(1), lambda = linear(1), alpha_dot0 = particular,"
      " t = [0, 1], steps = 1000, grid_L = 12, grid_N = 1024");
}

}  // namespace

TEST_CASE("discrete Hamiltonian on an oscillator eigenstate") {
  Scenario s = parse_scenario("omega = const(1.4), m = 0.7, lambda = const(0)");
  s.sigma0 = 1.0 / std::sqrt(0.7 * 1.4);
  AuxTrace aux = solve_aux(s);
  Grid g = scenario_grid(s);
  WaveSample psi = psi_Ih(1, s, aux.at(0), g);
  GridHamiltonian gh(Hamiltonian::from(s), g);
  std::vector<cplx> hp = gh.apply(psi.values, 0.0);
  CHECK(hp.front() == cplx(0.0));
  CHECK(hp.back() == cplx(0.0));
  double worst = 0.0;
  for (int j = 1; j < g.N - 1; ++j) worst = std::max(worst, std::abs(hp[j] - 1.5 * 1.4 * psi.values[j]));
  CHECK(worst < 1e-6);
}

TEST_CASE("stationary state keeps its norm and modulus") {
  Scenario s = parse_scenario("omega = const(1), lambda = const(0)");
  AuxTrace aux = solve_aux(s);
  Grid g = scenario_grid(s);
  WaveSample psi0 = psi_Ih(0, s, aux.at(0), g);
  Trajectory tr = propagate(psi0, s, Hamiltonian::from(s), 0.0, 1.0, 2e-3, 100, &aux);
  REQUIRE(tr.times.size() == tr.states.size());
  CHECK(tr.times.back() == doctest::Approx(1.0));
  for (size_t k = 1; k < tr.times.size(); ++k) CHECK(tr.times[k] > tr.times[k - 1]);
  for (double v : tr.plain_norm) CHECK(std::abs(v - tr.plain_norm.front()) < 1e-8);
  for (double v : tr.eta_norm) CHECK(std::abs(v - tr.plain_norm.front()) < 1e-8);
  double worst = 0.0;
  for (int j = 0; j < g.N; ++j)
    worst = std::max(worst, std::abs(std::abs(tr.states.back().values[j]) - std::abs(psi0.values[j])));
  CHECK(worst < 1e-6);
  // eigenstate phase exp(-i t / 2)
  cplx ov = inner(psi0, tr.states.back());
  CHECK(std::abs(angle_diff(std::arg(ov), -0.5)) < 1e-6);
}

TEST_CASE("coupling breaks the flat norm but not the eta norm") {
  Scenario s = special_case();
  AuxTrace aux = solve_aux(s);
  Grid g = scenario_grid(s);
  PhaseTrace ph = phase(0, s, aux);
  WaveSample psi0 = solution_Phi(0, s, aux, ph, 0, g);
  Trajectory tr = propagate(psi0, s, Hamiltonian::from(s), 0.0, 0.5, 1e-3, 50, &aux);
  REQUIRE(tr.eta_norm.size() == tr.states.size());
  CHECK(std::abs(tr.plain_norm.back() - tr.plain_norm.front()) > 1e-3);
  for (double v : tr.eta_norm) CHECK(std::abs(v - tr.eta_norm.front()) < 1e-6 * tr.eta_norm.front());

  PhaseTrace p1 = phase(0, s, aux);
  WaveSample exact = solution_Phi_at(0, s, aux, p1, 0.5, g);
  CHECK(l2_distance(exact, tr.states.back()) < 1e-4);
}

TEST_CASE("eta norm without metric is the flat norm") {
  Scenario s = special_case();
  AuxTrace aux = solve_aux(s);
  Grid g = scenario_grid(s);
  WaveSample psi = psi_Ih(2, s, aux.at(0), g);
  EtaNorm en = eta_norm(psi, s, AuxPoint{0.0, 1.0, 0.0, 0.0, 0.0});
  CHECK(en.value == doctest::Approx(norm2(psi)).epsilon(1e-12));
  CHECK(std::abs(en.imag) < 1e-14);
}

TEST_CASE("two metric evaluations agree") {
  Scenario s = special_case();
  AuxTrace aux = solve_aux(s);
  Grid g = scenario_grid(s);
  PhaseTrace ph = phase(0, s, aux);
  for (size_t k : {size_t{250}, size_t{1000}}) {
    WaveSample Phi = solution_Phi(0, s, aux, ph, k, g);
    EtaNorm en = eta_norm(Phi, s, aux.at(k));
    CHECK(std::abs(en.value - eta_inner(0, 0, s, aux, k).real()) < 1e-6);
    CHECK(std::abs(en.imag) < 1e-8);
  }
}

TEST_CASE("metric rejects states that are not band limited") {
  Scenario s = special_case();
  Grid g = scenario_grid(s);
  WaveSample w{g, std::vector<cplx>(g.N, 0.0), 0.0, 0};
  for (int j = 400; j < 600; ++j) w.values[j] = 1.0;
  CHECK_THROWS_AS(eta_apply(w, s, -2.0, -2.0), GridError);

  WaveSample smooth{g, {}, 0.0, 0};
  for (int j = 0; j < g.N; ++j) smooth.values.push_back(std::exp(-g.x(j) * g.x(j) / 2.0));
  CHECK_NOTHROW(eta_apply(smooth, s, -2.0, -2.0));
  CHECK_THROWS_AS(eta_apply(smooth, s, -2.0, -2.0, 3.0), GridError);
}

TEST_CASE("reaching the wall is an error") {
  Scenario s = parse_scenario("omega = const(1), lambda = const(0), grid_L = 10, grid_N = 512");
  Grid g = scenario_grid(s);
  WaveSample w{g, {}, 0.0, WaveSample::kSuperposition};
  for (int j = 0; j < g.N; ++j) {
    double x = g.x(j);
    w.values.push_back(std::exp(-x * x / 2.0 + I * 8.0 * x));
  }
  CHECK_THROWS_AS(propagate(w, s, 0.0, 1.6, 1e-3, 10), GridError);
  WaveSample bad = w;
  bad.values.front() = 1e-3;
  CHECK_THROWS_AS(propagate(bad, s, 0.0, 0.1, 1e-3, 10), GridError);
}

TEST_CASE("overlap phase recovers the closed-form phase") {
  Scenario s = special_case();
  AuxTrace aux = solve_aux(s);
  Grid g = scenario_grid(s);
  for (int n : {0, 1}) {
    PhaseTrace ph = phase(n, s, aux);
    WaveSample Phi = solution_Phi(n, s, aux, ph, 500, g);
    double got = overlap_phase(n, s, aux.at(500), Phi);
    CHECK(std::abs(angle_diff(got, ph.eps[500])) < 1e-8);
  }
}

TEST_CASE("angle differences wrap") {
  CHECK(angle_diff(0.1, 0.1 + 2 * std::numbers::pi) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(angle_diff(3.0, -3.0) == doctest::Approx(6.0 - 2 * std::numbers::pi));
  CHECK(std::abs(angle_diff(-3.0, 3.0)) <= std::numbers::pi);
  CHECK(angle_diff(0.7, 0.2) == doctest::Approx(0.5));
}

TEST_CASE("Schroedinger residual of a stationary state") {
  Scenario s = parse_scenario("omega = const(1), lambda = const(0)");
  AuxTrace aux = solve_aux(s);
  PhaseTrace ph = phase(0, s, aux);
  double r = tdse_residual(0, s, aux, ph, Hamiltonian::from(s), 0.5, 1e-4, scenario_grid(s));
  CHECK(r < 1e-6);
  // a deliberately wrong Hamiltonian is caught
  Hamiltonian wrong = Hamiltonian::from(s);
  wrong.omega = CoefficientFunction::constant(1.1);
  CHECK(tdse_residual(0, s, aux, ph, wrong, 0.5, 1e-4, scenario_grid(s)) > 1e-2);
}
