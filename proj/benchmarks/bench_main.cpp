#include <phinv/auxsolve.hpp>
#include <phinv/operators.hpp>
#include <phinv/oracle.hpp>
#include <phinv/specfun.hpp>
#include <phinv/states.hpp>

#include <benchmark/benchmark.h>

using namespace phinv;

namespace {

Scenario generic(int steps) {
  Scenario s = parse_scenario("omega = sin_mod(1, 0.1, 2), lambda = linear(0.5)");
  s.n_steps = steps;
  return s;
}

void BM_AuxSolve(benchmark::State& state) {
  Scenario s = generic(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_aux(s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AuxSolve)->Arg(1000)->Arg(10000);

void BM_CrankNicolson(benchmark::State& state) {
  Scenario s = generic(1000);
  s.grid_N = static_cast<int>(state.range(0));
  AuxTrace aux = solve_aux(s);
  Grid g = scenario_grid(s);
  GridHamiltonian gh(Hamiltonian::from(s), g);
  std::vector<cplx> psi = psi_Ih(0, s, aux.at(0), g).values;
  double t = 0.0;
  for (auto _ : state) {
    gh.cn_step(psi, t, 2e-4);
    t += 2e-4;
    benchmark::DoNotOptimize(psi.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CrankNicolson)->Arg(1024)->Arg(4096);

void BM_MatrixExp(benchmark::State& state) {
  const int D = static_cast<int>(state.range(0));
  auto [X, P] = fock_xp(D, 1.0, 1.0, 1.0);
  Matrix A = 2.0 * P.entries * cplx(0.0, 1.0) - 2.0 * X.entries;
  for (auto _ : state) benchmark::DoNotOptimize(matrix_exp(A));
}
BENCHMARK(BM_MatrixExp)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Metric(benchmark::State& state) {
  Scenario s = parse_scenario("lambda = linear(1), alpha_dot0 = particular");
  s.fock_dim = static_cast<int>(state.range(0));
  AuxTrace aux = solve_aux(s);
  FockModel fm(s, aux, Hamiltonian::from(s));
  for (auto _ : state) benchmark::DoNotOptimize(fm.build_eta(0.5));
}
BENCHMARK(BM_Metric)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Hermite(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  cplx z(0.7, -0.4);
  for (auto _ : state) benchmark::DoNotOptimize(hermite(n, z));
}
BENCHMARK(BM_Hermite)->Arg(10)->Arg(200);

void BM_Eigenfunction(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  cplx z(0.7, -0.4);
  for (auto _ : state) benchmark::DoNotOptimize(eigenfunction_Ih(n, z, 1.1, 0.2, 1.0, 1.0));
}
BENCHMARK(BM_Eigenfunction)->Arg(10)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
