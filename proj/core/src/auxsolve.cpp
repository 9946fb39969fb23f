#include "phinv/auxsolve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "phinv/error.hpp"

namespace phinv {

namespace {

using State = std::array<double, 2>;

State axpy(const State& y, double h, const State& k) { return {y[0] + h * k[0], y[1] + h * k[1]}; }

// One classical RK4 step. `check` sees every stage state.
template <class F, class Check>
State rk4_step(F&& f, double t, const State& y, double h, Check&& check) {
  State k1 = f(t, y);
  State y2 = axpy(y, 0.5 * h, k1);
  check(y2, t + 0.5 * h);
  State k2 = f(t + 0.5 * h, y2);
  State y3 = axpy(y, 0.5 * h, k2);
  check(y3, t + 0.5 * h);
  State k3 = f(t + 0.5 * h, y3);
  State y4 = axpy(y, h, k3);
  check(y4, t + h);
  State k4 = f(t + h, y4);
  State out{y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])};
  check(out, t + h);
  return out;
}

auto ermakov_rhs(const Scenario& s) {
  return [&s](double t, const State& y) {
    double w = s.omega.value(t);
    return State{y[1], -w * w * y[0] + 1.0 / (s.mass * s.mass * y[0] * y[0] * y[0])};
  };
}

auto alpha_rhs(const Scenario& s) {
  return [&s](double t, const State& y) {
    double w = s.omega.value(t);
    return State{y[1], -w * w * y[0] - 2.0 * s.lambda.value(t) / s.mass};
  };
}

void check_sigma(const State& y, double t) {
  if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
    throw SolverError("non-finite sigma at t=" + std::to_string(t), t);
  }
  if (y[0] <= 0.0) throw SolverError("sigma lost positivity at t=" + std::to_string(t), t);
}

void check_alpha(const State& y, double t) {
  if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
    throw SolverError("non-finite alpha at t=" + std::to_string(t), t);
  }
}

}  // namespace

AuxInitial initial_conditions(const Scenario& s) {
  AuxInitial ic{};
  ic.sigma0 = s.sigma0.value_or(1.0 / std::sqrt(s.mass * s.omega.value(s.t0)));
  ic.sigma_dot0 = s.sigma_dot0.value_or(0.0);
  ic.alpha0 = s.alpha0.value_or(0.0);
  if (s.alpha_dot0_particular) {
    double w0 = s.omega.value(s.t0);
    ic.alpha_dot0 = -2.0 * s.lambda.p0 / (s.mass * w0 * w0);
  } else {
    ic.alpha_dot0 = s.alpha_dot0.value_or(0.0);
  }
  return ic;
}

ErmakovSolution solve_ermakov(const Scenario& s, double sigma0, double sigma_dot0) {
  if (!(sigma0 > 0.0)) throw SolverError("sigma0 must be positive", s.t0);
  const int n = s.n_steps;
  const double h = s.step();
  ErmakovSolution out;
  out.sigma.resize(n + 1);
  out.sigma_dot.resize(n + 1);
  State y{sigma0, sigma_dot0};
  auto f = ermakov_rhs(s);
  out.sigma[0] = y[0];
  out.sigma_dot[0] = y[1];
  for (int k = 0; k < n; ++k) {
    y = rk4_step(f, s.mesh_time(k), y, h, check_sigma);
    out.sigma[k + 1] = y[0];
    out.sigma_dot[k + 1] = y[1];
  }
  return out;
}

AlphaSolution solve_alpha(const Scenario& s, double alpha0, double alpha_dot0) {
  const int n = s.n_steps;
  const double h = s.step();
  AlphaSolution out;
  out.alpha.resize(n + 1);
  out.alpha_dot.resize(n + 1);
  State y{alpha0, alpha_dot0};
  auto f = alpha_rhs(s);
  out.alpha[0] = y[0];
  out.alpha_dot[0] = y[1];
  for (int k = 0; k < n; ++k) {
    y = rk4_step(f, s.mesh_time(k), y, h, check_alpha);
    out.alpha[k + 1] = y[0];
    out.alpha_dot[k + 1] = y[1];
  }
  return out;
}

AuxTrace solve_aux(const Scenario& s) {
  AuxInitial ic = initial_conditions(s);
  ErmakovSolution e = solve_ermakov(s, ic.sigma0, ic.sigma_dot0);
  AlphaSolution a = solve_alpha(s, ic.alpha0, ic.alpha_dot0);
  AuxTrace tr;
  tr.t.resize(s.n_steps + 1);
  for (int k = 0; k <= s.n_steps; ++k) tr.t[k] = s.mesh_time(k);
  tr.sigma = std::move(e.sigma);
  tr.sigma_dot = std::move(e.sigma_dot);
  tr.alpha = std::move(a.alpha);
  tr.alpha_dot = std::move(a.alpha_dot);
  residuals(tr, s);
  return tr;
}

std::pair<double, double> residuals(AuxTrace& tr, const Scenario& s) {
  const double inf = std::numeric_limits<double>::infinity();
  double rs = 0.0;
  double ra = 0.0;
  const size_t n = tr.size();
  for (size_t k = 1; k + 1 < n; ++k) {
    double h = 0.5 * (tr.t[k + 1] - tr.t[k - 1]);
    double w = s.omega.value(tr.t[k]);
    double sdd = (tr.sigma[k + 1] - 2.0 * tr.sigma[k] + tr.sigma[k - 1]) / (h * h);
    double add = (tr.alpha[k + 1] - 2.0 * tr.alpha[k] + tr.alpha[k - 1]) / (h * h);
    double sg = tr.sigma[k];
    double r1 = std::abs(sdd + w * w * sg - 1.0 / (s.mass * s.mass * sg * sg * sg));
    double r2 = std::abs(s.mass * add + s.mass * w * w * tr.alpha[k] + 2.0 * s.lambda.value(tr.t[k]));
    if (!std::isfinite(r1)) r1 = inf;
    if (!std::isfinite(r2)) r2 = inf;
    rs = std::max(rs, r1);
    ra = std::max(ra, r2);
  }
  tr.residual_sigma = rs;
  tr.residual_alpha = ra;
  return {rs, ra};
}

AuxPoint aux_at(const Scenario& s, const AuxTrace& tr, double t) {
  const double h = s.step();
  long k = std::lround((t - s.t0) / h);
  k = std::clamp<long>(k, 0, static_cast<long>(tr.size()) - 1);
  double tk = tr.t[k];
  double span = t - tk;
  AuxPoint p = tr.at(static_cast<size_t>(k));
  p.t = t;
  if (span == 0.0) return p;
  int sub = std::max(1, static_cast<int>(std::ceil(std::abs(span) / h - 1e-9)));
  double hh = span / sub;
  State ys{p.sigma, p.sigma_dot};
  State ya{p.alpha, p.alpha_dot};
  auto fs = ermakov_rhs(s);
  auto fa = alpha_rhs(s);
  for (int i = 0; i < sub; ++i) {
    double ti = tk + i * hh;
    ys = rk4_step(fs, ti, ys, hh, check_sigma);
    ya = rk4_step(fa, ti, ya, hh, check_alpha);
  }
  p.sigma = ys[0];
  p.sigma_dot = ys[1];
  p.alpha = ya[0];
  p.alpha_dot = ya[1];
  return p;
}

void write_aux_csv(std::ostream& out, const AuxTrace& tr) {
  out << "t,sigma,sigma_dot,alpha,alpha_dot\n";
  char buf[160];
  for (size_t k = 0; k < tr.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", tr.t[k], tr.sigma[k],
                  tr.sigma_dot[k], tr.alpha[k], tr.alpha_dot[k]);
    out << buf;
  }
}

}  // namespace phinv
