#include "phinv/oracle.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "phinv/error.hpp"

namespace phinv {

namespace {

constexpr cplx I{0.0, 1.0};

// Thomas algorithm; lo[0] and up[n-1] are ignored. Overwrites di and rhs.
void solve_tridiagonal(const std::vector<cplx>& lo, std::vector<cplx>& di,
                       const std::vector<cplx>& up, std::vector<cplx>& rhs) {
  const size_t n = di.size();
  for (size_t i = 1; i < n; ++i) {
    cplx w = lo[i] / di[i - 1];
    di[i] -= w * up[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= di[n - 1];
  for (size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - up[i] * rhs[i + 1]) / di[i];
}

bool all_finite(const std::vector<cplx>& v) {
  for (cplx c : v) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

void fft(std::vector<cplx>& data, int sign) {
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(plan);
}

}  // namespace

GridHamiltonian::GridHamiltonian(const Hamiltonian& h, const Grid& grid)
    : h_(h), grid_(grid), x_(grid.points()) {}

std::vector<cplx> GridHamiltonian::apply(const std::vector<cplx>& psi, double t) const {
  const int N = grid_.N;
  const size_t n = static_cast<size_t>(N - 2);
  const double dx = grid_.dx();
  const double w = h_.eval_omega(t);
  const double lam = h_.eval_lambda(t);
  lo_.assign(n, 1.0 / 12.0);
  di_.assign(n, 10.0 / 12.0);
  up_.assign(n, 1.0 / 12.0);
  rhs_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    size_t j = i + 1;
    rhs_[i] = (psi[j + 1] - 2.0 * psi[j] + psi[j - 1]) / (dx * dx);
  }
  solve_tridiagonal(lo_, di_, up_, rhs_);
  std::vector<cplx> out(N, 0.0);
  const double kin = -h_.hbar * h_.hbar / (2.0 * h_.mass);
  for (size_t i = 0; i < n; ++i) {
    size_t j = i + 1;
    cplx v = 0.5 * h_.mass * w * w * x_[j] * x_[j] + I * lam * x_[j];
    out[j] = kin * rhs_[i] + v * psi[j];
  }
  return out;
}

void GridHamiltonian::cn_step(std::vector<cplx>& psi, double t, double dt) const {
  const int N = grid_.N;
  const size_t n = static_cast<size_t>(N - 2);
  const double dx = grid_.dx();
  const double tm = t + 0.5 * dt;
  const double w = h_.eval_omega(tm);
  const double lam = h_.eval_lambda(tm);
  const double kappa = h_.hbar * h_.hbar / (2.0 * h_.mass * dx * dx);
  const cplx itau = I * (dt / (2.0 * h_.hbar));

  auto V = [&](size_t j) { return 0.5 * h_.mass * w * w * x_[j] * x_[j] + I * lam * x_[j]; };

  lo_.resize(n);
  di_.resize(n);
  up_.resize(n);
  rhs_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    size_t j = i + 1;
    // Row j of M (T + V-coupled) with A = M + i tau (T + M V), B = M - i tau (T + M V).
    cplx d = 2.0 * kappa + (10.0 / 12.0) * V(j);
    cplx l = -kappa + V(j - 1) / 12.0;
    cplx u = -kappa + V(j + 1) / 12.0;
    di_[i] = 10.0 / 12.0 + itau * d;
    lo_[i] = 1.0 / 12.0 + itau * l;
    up_[i] = 1.0 / 12.0 + itau * u;
    cplx r = (10.0 / 12.0 - itau * d) * psi[j];
    if (i > 0) r += (1.0 / 12.0 - itau * l) * psi[j - 1];
    if (i + 1 < n) r += (1.0 / 12.0 - itau * u) * psi[j + 1];
    rhs_[i] = r;
  }
  solve_tridiagonal(lo_, di_, up_, rhs_);
  psi[0] = 0.0;
  psi[N - 1] = 0.0;
  for (size_t i = 0; i < n; ++i) psi[i + 1] = rhs_[i];
}

Trajectory propagate(const WaveSample& psi0, const Scenario& s, const Hamiltonian& h, double t0,
                     double t1, double dt, int save_every, const AuxTrace* aux) {
  if (!(t1 > t0) || !(dt > 0.0)) throw ValidationError("propagate needs t1 > t0 and dt > 0");
  check_edge_decay(psi0);
  const long steps = std::max(1L, std::lround((t1 - t0) / dt));
  const double step = (t1 - t0) / static_cast<double>(steps);
  save_every = std::max(save_every, 1);

  GridHamiltonian gh(h, psi0.grid);
  Trajectory tr;
  tr.grid = psi0.grid;
  std::vector<cplx> psi = psi0.values;
  psi.front() = 0.0;
  psi.back() = 0.0;

  auto save = [&](double t) {
    WaveSample w{psi0.grid, psi, t, psi0.n};
    tr.times.push_back(t);
    tr.plain_norm.push_back(norm2(w));
    if (aux) tr.eta_norm.push_back(eta_norm(w, s, aux_at(s, *aux, t)).value);
    tr.states.push_back(std::move(w));
  };

  save(t0);
  const int N = psi0.grid.N;
  for (long k = 0; k < steps; ++k) {
    double t = t0 + static_cast<double>(k) * step;
    gh.cn_step(psi, t, step);
    double tn = t0 + static_cast<double>(k + 1) * step;
    if (!all_finite(psi)) throw NumericalError("non-finite amplitude at t=" + std::to_string(tn));
    if (!(std::abs(psi[1]) < kEdgeDecay) || !(std::abs(psi[N - 2]) < kEdgeDecay)) {
      throw GridError("propagated state reached the grid wall at t=" + std::to_string(tn));
    }
    if ((k + 1) % save_every == 0 || k + 1 == steps) save(tn);
  }
  return tr;
}

Trajectory propagate(const WaveSample& psi0, const Scenario& s, double t0, double t1, double dt,
                     int save_every) {
  return propagate(psi0, s, Hamiltonian::from(s), t0, t1, dt, save_every);
}

double tdse_residual(const std::function<WaveSample(double)>& builder, const Hamiltonian& h,
                     double t, double dt_fd) {
  WaveSample c = builder(t);
  WaveSample p = builder(t + dt_fd);
  WaveSample m = builder(t - dt_fd);
  GridHamiltonian gh(h, c.grid);
  std::vector<cplx> hp = gh.apply(c.values, t);
  const int N = c.grid.N;
  double num = 0.0;
  double den = 0.0;
  for (int j = 1; j + 1 < N; ++j) {
    cplx lhs = I * h.hbar * (p.values[j] - m.values[j]) / (2.0 * dt_fd);
    num += std::norm(lhs - hp[j]);
    den += std::norm(c.values[j]);
  }
  return std::sqrt(num / den);
}

double tdse_residual(int n, const Scenario& s, const AuxTrace& aux, const PhaseTrace& ph,
                     const Hamiltonian& h, double t, double dt_fd, const Grid& grid) {
  auto builder = [&](double tt) { return solution_Phi_at(n, s, aux, ph, tt, grid); };
  return tdse_residual(builder, h, t, dt_fd);
}

WaveSample eta_apply(const WaveSample& psi, const Scenario& s, double alpha, double alpha_dot,
                     double k_cutoff) {
  const int N = psi.grid.N;
  const double dx = psi.grid.dx();
  const double k_nyq = std::numbers::pi / dx;
  if (k_cutoff <= 0.0) {
    k_cutoff = alpha != 0.0 ? std::min(k_nyq, 30.0 / std::abs(alpha)) : k_nyq;
  }
  std::vector<cplx> spec = psi.values;
  fft(spec, FFTW_FORWARD);

  const double dk = 2.0 * std::numbers::pi / (N * dx);
  double peak = 0.0;
  double beyond = 0.0;
  auto wavenumber = [&](int j) { return dk * (j <= N / 2 ? j : j - N); };
  for (int j = 0; j < N; ++j) {
    double a = std::abs(spec[j]);
    peak = std::max(peak, a);
    if (std::abs(wavenumber(j)) > k_cutoff) beyond = std::max(beyond, a);
  }
  if (beyond > 1e-12 * peak) {
    throw GridError("state is not band limited below k=" + std::to_string(k_cutoff) +
                    " (relative content " + std::to_string(beyond / peak) + ")");
  }
  for (int j = 0; j < N; ++j) {
    double k = wavenumber(j);
    spec[j] = std::abs(k) > k_cutoff ? cplx(0.0) : spec[j] * std::exp(-alpha * k);
  }
  fft(spec, FFTW_BACKWARD);

  const double m = s.mass;
  const double hb = s.hbar;
  const cplx scalar = std::exp(I * (m * alpha * alpha_dot / (2.0 * hb)));
  WaveSample out = psi;
  for (int j = 0; j < N; ++j) {
    double x = psi.grid.x(j);
    out.values[j] = scalar * std::exp(m * alpha_dot * x / hb) * spec[j] / static_cast<double>(N);
  }
  return out;
}

EtaNorm eta_norm(const WaveSample& psi, const Scenario& s, const AuxPoint& a, double k_cutoff) {
  cplx v = inner(psi, eta_apply(psi, s, a.alpha, a.alpha_dot, k_cutoff));
  return {v.real(), v.imag()};
}

double overlap_phase(int n, const Scenario& s, const AuxPoint& a, const WaveSample& state) {
  WaveSample phi = phi_PH_at(n, s, a, state.grid);
  return std::arg(inner(phi, eta_apply(state, s, a.alpha, a.alpha_dot)));
}

double angle_diff(double a, double b) {
  double d = std::remainder(a - b, 2.0 * std::numbers::pi);
  return d;
}

}  // namespace phinv
