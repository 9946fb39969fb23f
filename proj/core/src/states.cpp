#include "phinv/states.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "phinv/error.hpp"

namespace phinv {

namespace {

constexpr cplx I{0.0, 1.0};

struct SampledPsi {
  WaveSample psi;
  std::vector<cplx> dpsi;
};

SampledPsi sample_psi(int n, const Scenario& s, const AuxPoint& a, const Grid& grid) {
  SampledPsi out;
  out.psi.grid = grid;
  out.psi.t = a.t;
  out.psi.n = n;
  out.psi.values.resize(grid.N);
  out.dpsi.resize(grid.N);
  for (int j = 0; j < grid.N; ++j) {
    EigenSample e = eigenfunction_Ih_d(n, grid.x(j), a.sigma, a.sigma_dot, s.mass, s.hbar);
    out.psi.values[j] = e.value;
    out.dpsi[j] = e.derivative;
  }
  return out;
}

double trap_weight(int j, int N) { return (j == 0 || j == N - 1) ? 0.5 : 1.0; }

// Expectation values of x, x^2, p, p^2 in a sampled state with known derivative.
struct Moments {
  cplx x, x2, p, p2;
};

Moments moments(const SampledPsi& sp) {
  const Grid& g = sp.psi.grid;
  Moments m{0.0, 0.0, 0.0, 0.0};
  for (int j = 0; j < g.N; ++j) {
    double w = trap_weight(j, g.N) * g.dx();
    double x = g.x(j);
    cplx v = sp.psi.values[j];
    double d = std::norm(v);
    m.x += w * x * d;
    m.x2 += w * x * x * d;
    m.p += w * std::conj(v) * sp.dpsi[j];      // times -i hbar later
    m.p2 += w * std::norm(sp.dpsi[j]);         // times hbar^2 later
  }
  return m;
}

// <psi| rho H rho^-1 |psi> for the explicit similarity-transformed H.
cplx rho_H_rho_inv_mean(const Moments& mo, const Hamiltonian& h, double t, double alpha,
                        double alpha_dot) {
  const double m = h.mass;
  const double hb = h.hbar;
  const double w = h.eval_omega(t);
  const double lam = h.eval_lambda(t);
  const cplx p = -I * hb * mo.p;
  const cplx p2 = hb * hb * mo.p2;
  return p2 / (2.0 * m) + 0.5 * m * w * w * mo.x2 + I * (lam + 0.5 * m * alpha * w * w) * mo.x +
         I * alpha_dot / 2.0 * p -
         (m * alpha_dot * alpha_dot / 8.0 + m * alpha * alpha * w * w / 8.0 + alpha * lam / 2.0);
}

}  // namespace

Grid scenario_grid(const Scenario& s) { return Grid::make(s.grid_L, s.grid_N); }

WaveSample psi_Ih(int n, const Scenario& s, const AuxPoint& a, const Grid& grid) {
  return sample_psi(n, s, a, grid).psi;
}

WaveSample phi_PH_at(int n, const Scenario& s, const AuxPoint& a, const Grid& grid) {
  WaveSample w;
  w.grid = grid;
  w.t = a.t;
  w.n = n;
  w.values.resize(grid.N);
  const double m = s.mass;
  const double hb = s.hbar;
  const cplx scalar = std::exp(I * (m * a.alpha * a.alpha_dot / (8.0 * hb)));
  for (int j = 0; j < grid.N; ++j) {
    double x = grid.x(j);
    cplx z(x, -a.alpha / 2.0);
    w.values[j] = scalar * std::exp(-m * a.alpha_dot * x / (2.0 * hb)) *
                  eigenfunction_Ih(n, z, a.sigma, a.sigma_dot, m, hb);
  }
  check_edge_decay(w);
  return w;
}

WaveSample phi_PH(int n, const Scenario& s, const AuxTrace& aux, size_t t_index,
                  const Grid& grid) {
  return phi_PH_at(n, s, aux.at(t_index), grid);
}

PhaseTrace phase(int n, const Scenario& s, const AuxTrace& aux) {
  const size_t K = aux.size();
  const double m = s.mass;
  const double hb = s.hbar;
  PhaseTrace ph;
  ph.n = n;
  ph.t = aux.t;
  ph.eps.assign(K, 0.0);
  ph.part_invariant.assign(K, 0.0);
  ph.part_metric.assign(K, 0.0);

  auto f = [&](size_t k) { return 1.0 / (m * aux.sigma[k] * aux.sigma[k]); };
  auto fp = [&](size_t k) {
    double sg = aux.sigma[k];
    return -2.0 * aux.sigma_dot[k] / (m * sg * sg * sg);
  };
  auto g = [&](size_t k) { return s.lambda.value(aux.t[k]) * aux.alpha[k] / (4.0 * hb); };
  auto gp = [&](size_t k) {
    double tk = aux.t[k];
    return (s.lambda.derivative(tk) * aux.alpha[k] + s.lambda.value(tk) * aux.alpha_dot[k]) /
           (4.0 * hb);
  };

  const double fp0 = fp(0);
  const double gp0 = gp(0);
  double tf = 0.0;
  double tg = 0.0;
  for (size_t k = 1; k < K; ++k) {
    double h = aux.t[k] - aux.t[k - 1];
    tf += 0.5 * h * (f(k - 1) + f(k));
    tg += 0.5 * h * (g(k - 1) + g(k));
    double h2 = h * h / 12.0;
    double If = tf + h2 * (fp0 - fp(k));
    double Ig = tg + h2 * (gp0 - gp(k));
    ph.part_invariant[k] = -(n + 0.5) * If;
    ph.part_metric[k] = Ig;
    ph.eps[k] = ph.part_invariant[k] + ph.part_metric[k];
  }
  return ph;
}

double phase_at(const Scenario& s, const AuxTrace& aux, const PhaseTrace& ph, double t) {
  const double h = s.step();
  long k = std::lround((t - s.t0) / h);
  k = std::clamp<long>(k, 0, static_cast<long>(aux.size()) - 1);
  const double tk = aux.t[k];
  if (t == tk) return ph.eps[k];

  static constexpr std::array<double, 5> nodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                                  0.5384693101056831, 0.9061798459386640};
  static constexpr std::array<double, 5> weights = {0.2369268850561891, 0.4786286704993665,
                                                    0.5688888888888889, 0.4786286704993665,
                                                    0.2369268850561891};
  const double half = 0.5 * (t - tk);
  const double mid = 0.5 * (t + tk);
  double sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    double ti = mid + half * nodes[i];
    AuxPoint a = aux_at(s, aux, ti);
    double integrand = -(ph.n + 0.5) / (s.mass * a.sigma * a.sigma) +
                       s.lambda.value(ti) * a.alpha / (4.0 * s.hbar);
    sum += weights[i] * integrand;
  }
  return ph.eps[k] + half * sum;
}

double special_case_phase(int n, double m, double hbar, double w0, double a, double t) {
  return -(n + 0.5) * w0 * t - a * a * t * t * t / (6.0 * hbar * m * w0 * w0);
}

WaveSample solution_Phi(int n, const Scenario& s, const AuxTrace& aux, const PhaseTrace& ph,
                        size_t t_index, const Grid& grid) {
  WaveSample w = phi_PH(n, s, aux, t_index, grid);
  const cplx u = std::exp(I * ph.eps[t_index]);
  for (cplx& v : w.values) v *= u;
  return w;
}

WaveSample solution_Phi_at(int n, const Scenario& s, const AuxTrace& aux, const PhaseTrace& ph,
                           double t, const Grid& grid) {
  WaveSample w = phi_PH_at(n, s, aux_at(s, aux, t), grid);
  const cplx u = std::exp(I * phase_at(s, aux, ph, t));
  for (cplx& v : w.values) v *= u;
  return w;
}

cplx eta_inner(int m_idx, int n_idx, const Scenario& s, const AuxTrace& aux, size_t t_index) {
  return eta_inner(m_idx, n_idx, s, aux, t_index, scenario_grid(s));
}

cplx eta_inner(int m_idx, int n_idx, const Scenario& s, const AuxTrace& aux, size_t t_index,
               const Grid& grid) {
  AuxPoint a = aux.at(t_index);
  return inner(psi_Ih(m_idx, s, a, grid), psi_Ih(n_idx, s, a, grid));
}

MeanValue mean_H_eta(int n, const Scenario& s, const AuxTrace& aux, size_t t_index) {
  return mean_H_eta(n, s, aux, t_index, Hamiltonian::from(s), scenario_grid(s));
}

MeanValue mean_H_eta(int n, const Scenario& s, const AuxTrace& aux, size_t t_index,
                     const Hamiltonian& h, const Grid& grid) {
  AuxPoint a = aux.at(t_index);
  SampledPsi sp = sample_psi(n, s, a, grid);
  cplx q = rho_H_rho_inv_mean(moments(sp), h, a.t, a.alpha, a.alpha_dot);

  const double m = h.mass;
  const double w = h.eval_omega(a.t);
  const double lam = h.eval_lambda(a.t);
  MeanValue out;
  out.quadrature = q.real();
  out.imag = q.imag();
  out.closed_form =
      0.5 * h.hbar * (n + 0.5) *
          (m * a.sigma_dot * a.sigma_dot + m * w * w * a.sigma * a.sigma +
           1.0 / (m * a.sigma * a.sigma)) -
      (m * a.alpha_dot * a.alpha_dot / 8.0 + m * a.alpha * a.alpha * w * w / 8.0 +
       a.alpha * lam / 2.0);
  return out;
}

PhaseReality check_phase_reality(int n, const Scenario& s, const AuxTrace& aux) {
  return check_phase_reality(n, s, aux, Hamiltonian::from(s), scenario_grid(s));
}

PhaseReality check_phase_reality(int n, const Scenario& s, const AuxTrace& aux,
                                 const Hamiltonian& h, const Grid& grid, int stride) {
  PhaseReality out;
  const size_t K = aux.size();
  if (K < 3) return out;
  const double hb = h.hbar;
  const double m = h.mass;
  stride = std::max(stride, 1);
  for (size_t k = 1; k + 1 < K; k += static_cast<size_t>(stride)) {
    const double dt = aux.t[k + 1] - aux.t[k - 1];
    SampledPsi cur = sample_psi(n, s, aux.at(k), grid);
    WaveSample next = psi_Ih(n, s, aux.at(k + 1), grid);
    WaveSample prev = psi_Ih(n, s, aux.at(k - 1), grid);
    cplx dpsi_dt = (inner(cur.psi, next) - inner(cur.psi, prev)) / dt;

    const double t = aux.t[k];
    const double alpha = aux.alpha[k];
    const double alpha_dot = aux.alpha_dot[k];
    const double alpha_ddot = (aux.alpha_dot[k + 1] - aux.alpha_dot[k - 1]) / dt;

    Moments mo = moments(cur);
    cplx sim = rho_H_rho_inv_mean(mo, h, t, alpha, alpha_dot);
    // i hbar rho_dot rho^-1 = -i alpha_dot p/2 + i m alpha_ddot x/2 + m(alpha_dot^2 - alpha alpha_ddot)/8
    cplx p = -I * hb * mo.p;
    cplx gauge = -I * alpha_dot / 2.0 * p + I * m * alpha_ddot / 2.0 * mo.x +
                 m * (alpha_dot * alpha_dot - alpha * alpha_ddot) / 8.0;
    cplx integrand = (I * hb * dpsi_dt - sim - gauge) / hb;

    double expected = -(n + 0.5) / (s.mass * aux.sigma[k] * aux.sigma[k]) +
                      s.lambda.value(t) * alpha / (4.0 * s.hbar);
    out.max_imag = std::max(out.max_imag, std::abs(integrand.imag()));
    out.max_real_dev = std::max(out.max_real_dev, std::abs(integrand.real() - expected));
  }
  return out;
}

void write_phase_csv(std::ostream& out, const PhaseTrace& ph) {
  out << "t,eps,part_invariant,part_metric\n";
  char buf[160];
  for (size_t k = 0; k < ph.t.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", ph.t[k], ph.eps[k],
                  ph.part_invariant[k], ph.part_metric[k]);
    out << buf;
  }
}

}  // namespace phinv
