#pragma once

#include <iosfwd>
#include <vector>

#include "phinv/auxsolve.hpp"
#include "phinv/scenario.hpp"
#include "phinv/specfun.hpp"
#include "phinv/wave.hpp"

namespace phinv {

/// Cumulative phase eps_n(t_k) = part_invariant + part_metric on the aux mesh.
struct PhaseTrace {
  int n = 0;
  std::vector<double> t;
  std::vector<double> eps;
  std::vector<double> part_invariant;  // -(n + 1/2) * integral of 1/(m sigma^2)
  std::vector<double> part_metric;     // integral of lambda alpha / (4 hbar)
};

/// Grid described by the scenario's grid_L and grid_N.
Grid scenario_grid(const Scenario& s);

/// Hermitian invariant eigenfunction psi_n(x, t) sampled on the grid.
WaveSample psi_Ih(int n, const Scenario& s, const AuxPoint& a, const Grid& grid);

/// Pseudo-Hermitian invariant eigenfunction
///   phi_n(x) = exp[i m alpha alpha_dot / (8 hbar)] exp[-m alpha_dot x / (2 hbar)] psi_n(x - i alpha/2).
/// Throws GridError if the edge-decay bound fails.
WaveSample phi_PH(int n, const Scenario& s, const AuxTrace& aux, size_t t_index, const Grid& grid);
WaveSample phi_PH_at(int n, const Scenario& s, const AuxPoint& a, const Grid& grid);

/// End-corrected cumulative trapezoid of the two phase integrands.
PhaseTrace phase(int n, const Scenario& s, const AuxTrace& aux);

/// Phase at an arbitrary time: mesh value plus Gauss-Legendre on the remaining piece.
double phase_at(const Scenario& s, const AuxTrace& aux, const PhaseTrace& ph, double t);

/// Closed-form phase for omega = const(w0), lambda = linear(a):
/// -(n + 1/2) w0 t - a^2 t^3 / (6 hbar m w0^2).
double special_case_phase(int n, double m, double hbar, double w0, double a, double t);

/// Phi_n = exp(i eps_n) phi_n.
WaveSample solution_Phi(int n, const Scenario& s, const AuxTrace& aux, const PhaseTrace& ph,
                        size_t t_index, const Grid& grid);
WaveSample solution_Phi_at(int n, const Scenario& s, const AuxTrace& aux, const PhaseTrace& ph,
                           double t, const Grid& grid);

/// <phi_m|eta|phi_n> through the similarity route <psi_m|psi_n>.
cplx eta_inner(int m_idx, int n_idx, const Scenario& s, const AuxTrace& aux, size_t t_index);
cplx eta_inner(int m_idx, int n_idx, const Scenario& s, const AuxTrace& aux, size_t t_index,
               const Grid& grid);

struct MeanValue {
  double quadrature = 0.0;      // <psi_n| rho H rho^-1 |psi_n> on the grid
  double imag = 0.0;            // imaginary part of the quadrature (diagnostic)
  double closed_form = 0.0;     // closed form with the m sigma_dot^2 term
};

/// eta-expectation of H.
MeanValue mean_H_eta(int n, const Scenario& s, const AuxTrace& aux, size_t t_index);
MeanValue mean_H_eta(int n, const Scenario& s, const AuxTrace& aux, size_t t_index,
                     const Hamiltonian& h, const Grid& grid);

struct PhaseReality {
  double max_imag = 0.0;       // max |Im integrand| over interior mesh points
  double max_real_dev = 0.0;   // max |Re integrand - d eps/dt|
};

/// Evaluates the phase integrand <psi_n|[i hbar d/dt - h]|psi_n>/hbar at interior
/// mesh times with h = rho H rho^-1 + i hbar rho_dot rho^-1 and d/dt by centered
/// differences of the sampled states.
PhaseReality check_phase_reality(int n, const Scenario& s, const AuxTrace& aux);
PhaseReality check_phase_reality(int n, const Scenario& s, const AuxTrace& aux,
                                 const Hamiltonian& h, const Grid& grid, int stride = 1);

/// CSV with header t,eps,part_invariant,part_metric.
void write_phase_csv(std::ostream& out, const PhaseTrace& ph);

}  // namespace phinv
