#pragma once

#include <functional>
#include <vector>

#include "phinv/auxsolve.hpp"
#include "phinv/scenario.hpp"
#include "phinv/states.hpp"
#include "phinv/wave.hpp"

namespace phinv {

/// Saved states of a propagation run with their flat and eta norms.
struct Trajectory {
  Grid grid;
  std::vector<double> times;
  std::vector<WaveSample> states;
  std::vector<double> plain_norm;
  std::vector<double> eta_norm;  // empty when no auxiliary trace was supplied
};

/// Discretised Hamiltonian p^2/2m + m omega^2 x^2/2 + i lambda x on a grid with
/// Dirichlet walls. The kinetic term uses the compact fourth-order Laplacian
/// M^-1 d2 / dx^2 with M = tridiag(1, 10, 1)/12.
class GridHamiltonian {
 public:
  GridHamiltonian(const Hamiltonian& h, const Grid& grid);

  /// H(t) psi on interior points; endpoints of the result are zero.
  std::vector<cplx> apply(const std::vector<cplx>& psi, double t) const;

  /// One Crank-Nicolson step from t to t + dt with H at t + dt/2, in place.
  void cn_step(std::vector<cplx>& psi, double t, double dt) const;

  const Grid& grid() const { return grid_; }

 private:
  Hamiltonian h_;
  Grid grid_;
  std::vector<double> x_;
  // scratch for the tridiagonal solve
  mutable std::vector<cplx> lo_, di_, up_, rhs_;
};

/// Crank-Nicolson propagation of psi0 from t0 to t1. Saves every `save_every`
/// steps plus the final state. When `aux` is given the eta-norm is recorded too.
/// Throws GridError if the state reaches the walls and NumericalError on non-finite values.
Trajectory propagate(const WaveSample& psi0, const Scenario& s, const Hamiltonian& h, double t0,
                     double t1, double dt, int save_every, const AuxTrace* aux = nullptr);
Trajectory propagate(const WaveSample& psi0, const Scenario& s, double t0, double t1, double dt,
                     int save_every);

/// Relative residual ||i hbar dPhi/dt - H Phi|| / ||Phi|| on the interior,
/// dPhi/dt by centered differences of the builder.
double tdse_residual(const std::function<WaveSample(double)>& builder, const Hamiltonian& h,
                     double t, double dt_fd);
/// Residual of the closed-form solution Phi_n.
double tdse_residual(int n, const Scenario& s, const AuxTrace& aux, const PhaseTrace& ph,
                     const Hamiltonian& h, double t, double dt_fd, const Grid& grid);

/// eta psi by the split form exp(i m alpha alpha_dot / 2 hbar) exp(m alpha_dot x / hbar)
/// and the Fourier multiplier exp(-alpha k). k_cutoff <= 0 selects min(k_nyquist, 30/|alpha|).
/// Throws GridError if spectral content beyond the cutoff exceeds 1e-12 of the peak.
WaveSample eta_apply(const WaveSample& psi, const Scenario& s, double alpha, double alpha_dot,
                     double k_cutoff = 0.0);

struct EtaNorm {
  double value = 0.0;
  double imag = 0.0;  // diagnostic
};
EtaNorm eta_norm(const WaveSample& psi, const Scenario& s, const AuxPoint& a,
                 double k_cutoff = 0.0);

/// arg <phi_n^PH(t)| eta |state>.
double overlap_phase(int n, const Scenario& s, const AuxPoint& a, const WaveSample& state);

/// Difference of two angles wrapped into (-pi, pi].
double angle_diff(double a, double b);

}  // namespace phinv
