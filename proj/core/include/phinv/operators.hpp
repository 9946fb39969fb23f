#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "phinv/auxsolve.hpp"
#include "phinv/scenario.hpp"
#include "phinv/wave.hpp"

namespace phinv {

using Matrix = Eigen::MatrixXcd;

/// Dense operator in a truncated Fock basis.
struct OpMatrix {
  Matrix entries;
  double t = 0.0;
  std::string label;

  int dim() const { return static_cast<int>(entries.rows()); }

  /// Wraps a matrix that must be Hermitian to 1e-12 (max norm); throws NumericalError otherwise.
  static OpMatrix hermitian(Matrix m, double t, std::string label);
};

/// Position and momentum from ladder operators at reference frequency omega_ref.
/// Throws ValidationError for D < 16 or omega_ref <= 0.
std::pair<OpMatrix, OpMatrix> fock_xp(int D, double m, double omega_ref, double hbar);

/// exp(A) by scaling and squaring around a truncated Taylor series.
/// Throws NumericalError if the scaled norm needs more than 60 squarings.
Matrix matrix_exp(const Matrix& A);
OpMatrix matrix_exp(const OpMatrix& A);

/// Inverse by partially pivoted LU solves against the identity.
Matrix inverse(const Matrix& A);

/// 1-norm condition number ||A|| ||A^-1||.
double condition_number(const Matrix& A);

/// Max-norm of the top-left (D - band) x (D - band) block.
double interior_max(const Matrix& R, int band);

struct SimilarityResidual {
  double invariant = 0.0;    // ||rho I_PH rho^-1 - I_h||
  double hermiticity = 0.0;  // ||h - h^dagger|| with h = rho H rho^-1 + i hbar rho_dot rho^-1
  double explicit_form = 0.0;  // ||rho H rho^-1 - closed form||
  double condition_eta = 0.0;
};

struct CheckResidual {
  double residual = 0.0;
  double condition_eta = 0.0;
};

struct SpectrumReport {
  std::vector<cplx> ipH;          // lowest eigenvalues of I_PH by real part
  std::vector<double> ih;         // lowest eigenvalues of I_h
  std::vector<cplx> h;            // lowest eigenvalues of rho H rho^-1 + i hbar rho_dot rho^-1 (interior block)
  double max_imag_ipH = 0.0;
  double max_rel_dev = 0.0;       // max |Re lambda_n / (hbar (n + 1/2)) - 1| over I_PH
  double max_ipH_ih_diff = 0.0;
  double max_imag_h = 0.0;
};

/// Operators of one scenario in a truncated Fock basis. Auxiliary values at
/// off-mesh times are integrated from the stored trace.
class FockModel {
 public:
  FockModel(const Scenario& s, const AuxTrace& aux, const Hamiltonian& h, int dim = 0,
            int edge_band = 0);

  int dim() const { return dim_; }
  int edge_band() const { return band_; }
  const OpMatrix& X() const { return X_; }
  const OpMatrix& P() const { return P_; }

  AuxPoint aux(double t) const;

  OpMatrix build_H(double t) const;
  /// Checked metric: throws NumericalError if the Hermitized metric has an eigenvalue
  /// below minus its roundoff floor (dim * eps * largest eigenvalue).
  OpMatrix build_eta(double t) const;
  OpMatrix build_eta_inv(double t) const;
  OpMatrix build_rho(double t) const;
  OpMatrix build_rho_inv(double t) const;
  OpMatrix build_Ih(double t) const;
  OpMatrix build_IPH(double t) const;
  /// h = p^2/2m + m omega^2 x^2/2 - lambda alpha / 4.
  OpMatrix build_h(double t) const;
  /// Closed form of rho H rho^-1.
  OpMatrix build_rho_H_rho_inv(double t) const;

  CheckResidual check_ph_relation(double t, double dt) const;
  /// ||H^dagger eta - eta H - i hbar eta_dot|| / ||eta|| over the interior block.
  /// Same relation without eta^-1; diagnostic only.
  CheckResidual check_ph_relation_eta_form(double t, double dt) const;
  CheckResidual check_static_pseudo_hermiticity(double t) const;
  CheckResidual check_liouville(double t, double dt) const;
  CheckResidual check_liouville_hermitian(double t, double dt) const;
  SimilarityResidual check_similarity(double t, double dt) const;
  SpectrumReport spectrum(double t, int count) const;

 private:
  Matrix metric_exponent(double t) const;
  Matrix eta_unchecked(double t) const;

  Scenario s_;
  AuxTrace aux_;
  Hamiltonian h_;
  int dim_;
  int band_;
  OpMatrix X_;
  OpMatrix P_;
  Matrix XX_, PP_, XP_PX_;
};

/// Grid representation of I_h applied to samples (fourth-order finite
/// differences; the two outermost points on either side are left at zero).
std::vector<cplx> grid_apply_Ih(const WaveSample& psi, const Scenario& s, const AuxPoint& a);

/// One row of the residual report.
struct ResidualRecord {
  std::string check;
  double t = 0.0;
  int dim = 0;
  double dt = 0.0;
  int edge_band = 0;
  double residual = 0.0;
  double condition_eta = 0.0;
};

/// JSON array of {check, t, dim, dt, edge_band, residual, condition_eta}.
std::string residual_report_json(const std::vector<ResidualRecord>& records);

}  // namespace phinv
