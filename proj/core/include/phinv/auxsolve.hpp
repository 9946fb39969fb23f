#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "phinv/scenario.hpp"

namespace phinv {

/// Width function sigma and its derivative on the scenario mesh.
struct ErmakovSolution {
  std::vector<double> sigma;
  std::vector<double> sigma_dot;
};

/// Metric function alpha and its derivative on the scenario mesh.
struct AlphaSolution {
  std::vector<double> alpha;
  std::vector<double> alpha_dot;
};

/// Auxiliary functions at one time.
struct AuxPoint {
  double t = 0.0;
  double sigma = 1.0;
  double sigma_dot = 0.0;
  double alpha = 0.0;
  double alpha_dot = 0.0;
};

/// sigma, alpha and their derivatives sampled on a uniform mesh.
struct AuxTrace {
  std::vector<double> t;
  std::vector<double> sigma;
  std::vector<double> sigma_dot;
  std::vector<double> alpha;
  std::vector<double> alpha_dot;
  double residual_sigma = 0.0;
  double residual_alpha = 0.0;

  size_t size() const { return t.size(); }
  AuxPoint at(size_t k) const { return {t[k], sigma[k], sigma_dot[k], alpha[k], alpha_dot[k]}; }
  /// beta = -m alpha_dot, the x coefficient of the metric exponent.
  double beta(size_t k, double mass) const { return -mass * alpha_dot[k]; }
};

/// Initial data actually used by solve_aux (config overrides or defaults).
struct AuxInitial {
  double sigma0;
  double sigma_dot0;
  double alpha0;
  double alpha_dot0;
};
AuxInitial initial_conditions(const Scenario& s);

/// RK4 for sigma'' + omega^2 sigma = 1/(m^2 sigma^3).
/// Throws SolverError if any stage value of sigma is not positive or not finite.
ErmakovSolution solve_ermakov(const Scenario& s, double sigma0, double sigma_dot0);

/// RK4 for m alpha'' + m omega^2 alpha + 2 lambda = 0.
AlphaSolution solve_alpha(const Scenario& s, double alpha0, double alpha_dot0);

/// Solves both equations from initial_conditions(s) and fills the residual fields.
AuxTrace solve_aux(const Scenario& s);

/// Max interior residuals of both ODEs using centered second differences.
/// Stores them in the trace. Returns +inf on non-finite samples.
std::pair<double, double> residuals(AuxTrace& trace, const Scenario& s);

/// Auxiliary values at an arbitrary time in [t0, t1] (or slightly outside),
/// integrated by RK4 from the nearest mesh node.
AuxPoint aux_at(const Scenario& s, const AuxTrace& trace, double t);

/// CSV with header t,sigma,sigma_dot,alpha,alpha_dot and 17 significant digits.
void write_aux_csv(std::ostream& out, const AuxTrace& trace);

}  // namespace phinv
