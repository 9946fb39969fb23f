#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phinv {

/// A real coefficient function of time drawn from a closed vocabulary.
///
///   const(c)               f(t) = c
///   linear(a)              f(t) = a t
///   sin_mod(w0, eps, nu)   f(t) = w0 (1 + eps sin(nu t))
///   table(path.csv)        piecewise-linear interpolation of (t, value) samples
struct CoefficientFunction {
  enum class Kind { constant, linear, sin_mod, table };

  Kind kind = Kind::constant;
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  std::string table_path;
  std::vector<double> table_t;
  std::vector<double> table_v;

  static CoefficientFunction constant(double c);
  static CoefficientFunction linear(double a);
  static CoefficientFunction sin_mod(double w0, double eps, double nu);
  static CoefficientFunction table(std::string path, std::vector<double> t, std::vector<double> v);

  /// Throws ValidationError for table functions evaluated outside their sample range.
  double value(double t) const;
  double derivative(double t) const;

  /// Literal form accepted by the config parser.
  std::string literal() const;

  /// Same function with the sign reversed.
  CoefficientFunction negated() const;

  bool operator==(const CoefficientFunction&) const = default;
};

/// Pass/fail thresholds used by the verification front end.
struct Tolerances {
  double ph_relation = 1e-5;
  double liouville = 1e-5;
  double similarity = 1e-6;
  double rho_h_rho_inv = 1e-6;
  double spectrum = 1e-5;
  double tdse = 1e-5;
  double propagator = 1e-4;
  double eta_norm = 1e-6;
  double orthonormality = 1e-8;
  double phase_imag = 1e-6;
  double phase_overlap = 1e-4;

  bool operator==(const Tolerances&) const = default;
};

/// Physical parameters, coefficient functions and solver settings for one run.
/// Immutable once validated.
struct Scenario {
  double mass = 1.0;
  double hbar = 1.0;
  CoefficientFunction omega = CoefficientFunction::constant(1.0);
  CoefficientFunction lambda = CoefficientFunction::constant(0.0);
  double t0 = 0.0;
  double t1 = 1.0;
  int n_steps = 1000;
  std::vector<int> quantum_n{0};

  double grid_L = 12.0;
  int grid_N = 1024;
  int fock_dim = 64;

  // Auxiliary initial conditions; unset means the documented default.
  std::optional<double> sigma0;
  std::optional<double> sigma_dot0;
  std::optional<double> alpha0;
  std::optional<double> alpha_dot0;
  // alpha_dot0 = -2a/(m w0^2), the value for which alpha is purely linear in t
  // when omega is constant and lambda = a t.
  bool alpha_dot0_particular = false;

  std::optional<double> omega_ref;  // Fock basis frequency, default omega(t0)
  int edge_band = 0;                // 0 means fock_dim / 8
  double dt_prop = 2e-4;
  double dt_fd = 1e-4;
  std::vector<double> save_t;
  int workers = 1;

  Tolerances tol;

  double step() const { return (t1 - t0) / n_steps; }
  double mesh_time(int k) const { return t0 + k * step(); }
  int effective_edge_band() const { return edge_band > 0 ? edge_band : fock_dim / 8; }

  bool operator==(const Scenario&) const = default;
};

/// The Hamiltonian under test, p^2/2m + m omega^2 x^2 / 2 + i lambda x.
/// Kept separate from Scenario so verification can feed a deliberately wrong
/// Hamiltonian to checks built from the correct auxiliary solution.
struct Hamiltonian {
  double mass = 1.0;
  double hbar = 1.0;
  CoefficientFunction omega;
  CoefficientFunction lambda;

  static Hamiltonian from(const Scenario& s, bool flip_lambda = false);

  double eval_omega(double t) const { return omega.value(t); }
  double eval_lambda(double t) const { return lambda.value(t); }
};

/// Parses the `key = value` config grammar. Records are separated by newlines or
/// top-level commas, `#` starts a comment. Relative table paths resolve against
/// `base_dir`. Throws ConfigSyntaxError or ValidationError.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical text form; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& s);

/// Checks every Scenario invariant, throwing ValidationError naming the first violation.
void validate(const Scenario& s);

double eval_omega(const Scenario& s, double t);
double eval_lambda(const Scenario& s, double t);
double eval_lambda_dot(const Scenario& s, double t);

}  // namespace phinv
