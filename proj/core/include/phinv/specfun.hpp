#pragma once

#include <complex>

namespace phinv {

using cplx = std::complex<double>;

/// Largest supported Hermite degree.
inline constexpr int kMaxHermiteDegree = 200;

/// Physicists' Hermite polynomial H_n(z) by the three-term recurrence.
/// Throws ValidationError for n < 0 or n > kMaxHermiteDegree.
cplx hermite(int n, cplx z);

/// Lewis-Riesenfeld oscillator eigenfunction
///   psi_n(z) = [n! 2^n sigma sqrt(pi hbar)]^(-1/2)
///              exp[(i m / 2 hbar)(sigma_dot/sigma + i/(m sigma^2)) z^2] H_n(z / (sqrt(hbar) sigma))
/// at complex z. Evaluated with normalised Hermite functions so large n does
/// not overflow. Throws NumericalError on a non-finite result.
cplx eigenfunction_Ih(int n, cplx z, double sigma, double sigma_dot, double m, double hbar);

/// Value and z-derivative of eigenfunction_Ih together.
struct EigenSample {
  cplx value;
  cplx derivative;
};
EigenSample eigenfunction_Ih_d(int n, cplx z, double sigma, double sigma_dot, double m,
                               double hbar);

}  // namespace phinv
