#include "phinv/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "phinv/error.hpp"

namespace phinv {

namespace {

void check_degree(int n) {
  if (n < 0 || n > kMaxHermiteDegree) {
    throw ValidationError("Hermite degree " + std::to_string(n) + " outside [0, " +
                          std::to_string(kMaxHermiteDegree) + "]");
  }
}

bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

}  // namespace

cplx hermite(int n, cplx z) {
  check_degree(n);
  cplx h0 = 1.0;
  if (n == 0) return h0;
  cplx h1 = 2.0 * z;
  for (int k = 1; k < n; ++k) {
    cplx h2 = 2.0 * z * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

EigenSample eigenfunction_Ih_d(int n, cplx z, double sigma, double sigma_dot, double m,
                               double hbar) {
  check_degree(n);
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  const double scale = std::sqrt(hbar) * sigma;
  const cplx u = z / scale;

  // Normalised Hermite functions H_k(u) / sqrt(2^k k!).
  cplx prev = 0.0;
  cplx cur = 1.0;
  for (int k = 0; k < n; ++k) {
    cplx next = std::sqrt(2.0 / (k + 1)) * u * cur - std::sqrt(double(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
  }

  const cplx c = cplx(0.0, m / (2.0 * hbar)) * cplx(sigma_dot / sigma, 1.0 / (m * sigma * sigma));
  const cplx gauss = std::exp(c * z * z);
  const double pref = std::pow(std::numbers::pi, -0.25) / std::sqrt(scale);

  EigenSample out;
  out.value = pref * gauss * cur;
  out.derivative = pref * gauss * (2.0 * c * z * cur + std::sqrt(2.0 * n) * prev / scale);
  if (!finite(out.value) || !finite(out.derivative)) {
    throw NumericalError("eigenfunction overflow at z=(" + std::to_string(z.real()) + ", " +
                         std::to_string(z.imag()) + ")");
  }
  return out;
}

cplx eigenfunction_Ih(int n, cplx z, double sigma, double sigma_dot, double m, double hbar) {
  return eigenfunction_Ih_d(n, z, sigma, sigma_dot, m, hbar).value;
}

}  // namespace phinv
