#pragma once

#include <complex>
#include <iosfwd>
#include <vector>

namespace phinv {

using cplx = std::complex<double>;

/// Uniform grid x_j = -L + j dx, dx = 2L/(N-1), j = 0..N-1.
struct Grid {
  double L = 12.0;
  int N = 1024;

  /// Throws GridError unless L > 0 and N >= 128.
  static Grid make(double L, int N);

  double dx() const { return 2.0 * L / (N - 1); }
  double x(int j) const { return -L + j * dx(); }
  std::vector<double> points() const;

  bool operator==(const Grid&) const = default;
};

/// Complex wavefunction samples on a grid at one time.
struct WaveSample {
  static constexpr int kSuperposition = -1;

  Grid grid;
  std::vector<cplx> values;
  double t = 0.0;
  int n = kSuperposition;
};

/// Edge amplitude bound enforced by the state builders.
inline constexpr double kEdgeDecay = 1e-10;

/// Throws GridError if |values| at either endpoint reaches `bound`.
void check_edge_decay(const WaveSample& w, double bound = kEdgeDecay);

/// Trapezoid quadrature of conj(a) b.
cplx inner(const WaveSample& a, const WaveSample& b);
double norm2(const WaveSample& w);
double l2_distance(const WaveSample& a, const WaveSample& b);
double max_abs_diff(const WaveSample& a, const WaveSample& b);

/// CSV with header x,re,im,abs2.
void write_wave_csv(std::ostream& out, const WaveSample& w);

}  // namespace phinv
