#include "phinv/wave.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "phinv/error.hpp"

namespace phinv {

Grid Grid::make(double L, int N) {
  if (!(L > 0.0) || !std::isfinite(L)) throw GridError("grid half-extent L must be positive");
  if (N < 128) throw GridError("grid needs at least 128 points, got " + std::to_string(N));
  return Grid{L, N};
}

std::vector<double> Grid::points() const {
  std::vector<double> xs(N);
  for (int j = 0; j < N; ++j) xs[j] = x(j);
  return xs;
}

void check_edge_decay(const WaveSample& w, double bound) {
  if (w.values.empty()) throw GridError("empty wave sample");
  double left = std::abs(w.values.front());
  double right = std::abs(w.values.back());
  if (!(left < bound) || !(right < bound)) {
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "state not contained in [-%g, %g] at t=%g: edge amplitudes %.3e, %.3e exceed %.0e",
                  w.grid.L, w.grid.L, w.t, left, right, bound);
    throw GridError(buf);
  }
}

namespace {

void require_same_grid(const WaveSample& a, const WaveSample& b) {
  if (!(a.grid == b.grid) || a.values.size() != b.values.size()) {
    throw GridError("wave samples live on different grids");
  }
}

}  // namespace

cplx inner(const WaveSample& a, const WaveSample& b) {
  require_same_grid(a, b);
  const size_t n = a.values.size();
  cplx sum = 0.0;
  for (size_t j = 0; j < n; ++j) {
    double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
    sum += w * std::conj(a.values[j]) * b.values[j];
  }
  return sum * a.grid.dx();
}

double norm2(const WaveSample& w) { return inner(w, w).real(); }

double l2_distance(const WaveSample& a, const WaveSample& b) {
  require_same_grid(a, b);
  const size_t n = a.values.size();
  double sum = 0.0;
  for (size_t j = 0; j < n; ++j) {
    double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
    sum += w * std::norm(a.values[j] - b.values[j]);
  }
  return std::sqrt(sum * a.grid.dx());
}

double max_abs_diff(const WaveSample& a, const WaveSample& b) {
  require_same_grid(a, b);
  double m = 0.0;
  for (size_t j = 0; j < a.values.size(); ++j) m = std::max(m, std::abs(a.values[j] - b.values[j]));
  return m;
}

void write_wave_csv(std::ostream& out, const WaveSample& w) {
  out << "x,re,im,abs2\n";
  char buf[160];
  for (int j = 0; j < w.grid.N; ++j) {
    cplx v = w.values[j];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", w.grid.x(j), v.real(), v.imag(),
                  std::norm(v));
    out << buf;
  }
}

}  // namespace phinv
