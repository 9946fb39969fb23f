#include "phinv/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include "json.hpp"

#include "phinv/error.hpp"
#include "phinv/specfun.hpp"

namespace phinv {

namespace {

constexpr cplx I{0.0, 1.0};

double max_norm(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double one_norm(const Matrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

OpMatrix OpMatrix::hermitian(Matrix m, double t, std::string label) {
  double asym = max_norm(m - m.adjoint());
  if (!(asym < 1e-12)) {
    throw NumericalError(label + " is not Hermitian (asymmetry " + std::to_string(asym) + ")");
  }
  return OpMatrix{std::move(m), t, std::move(label)};
}

std::pair<OpMatrix, OpMatrix> fock_xp(int D, double m, double omega_ref, double hbar) {
  if (D < 16) throw ValidationError("Fock dimension must be at least 16");
  if (!(omega_ref > 0.0)) throw ValidationError("omega_ref must be positive");
  Matrix a = Matrix::Zero(D, D);
  for (int k = 1; k < D; ++k) a(k - 1, k) = std::sqrt(double(k));
  Matrix ad = a.adjoint();
  const double sx = std::sqrt(hbar / (2.0 * m * omega_ref));
  const double sp = std::sqrt(m * hbar * omega_ref / 2.0);
  Matrix X = sx * (a + ad);
  Matrix P = I * sp * (ad - a);
  return {OpMatrix::hermitian(std::move(X), 0.0, "X"), OpMatrix::hermitian(std::move(P), 0.0, "P")};
}

Matrix matrix_exp(const Matrix& A) {
  constexpr double theta = 0.5;
  constexpr int max_squarings = 60;
  const Eigen::Index n = A.rows();
  double norm = one_norm(A);
  if (!std::isfinite(norm)) throw NumericalError("matrix_exp: non-finite argument");
  int squarings = 0;
  if (norm > theta) squarings = static_cast<int>(std::ceil(std::log2(norm / theta)));
  if (squarings > max_squarings) {
    throw NumericalError("matrix_exp: norm " + std::to_string(norm) +
                         " needs more than 60 squarings");
  }
  Matrix B = A / std::ldexp(1.0, squarings);
  Matrix sum = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = (term * B) / double(k);
    sum += term;
    if (one_norm(term) <= 1e-18 * one_norm(sum)) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  if (!sum.allFinite()) throw NumericalError("matrix_exp: overflow");
  return sum;
}

OpMatrix matrix_exp(const OpMatrix& A) { return OpMatrix{matrix_exp(A.entries), A.t, "exp(" + A.label + ")"}; }

Matrix inverse(const Matrix& A) {
  return A.partialPivLu().solve(Matrix::Identity(A.rows(), A.cols()));
}

double condition_number(const Matrix& A) { return one_norm(A) * one_norm(inverse(A)); }

double interior_max(const Matrix& R, int band) {
  const Eigen::Index k = R.rows() - band;
  if (k <= 0) return 0.0;
  return max_norm(R.topLeftCorner(k, k));
}

// ---------------------------------------------------------------------------

FockModel::FockModel(const Scenario& s, const AuxTrace& aux, const Hamiltonian& h, int dim,
                     int edge_band)
    : s_(s), aux_(aux), h_(h) {
  dim_ = dim > 0 ? dim : s.fock_dim;
  if (edge_band > 0) {
    band_ = edge_band;
  } else if (s.edge_band > 0) {
    band_ = s.edge_band;
  } else {
    band_ = dim_ / 8;
  }
  if (band_ >= dim_) throw ValidationError("edge band must be smaller than the Fock dimension");
  double wref = s.omega_ref.value_or(s.omega.value(s.t0));
  auto [X, P] = fock_xp(dim_, s.mass, wref, s.hbar);
  X_ = std::move(X);
  P_ = std::move(P);
  XX_ = X_.entries * X_.entries;
  PP_ = P_.entries * P_.entries;
  XP_PX_ = X_.entries * P_.entries + P_.entries * X_.entries;
}

AuxPoint FockModel::aux(double t) const { return aux_at(s_, aux_, t); }

OpMatrix FockModel::build_H(double t) const {
  const double m = h_.mass;
  const double w = h_.eval_omega(t);
  Matrix H = PP_ / (2.0 * m) + 0.5 * m * w * w * XX_ + I * h_.eval_lambda(t) * X_.entries;
  return OpMatrix{std::move(H), t, "H"};
}

Matrix FockModel::metric_exponent(double t) const {
  AuxPoint a = aux(t);
  return (-a.alpha * P_.entries + s_.mass * a.alpha_dot * X_.entries) / s_.hbar;
}

Matrix FockModel::eta_unchecked(double t) const { return matrix_exp(metric_exponent(t)); }

OpMatrix FockModel::build_eta(double t) const {
  Matrix eta = eta_unchecked(t);
  Matrix herm = 0.5 * (eta + eta.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  // Eigenvalues below the roundoff floor of the largest one are unresolved, not negative.
  double floor = dim_ * std::numeric_limits<double>::epsilon() * std::abs(hi);
  if (!(lo > -floor) || !(hi > 0.0)) {
    throw NumericalError("metric lost positivity at t=" + std::to_string(t) +
                         " (smallest eigenvalue " + std::to_string(lo) +
                         "); increase the Fock dimension or shorten the run");
  }
  return OpMatrix{std::move(eta), t, "eta"};
}

OpMatrix FockModel::build_eta_inv(double t) const {
  return OpMatrix{matrix_exp(Matrix(-metric_exponent(t))), t, "eta^-1"};
}

OpMatrix FockModel::build_rho(double t) const {
  return OpMatrix{matrix_exp(Matrix(0.5 * metric_exponent(t))), t, "rho"};
}

OpMatrix FockModel::build_rho_inv(double t) const {
  return OpMatrix{matrix_exp(Matrix(-0.5 * metric_exponent(t))), t, "rho^-1"};
}

OpMatrix FockModel::build_Ih(double t) const {
  AuxPoint a = aux(t);
  const double m = s_.mass;
  const double sg = a.sigma;
  const double sd = a.sigma_dot;
  Matrix Ih = 0.5 * (sg * sg * PP_ - m * sg * sd * XP_PX_ + (1.0 / (sg * sg) + m * m * sd * sd) * XX_);
  return OpMatrix{std::move(Ih), t, "I_h"};
}

OpMatrix FockModel::build_IPH(double t) const {
  AuxPoint a = aux(t);
  const double m = s_.mass;
  const double sg = a.sigma;
  const double sd = a.sigma_dot;
  const Eigen::Index D = dim_;
  Matrix Xs = X_.entries - I * (a.alpha / 2.0) * Matrix::Identity(D, D);
  Matrix Ps = P_.entries - I * (m * a.alpha_dot / 2.0) * Matrix::Identity(D, D);
  Matrix IpH = 0.5 * (sg * sg * Ps * Ps - m * sg * sd * (Ps * Xs + Xs * Ps) +
                      (1.0 / (sg * sg) + m * m * sd * sd) * Xs * Xs);
  return OpMatrix{std::move(IpH), t, "I_PH"};
}

OpMatrix FockModel::build_h(double t) const {
  AuxPoint a = aux(t);
  const double m = h_.mass;
  const double w = h_.eval_omega(t);
  const Eigen::Index D = dim_;
  Matrix h = PP_ / (2.0 * m) + 0.5 * m * w * w * XX_ -
             (h_.eval_lambda(t) * a.alpha / 4.0) * Matrix::Identity(D, D);
  return OpMatrix{std::move(h), t, "h"};
}

OpMatrix FockModel::build_rho_H_rho_inv(double t) const {
  AuxPoint a = aux(t);
  const double m = h_.mass;
  const double w = h_.eval_omega(t);
  const double lam = h_.eval_lambda(t);
  const Eigen::Index D = dim_;
  const double scalar =
      m * a.alpha_dot * a.alpha_dot / 8.0 + m * a.alpha * a.alpha * w * w / 8.0 + a.alpha * lam / 2.0;
  Matrix r = PP_ / (2.0 * m) + 0.5 * m * w * w * XX_ +
             I * (lam + 0.5 * m * a.alpha * w * w) * X_.entries + I * (a.alpha_dot / 2.0) * P_.entries -
             scalar * Matrix::Identity(D, D);
  return OpMatrix{std::move(r), t, "rho H rho^-1"};
}

CheckResidual FockModel::check_ph_relation(double t, double dt) const {
  Matrix H = build_H(t).entries;
  Matrix eta = eta_unchecked(t);
  Matrix eta_inv = build_eta_inv(t).entries;
  Matrix eta_dot = (eta_unchecked(t + dt) - eta_unchecked(t - dt)) / (2.0 * dt);
  Matrix R = H.adjoint() - eta * H * eta_inv - I * s_.hbar * eta_dot * eta_inv;
  return {interior_max(R, band_), condition_number(eta)};
}

CheckResidual FockModel::check_ph_relation_eta_form(double t, double dt) const {
  Matrix H = build_H(t).entries;
  Matrix eta = eta_unchecked(t);
  Matrix eta_dot = (eta_unchecked(t + dt) - eta_unchecked(t - dt)) / (2.0 * dt);
  Matrix R = H.adjoint() * eta - eta * H - I * s_.hbar * eta_dot;
  double scale = interior_max(eta, band_);
  return {interior_max(R, band_) / scale, condition_number(eta)};
}

CheckResidual FockModel::check_static_pseudo_hermiticity(double t) const {
  Matrix H = build_H(t).entries;
  Matrix eta = eta_unchecked(t);
  Matrix eta_inv = build_eta_inv(t).entries;
  Matrix R = H.adjoint() - eta * H * eta_inv;
  return {interior_max(R, band_), condition_number(eta)};
}

CheckResidual FockModel::check_liouville(double t, double dt) const {
  Matrix Ip = build_IPH(t).entries;
  Matrix H = build_H(t).entries;
  Matrix dI = (build_IPH(t + dt).entries - build_IPH(t - dt).entries) / (2.0 * dt);
  Matrix R = dI - (I / s_.hbar) * (Ip * H - H * Ip);
  return {interior_max(R, band_), 0.0};
}

CheckResidual FockModel::check_liouville_hermitian(double t, double dt) const {
  Matrix Ih = build_Ih(t).entries;
  Matrix h = build_h(t).entries;
  Matrix dI = (build_Ih(t + dt).entries - build_Ih(t - dt).entries) / (2.0 * dt);
  Matrix R = dI - (I / s_.hbar) * (Ih * h - h * Ih);
  return {interior_max(R, band_), 0.0};
}

SimilarityResidual FockModel::check_similarity(double t, double dt) const {
  SimilarityResidual out;
  Matrix rho = build_rho(t).entries;
  Matrix rho_inv = build_rho_inv(t).entries;
  Matrix H = build_H(t).entries;
  Matrix inv = rho * build_IPH(t).entries * rho_inv - build_Ih(t).entries;
  out.invariant = interior_max(inv, band_);

  Matrix rho_dot = (build_rho(t + dt).entries - build_rho(t - dt).entries) / (2.0 * dt);
  Matrix sim = rho * H * rho_inv;
  Matrix h = sim + I * s_.hbar * rho_dot * rho_inv;
  out.hermiticity = interior_max(h - h.adjoint(), band_);
  out.explicit_form = interior_max(sim - build_rho_H_rho_inv(t).entries, band_);
  out.condition_eta = condition_number(eta_unchecked(t));
  return out;
}

SpectrumReport FockModel::spectrum(double t, int count) const {
  SpectrumReport rep;
  auto lowest = [count](const Eigen::VectorXcd& ev) {
    std::vector<cplx> v(ev.data(), ev.data() + ev.size());
    std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    v.resize(std::min<size_t>(v.size(), static_cast<size_t>(count)));
    return v;
  };
  Eigen::ComplexEigenSolver<Matrix> es_p(build_IPH(t).entries, false);
  rep.ipH = lowest(es_p.eigenvalues());
  Eigen::SelfAdjointEigenSolver<Matrix> es_h(build_Ih(t).entries, Eigen::EigenvaluesOnly);
  for (int k = 0; k < count && k < es_h.eigenvalues().size(); ++k) rep.ih.push_back(es_h.eigenvalues()[k]);
  // h assembled from the similarity transform, restricted to the interior block.
  const double dt = s_.dt_fd;
  Matrix rho_dot = (build_rho(t + dt).entries - build_rho(t - dt).entries) / (2.0 * dt);
  Matrix rho_inv = build_rho_inv(t).entries;
  Matrix h = build_rho(t).entries * build_H(t).entries * rho_inv + I * s_.hbar * rho_dot * rho_inv;
  const Eigen::Index k = dim_ - band_;
  Eigen::ComplexEigenSolver<Matrix> es_hh(h.topLeftCorner(k, k), false);
  rep.h = lowest(es_hh.eigenvalues());

  for (size_t k = 0; k < rep.ipH.size(); ++k) {
    double expect = s_.hbar * (k + 0.5);
    rep.max_imag_ipH = std::max(rep.max_imag_ipH, std::abs(rep.ipH[k].imag()));
    rep.max_rel_dev = std::max(rep.max_rel_dev, std::abs(rep.ipH[k].real() / expect - 1.0));
    if (k < rep.ih.size()) {
      rep.max_ipH_ih_diff = std::max(rep.max_ipH_ih_diff, std::abs(rep.ipH[k] - rep.ih[k]));
    }
  }
  for (cplx v : rep.h) rep.max_imag_h = std::max(rep.max_imag_h, std::abs(v.imag()));
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<cplx> grid_apply_Ih(const WaveSample& psi, const Scenario& s, const AuxPoint& a) {
  const Grid& g = psi.grid;
  const double dx = g.dx();
  const double hb = s.hbar;
  const double m = s.mass;
  const double sg = a.sigma;
  const double sd = a.sigma_dot;
  const auto& f = psi.values;
  std::vector<cplx> out(g.N, 0.0);
  for (int j = 2; j + 2 < g.N; ++j) {
    cplx d1 = (-f[j + 2] + 8.0 * f[j + 1] - 8.0 * f[j - 1] + f[j - 2]) / (12.0 * dx);
    cplx d2 = (-f[j + 2] + 16.0 * f[j + 1] - 30.0 * f[j] + 16.0 * f[j - 1] - f[j - 2]) /
              (12.0 * dx * dx);
    double x = g.x(j);
    cplx p2 = -hb * hb * d2;
    cplx xp_px = -I * hb * (2.0 * x * d1 + f[j]);
    out[j] = 0.5 * (sg * sg * p2 - m * sg * sd * xp_px + (1.0 / (sg * sg) + m * m * sd * sd) * x * x * f[j]);
  }
  return out;
}

std::string residual_report_json(const std::vector<ResidualRecord>& records) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["check"] = r.check;
    j["t"] = r.t;
    j["dim"] = r.dim;
    j["dt"] = r.dt;
    j["edge_band"] = r.edge_band;
    j["residual"] = r.residual;
    j["condition_eta"] = r.condition_eta;
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace phinv
