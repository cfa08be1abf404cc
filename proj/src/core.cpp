#include "cvw/core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace cvw {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void check_square_even(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0) {
    throw DimensionMismatch("covariance matrix must be square with even size");
  }
}

Eigen::Matrix2d rot_to_det_one(Eigen::Matrix2d v) {
  if (v.determinant() < 0) v.col(1) = -v.col(1);
  return v;
}

}  // namespace

Mat symplectic_form(int n_modes) {
  Mat s = Mat::Zero(2 * n_modes, 2 * n_modes);
  for (int j = 0; j < n_modes; ++j) {
    s(2 * j, 2 * j + 1) = 1.0;
    s(2 * j + 1, 2 * j) = -1.0;
  }
  return s;
}

CovMatrix::CovMatrix(const Mat& m) {
  check_square_even(m);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidInput("covariance matrix is not symmetric");
  }
  m_ = 0.5 * (m + m.transpose());
}

CovMatrix CovMatrix::vacuum(int n_modes) {
  return CovMatrix(0.5 * Mat::Identity(2 * n_modes, 2 * n_modes));
}

CovMatrix CovMatrix::thermal(int n_modes, double nbar) {
  return CovMatrix((nbar + 0.5) * Mat::Identity(2 * n_modes, 2 * n_modes));
}

CovMatrix CovMatrix::tmsv(double r) {
  TwoModeStandardForm f;
  f.a = f.b = std::cosh(2 * r) / 2;
  f.c1 = f.c2 = std::sinh(2 * r) / 2;
  return CovMatrix(f.to_cm());
}

ValidityReport validate_cm(const Mat& gamma, double tol_psd) {
  check_square_even(gamma);
  ValidityReport rep;
  const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
  rep.is_symmetric = (gamma - gamma.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
  const int n = static_cast<int>(gamma.rows() / 2);
  CMat h = 0.5 * (gamma + gamma.transpose()).cast<cd>();
  h += cd(0, 0.5) * symplectic_form(n).cast<cd>();
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  rep.min_eig = es.eigenvalues().minCoeff();
  rep.is_physical = rep.is_symmetric && rep.min_eig >= -tol_psd;
  return rep;
}

CMat ccm_transform(int n) {
  CMat t = CMat::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    // x_j = sqrt2 Im mu_j, p_j = -sqrt2 Re mu_j
    t(2 * j, j) = cd(0, -kInvSqrt2);
    t(2 * j, n + j) = cd(0, kInvSqrt2);
    t(2 * j + 1, j) = -kInvSqrt2;
    t(2 * j + 1, n + j) = -kInvSqrt2;
  }
  return t;
}

ComplexCovMatrix to_ccm(const CovMatrix& g) {
  const int n = g.n_modes();
  CMat t = ccm_transform(n);
  return {n, t.transpose() * g.matrix().cast<cd>() * t};
}

CovMatrix from_ccm(const ComplexCovMatrix& g) {
  CMat t = ccm_transform(g.n_modes);
  // t is unitary, so t^{-T} = conj(t) and t^{-1} = t^H.
  CMat r = t.conjugate() * g.m * t.adjoint();
  const double scale = std::max(1.0, r.cwiseAbs().maxCoeff());
  if (r.imag().cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidInput("complex covariance matrix does not map to a real CM");
  }
  return CovMatrix(Mat(r.real()));
}

CVec z_to_mu(const Vec& z) {
  const int n = static_cast<int>(z.size() / 2);
  CVec mu(2 * n);
  for (int j = 0; j < n; ++j) {
    mu(j) = cd(-z(2 * j + 1), z(2 * j)) * kInvSqrt2;
    mu(n + j) = std::conj(mu(j));
  }
  return mu;
}

Vec mu_to_z(const CVec& mu) {
  const int n = static_cast<int>(mu.size() / 2);
  Vec z(2 * n);
  for (int j = 0; j < n; ++j) {
    z(2 * j) = std::sqrt(2.0) * mu(j).imag();
    z(2 * j + 1) = -std::sqrt(2.0) * mu(j).real();
  }
  return z;
}

double characteristic(const CovMatrix& g, const Vec& z) {
  return std::exp(-0.5 * z.dot(g.matrix() * z));
}

cd characteristic_ccm(const ComplexCovMatrix& gt, const CVec& mu) {
  const int n = gt.n_modes;
  CVec v(2 * n);
  v.head(n) = mu.head(n);
  v.tail(n) = mu.head(n).conjugate();
  cd q = (v.transpose() * gt.m * v)(0, 0);
  return std::exp(-0.5 * q);
}

Vec symplectic_eigenvalues(const Mat& gamma) {
  const int n = static_cast<int>(gamma.rows() / 2);
  CMat h = cd(0, 1) * (symplectic_form(n) * gamma).cast<cd>();
  Eigen::ComplexEigenSolver<CMat> es(h, false);
  std::vector<double> ev;
  for (int i = 0; i < 2 * n; ++i) ev.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(ev.begin(), ev.end());
  Vec nu(n);
  for (int j = 0; j < n; ++j) nu(j) = 0.5 * (ev[2 * j] + ev[2 * j + 1]);
  return nu;
}

Williamson williamson(const Mat& gamma) {
  const int n = static_cast<int>(gamma.rows() / 2);
  Eigen::SelfAdjointEigenSolver<Mat> eg(gamma);
  if (eg.eigenvalues().minCoeff() <= 0) {
    throw InvalidInput("Williamson decomposition needs a positive definite matrix");
  }
  Mat gh = eg.eigenvectors() * eg.eigenvalues().cwiseSqrt().asDiagonal() *
           eg.eigenvectors().transpose();
  Mat gih = eg.eigenvectors() * eg.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
            eg.eigenvectors().transpose();
  Mat k = gih * symplectic_form(n) * gih;
  // i*k is Hermitian; its positive eigenvalues are 1/nu_j.
  CMat ik = cd(0, 1) * k.cast<cd>();
  Eigen::SelfAdjointEigenSolver<CMat> es(ik);
  Williamson w;
  w.nu.resize(n);
  Mat z(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    const int col = 2 * n - 1 - j;  // largest eigenvalues first
    const double lam = es.eigenvalues()(col);
    CVec u = es.eigenvectors().col(col);
    Vec e = std::sqrt(2.0) * u.real();
    Vec f = std::sqrt(2.0) * u.imag();
    z.col(2 * j) = f;
    z.col(2 * j + 1) = e;
    w.nu(j) = 1.0 / lam;
  }
  Vec scale(2 * n);
  for (int j = 0; j < n; ++j) scale(2 * j) = scale(2 * j + 1) = 1.0 / std::sqrt(w.nu(j));
  w.S = gh * z * scale.asDiagonal();
  return w;
}

bool LocalSymplectic::is_symplectic(double tol) const {
  const int n = static_cast<int>(S.rows() / 2);
  Mat om = symplectic_form(n);
  return (S * om * S.transpose() - om).cwiseAbs().maxCoeff() < tol;
}

bool LocalSymplectic::is_local(double tol) const {
  const int n = static_cast<int>(S.rows() / 2);
  std::vector<bool> in_a(n, false);
  for (int m : party_a) in_a[m] = true;
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = 0; j < 2 * n; ++j) {
      if (in_a[i / 2] != in_a[j / 2] && std::abs(S(i, j)) > tol) return false;
    }
  }
  return true;
}

Mat TwoModeStandardForm::to_cm() const {
  Mat g = Mat::Zero(4, 4);
  g(0, 0) = g(1, 1) = a;
  g(2, 2) = g(3, 3) = b;
  g(0, 2) = g(2, 0) = c1;
  g(1, 3) = g(3, 1) = -c2;
  return g;
}

Mat WernerWolfForm::to_cm() const {
  Mat g = Mat::Zero(8, 8);
  const double d[8] = {A, B, A, B, C, D, C, D};
  for (int i = 0; i < 8; ++i) g(i, i) = d[i];
  g(0, 4) = g(4, 0) = E;
  g(2, 6) = g(6, 2) = -E;
  g(1, 7) = g(7, 1) = -F;
  g(3, 5) = g(5, 3) = -F;
  return g;
}

double werner_wolf_pattern_residual(const Mat& g) {
  if (g.rows() != 8 || g.cols() != 8) return INFINITY;
  WernerWolfForm f;
  f.A = g(0, 0);
  f.B = g(1, 1);
  f.C = g(4, 4);
  f.D = g(5, 5);
  f.E = g(0, 4);
  f.F = -g(1, 7);
  return (g - f.to_cm()).cwiseAbs().maxCoeff();
}

Mat reorder_party_first(const Mat& gamma, const std::vector<int>& party_a) {
  const int n = static_cast<int>(gamma.rows() / 2);
  std::vector<int> order;
  std::vector<bool> in_a(n, false);
  for (int m : party_a) {
    if (m < 0 || m >= n || in_a[m]) throw InvalidInput("invalid partition");
    in_a[m] = true;
    order.push_back(m);
  }
  for (int m = 0; m < n; ++m) {
    if (!in_a[m]) order.push_back(m);
  }
  Mat p = Mat::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    p(2 * k, 2 * order[k]) = 1.0;
    p(2 * k + 1, 2 * order[k] + 1) = 1.0;
  }
  return p * gamma * p.transpose();
}

TwoModeReduction reduce_two_mode(const CovMatrix& g) {
  if (g.n_modes() != 2) throw PatternMismatch("two-mode reduction needs a 4x4 CM");
  const Mat& m = g.matrix();
  Mat s = Mat::Identity(4, 4);

  // Step 1: per party, rotate the local block to diagonal form and squeeze
  // it to a multiple of the identity.
  for (int party = 0; party < 2; ++party) {
    const int o = 2 * party;
    Mat cur = s * m * s.transpose();
    Eigen::Matrix2d blk = cur.block<2, 2>(o, o);
    if (blk(0, 1) == 0.0 && blk(0, 0) == blk(1, 1)) continue;
    Eigen::Matrix2d loc = Eigen::Matrix2d::Identity();
    if (blk(0, 1) != 0.0) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(blk);
      Eigen::Matrix2d v = rot_to_det_one(es.eigenvectors());
      loc = v.transpose();
      blk = loc * blk * loc.transpose();
    }
    const double sq = std::pow(blk(1, 1) / blk(0, 0), 0.25);
    Eigen::Matrix2d squeeze = Eigen::Vector2d(sq, 1.0 / sq).asDiagonal();
    loc = squeeze * loc;
    Mat step = Mat::Identity(4, 4);
    step.block<2, 2>(o, o) = loc;
    s = step * s;
  }

  // Step 2: residual rotations diagonalize the cross block.  They leave the
  // local blocks (multiples of the identity) unchanged.
  Mat cur = s * m * s.transpose();
  Eigen::Matrix2d c = cur.block<2, 2>(0, 2);
  if (c(0, 1) != 0.0 || c(1, 0) != 0.0) {
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix2d u = svd.matrixU();
    Eigen::Matrix2d v = svd.matrixV();
    if (u.determinant() < 0) u.col(1) = -u.col(1);
    if (v.determinant() < 0) v.col(1) = -v.col(1);
    Mat step = Mat::Identity(4, 4);
    step.block<2, 2>(0, 0) = u.transpose();
    step.block<2, 2>(2, 2) = v.transpose();
    s = step * s;
    cur = s * m * s.transpose();
  }

  TwoModeReduction red;
  red.form.a = 0.5 * (cur(0, 0) + cur(1, 1));
  red.form.b = 0.5 * (cur(2, 2) + cur(3, 3));
  red.form.c1 = cur(0, 2);
  red.form.c2 = -cur(1, 3);
  red.S.S = s;
  red.S.party_a = {0};
  return red;
}

WernerWolfReduction reduce_werner_wolf(const CovMatrix& g) {
  if (g.n_modes() != 4) throw PatternMismatch("Werner-Wolf reduction needs an 8x8 CM");
  const Mat& m = g.matrix();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double res = werner_wolf_pattern_residual(m);
  if (res > 1e-10 * scale) {
    throw PatternMismatch("CM does not follow the Werner-Wolf pattern (residual " +
                          std::to_string(res) + ")");
  }
  const double A = m(0, 0), B = m(1, 1), C = m(4, 4), D = m(5, 5);
  const double sa = std::pow(B / A, 0.25);  // x -> sa x on both A modes
  const double sb = std::pow(D / C, 0.25);
  Vec d(8);
  d << sa, 1 / sa, sa, 1 / sa, sb, 1 / sb, sb, 1 / sb;
  WernerWolfReduction red;
  red.S.S = d.asDiagonal();
  red.S.party_a = {0, 1};
  Mat cur = red.S.S * m * red.S.S.transpose();
  red.form.A = cur(0, 0);
  red.form.B = cur(1, 1);
  red.form.C = cur(4, 4);
  red.form.D = cur(5, 5);
  red.form.E = cur(0, 4);
  red.form.F = -cur(1, 7);
  return red;
}

double gaussian_overlap(const Mat& g1, const Mat& g2) {
  if (g1.rows() != g2.rows() || g1.cols() != g2.cols()) {
    throw DimensionMismatch("overlap of CMs with different sizes");
  }
  const Mat s = g1 + g2;
  const Vec sv = Eigen::JacobiSVD<Mat>(s).singularValues();
  const double det = s.determinant();
  if (!std::isfinite(det) || !(sv(sv.size() - 1) > 1e-14 * sv(0))) {
    throw SingularSum("det(gamma1 + gamma2) vanishes");
  }
  return 1.0 / std::sqrt(std::abs(det));
}

Mat product_squeezed_cm(Family fam, double x, double y) {
  const int n = fam == Family::TwoMode ? 2 : 4;
  Mat g = Mat::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    const double s = j < n / 2 ? x : y;
    g(2 * j, 2 * j) = 0.5 * s;
    g(2 * j + 1, 2 * j + 1) = 0.5 / s;
  }
  return g;
}

}  // namespace cvw
