#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "cvw/errors.hpp"

namespace cvw {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

// Numerical tolerances shared by all modules.
struct Tolerances {
  double psd = 1e-10;       // minimum eigenvalue slack for PSD tests
  double boundary = 1e-9;   // |lhs| band reported as Boundary
};

// Block-diagonal symplectic form for n modes, (x1,p1,...,xn,pn) ordering.
Mat symplectic_form(int n_modes);

// Real symmetric covariance matrix with vacuum variance 1/2.
class CovMatrix {
 public:
  CovMatrix() = default;
  // Throws DimensionMismatch for non-square/odd input and InvalidInput when
  // the matrix is not symmetric up to rounding.  The stored matrix is
  // exactly symmetric.
  explicit CovMatrix(const Mat& m);

  static CovMatrix vacuum(int n_modes);
  static CovMatrix thermal(int n_modes, double nbar);
  // Two-mode squeezed vacuum with squeezing r (modes 0 and 1).
  static CovMatrix tmsv(double r);

  int n_modes() const { return static_cast<int>(m_.rows() / 2); }
  const Mat& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Mat m_;
};

struct ValidityReport {
  bool is_symmetric = false;
  double min_eig = 0.0;  // minimum eigenvalue of gamma + i sigma / 2
  bool is_physical = false;
};

ValidityReport validate_cm(const Mat& gamma, double tol_psd = 1e-10);
inline ValidityReport validate_cm(const CovMatrix& g, double tol_psd = 1e-10) {
  return validate_cm(g.matrix(), tol_psd);
}

// Complex covariance matrix over (mu_1..mu_n, mu_1*..mu_n*).
struct ComplexCovMatrix {
  int n_modes = 0;
  CMat m;
};

// Linear map z = T (mu, mu*)^T induced by mu_j = (-z_{2j} + i z_{2j-1})/sqrt2
// (1-based indices).  T is unitary.
CMat ccm_transform(int n_modes);
ComplexCovMatrix to_ccm(const CovMatrix& g);
// Inverse conversion; throws InvalidInput if the result is not real.
CovMatrix from_ccm(const ComplexCovMatrix& g);

// (mu, mu*) stacked vector for a real quadrature vector z, and back.
CVec z_to_mu(const Vec& z);
Vec mu_to_z(const CVec& mu);

// exp(-1/2 z gamma z^T)
double characteristic(const CovMatrix& g, const Vec& z);
// exp(-1/2 (mu,mu*) gt (mu,mu*)^T) with mu given for the n modes only.
cd characteristic_ccm(const ComplexCovMatrix& gt, const CVec& mu);

// Symplectic spectrum (ascending, one value per mode).
Vec symplectic_eigenvalues(const Mat& gamma);

// gamma = S diag(nu1,nu1,...,nun,nun) S^T with S symplectic.
struct Williamson {
  Vec nu;
  Mat S;
};
Williamson williamson(const Mat& gamma);

// Local symplectic transformation with a record of the party split.
struct LocalSymplectic {
  Mat S;
  std::vector<int> party_a;  // modes of party A
  bool is_symplectic(double tol = 1e-12) const;
  bool is_local(double tol = 0.0) const;
};

struct TwoModeStandardForm {
  double a = 0.5, b = 0.5, c1 = 0.0, c2 = 0.0;
  Mat to_cm() const;
};

struct WernerWolfForm {
  double A = 0.5, B = 0.5, C = 0.5, D = 0.5, E = 0.0, F = 0.0;
  Mat to_cm() const;
};

enum class Family { TwoMode, WernerWolf };

// Residual of gamma against the Werner-Wolf sparsity and sign pattern.
double werner_wolf_pattern_residual(const Mat& gamma);

// Reorders modes so that party A comes first.  Returns the permuted matrix.
Mat reorder_party_first(const Mat& gamma, const std::vector<int>& party_a);

struct TwoModeReduction {
  TwoModeStandardForm form;
  LocalSymplectic S;
};
struct WernerWolfReduction {
  WernerWolfForm form;
  LocalSymplectic S;
};

// gamma must have party A = mode 0 (use reorder_party_first beforehand).
TwoModeReduction reduce_two_mode(const CovMatrix& g);
// gamma must have party A = modes 0,1 and follow the Werner-Wolf pattern up
// to equal local squeezes; the result has A = B and C = D.
WernerWolfReduction reduce_werner_wolf(const CovMatrix& g);

// 1/sqrt|det(g1 + g2)|: overlap Tr(rho1 rho2) of zero-mean Gaussian operators.
double gaussian_overlap(const Mat& g1, const Mat& g2);
inline double gaussian_overlap(const CovMatrix& g1, const CovMatrix& g2) {
  return gaussian_overlap(g1.matrix(), g2.matrix());
}

// Symmetric product squeezed vacuum 1/2 diag(x,1/x) (+) 1/2 diag(y,1/y) on
// the x/p quadratures of each party.  For Werner-Wolf both modes of a party
// share the same parameter.
Mat product_squeezed_cm(Family fam, double x, double y);

}  // namespace cvw
