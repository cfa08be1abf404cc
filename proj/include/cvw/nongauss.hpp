#pragma once

#include <vector>

#include "cvw/core.hpp"
#include "cvw/criteria.hpp"
#include "cvw/witness.hpp"

namespace cvw {

constexpr int kMaxLadderOrder = 8;

// Weight w of the shift gt_{G+-} = gt_G +- w (sigma_1 (x) I_n).  The value
// 1/2 matches the Fock construction; 1 is kept only to demonstrate the
// mismatch in tests.
constexpr double kSigma1Weight = 0.5;

// rho = N a^dag^k a^m rho_G a^dag^m a^k (multi-index powers).
class NonGaussState {
 public:
  NonGaussState(CovMatrix kernel, std::vector<int> add, std::vector<int> subtract);

  const CovMatrix& kernel() const { return kernel_; }
  const std::vector<int>& add() const { return add_; }
  const std::vector<int>& subtract() const { return subtract_; }
  int n_modes() const { return kernel_.n_modes(); }
  int order() const;  // |k| + |m|
  // 1 / O chi_Q(0, xi, eta); throws DegeneratePreparation when it vanishes.
  double normalization() const;

 private:
  CovMatrix kernel_;
  std::vector<int> add_, subtract_;
  mutable double norm_ = 0.0;
};

// Quadratic exponents over v = (xi, xi*, eta, eta*): chi_Q(0, xi, eta) =
// exp(v q0 v / 2) and chi_Q(0) exp f = exp(v qf v / 2).
struct QuadraticGenerator {
  CMat q0, qf;
  cd chi_q(const CVec& v) const;  // exp(v q0 v / 2)
  cd f(const CVec& v) const;      // v (qf - q0) v / 2
};
QuadraticGenerator quadratic_generator(const CovMatrix& kernel, const Mat& gamma_m,
                                       double sigma1_weight = kSigma1Weight);

// chi_Q(mu, xi, eta) = Tr[Q(xi, eta) D(mu)] with
// Q = e^{xi a^dag} e^{-eta* a} rho_G e^{eta a^dag} e^{-xi* a}.
cd q_char(const CovMatrix& kernel, const CVec& xi, const CVec& eta, const CVec& mu,
          double sigma1_weight = kSigma1Weight);

// Coefficient of prod v_i^{t_i} in exp(v q v / 2).
cd exp_quadratic_coefficient(const CMat& q, const std::vector<int>& t);

double mean_on_detector(const NonGaussState& s, const Mat& gamma_m,
                        double sigma1_weight = kSigma1Weight);
double mean_on_detector(const NonGaussState& s, const DetectorSpec& d);

// |Tr(rho M_t) sqrt|det(gamma_G + t gamma_M0)| - 1| for each t.
std::vector<double> asymptotic_check(const NonGaussState& s, const Mat& gamma_m0,
                                     const std::vector<double>& scales);

// Independent Fock evaluation: ladder operators applied to the truncated
// kernel, renormalized, traced against the detector's Fock matrix.
double fock_direct_trace(const NonGaussState& s, const Mat& gamma_m, int cutoff);
double fock_direct_trace(const NonGaussState& s, const DetectorSpec& d, int cutoff);
// The normalized state itself on the truncation.
CMat fock_state(const NonGaussState& s, int cutoff);

// Kernel-level decision: the criterion applied to gamma_G.
CriterionReport decide_separability_nongauss(const NonGaussState& s,
                                             const std::vector<int>& party_a,
                                             const Tolerances& tol = {});

}  // namespace cvw
