#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvw/core.hpp"
#include "cvw/witness.hpp"

namespace cvw {

// log(n!) from a table covering n <= 512.
double log_factorial(int n);

// <m|D(mu)|k> from the finite Hermite-type sum, evaluated in log space.
cd displacement_element(int m, int k, cd mu);
// Matrix of <m|D(mu)|k> for m, k < cutoff.
CMat displacement_matrix(int cutoff, cd mu);

// Dense operator on n modes; basis index is row-major over the per-mode
// levels (mode 0 slowest).
struct FockOperator {
  int n_modes = 0;
  std::vector<int> cutoffs;
  CMat data;

  std::size_t dim() const { return static_cast<std::size_t>(data.rows()); }
  double trace_real() const { return data.trace().real(); }
  double hermiticity_residual() const;
};

// Raw Fock elements <m|G|n> of the unit-trace Gaussian operator with CM
// gamma, for any gamma with gamma + I/2 positive definite.  cuts holds 2n
// cutoffs: the bra levels of modes 0..n-1 followed by the ket levels.  The
// result is row-major over (m_1..m_n, n_1..n_n).
std::vector<cd> gaussian_fock_elements(const Mat& gamma, const std::vector<int>& cuts);

// Dense Fock matrix of a physical Gaussian operator.  Throws
// CutoffTooSmall when the mass outside the truncation exceeds tail_tol.
FockOperator gaussian_op_fock(const Mat& gamma, int cutoff, double tail_tol = 1e-6);
FockOperator gaussian_op_fock(const DetectorSpec& d, int cutoff, double tail_tol = 1e-6);

// Mixture sum_i w_i |v_i><v_i| of truncated vectors, built from the
// thermal decomposition of a Gaussian state.
struct LowRankOperator {
  int n_modes = 0;
  int cutoff = 0;
  std::vector<double> weights;
  std::vector<CVec> vectors;
  double dropped = 0.0;  // thermal weight not represented
  double tail = 0.0;     // represented weight outside the truncation

  std::size_t dim() const;
  FockOperator dense() const;
};
LowRankOperator gaussian_low_rank(const Mat& gamma, int cutoff, double drop_tol = 1e-5,
                                  double tail_tol = 1e-6);
LowRankOperator gaussian_low_rank(const DetectorSpec& d, int cutoff, double drop_tol = 1e-5,
                                  double tail_tol = 1e-6);

// Pure Gaussian state with CM gamma (zero mean) on a uniform cutoff.
CVec pure_gaussian_state(const Mat& gamma, int cutoff);

struct SeesawOptions {
  int restarts = 5;  // random starts in addition to the vacuum start
  std::uint64_t seed = 1;
  int max_iter = 500;
  double tol = 1e-12;
};

struct SeesawResult {
  double lambda = 0.0;
  CVec psi_a, psi_b;
  int iterations = 0;
  bool converged = false;
  bool monotone = true;  // objective never decreased beyond roundoff
};

// Alternating maximization of <psi_a psi_b|M|psi_a psi_b>.  Party A holds
// the first n_modes_a modes.
SeesawResult seesaw_lambda(const FockOperator& m, int n_modes_a, const SeesawOptions& opt = {});
SeesawResult seesaw_lambda(const LowRankOperator& m, int n_modes_a,
                           const SeesawOptions& opt = {});
// Single alternating run from a given B-side start vector.
SeesawResult seesaw_from(const FockOperator& m, int n_modes_a, const CVec& psi_b0,
                         int max_iter = 500, double tol = 1e-12);
SeesawResult seesaw_from(const LowRankOperator& m, int n_modes_a, const CVec& psi_b0,
                         int max_iter = 500, double tol = 1e-12);

// Tr(state * M).
double fock_mean(const FockOperator& m, const FockOperator& state);

// Fidelity of psi_a (x) psi_b with the product squeezed vacuum at (x, y)
// of the family: each mode of A squeezed by x, each mode of B by y.
double product_fidelity(const SeesawResult& s, int n_modes_a, int n_modes_b, int cutoff,
                        double x, double y);

// Binary dump: uint64 dimension, then dim*dim complex doubles row-major,
// little-endian.
void dump_matrix(const CMat& m, const std::string& path);
CMat load_matrix(const std::string& path);

}  // namespace cvw
