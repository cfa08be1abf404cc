#pragma once

#include <vector>

#include "cvw/core.hpp"
#include "cvw/witness.hpp"

namespace cvw {

// chi_out(z) = chi_in(K z) exp(-z alpha z / 2), equivalently
// gamma_out = K^T gamma_in K + alpha for Gaussian inputs.
struct GaussianChannel {
  Mat K;
  Mat alpha;
  double m3prime = 0.0;  // M3 + 1/2 of the detector, 0 if not detector-derived
  Family family = Family::TwoMode;
  DetectorSpec source;
  bool covariant() const { return K.determinant() > 0; }
};

// Channel on the kept party obtained by feeding the traced party.  Requires
// M1 = M2 and M3 = M4 and M3' > 1 (DegenerateLimit otherwise).  traced_party
// is 1 (the M3 side) or 0.
GaussianChannel detector_to_channel(const DetectorSpec& d, int traced_party = 1);

struct CpReport {
  bool is_cp = false;
  double min_eig = 0.0;
};
// Minimum eigenvalue of alpha + (i/2)(sigma - K^T sigma K).
CpReport cp_check(const GaussianChannel& ch, double tol_psd = 1e-10);

CovMatrix apply_to_gaussian(const GaussianChannel& ch, const CovMatrix& g);

// Exact output characteristic function for the input |k><m| on the traced
// mode of a two-mode detector.  Mode 1 is traced.
cd channel_exact_chi(const DetectorSpec& d, int k, int m, cd nu);
// Large-M3 form chi_in(K z) exp(-z alpha z / 2) / M3'^(modes).
cd channel_limit_chi(const GaussianChannel& ch, const std::vector<int>& k,
                     const std::vector<int>& m, const CVec& nu);

struct ChannelDeviation {
  double exact = 0.0;      // closed-form output vs Fock (two-mode only)
  double limit = 0.0;      // channel form vs Fock
  double max_abs_fock = 0.0;
  std::vector<CVec> grid;  // sample points, one complex entry per kept mode
};
// Compares both forms against the truncated Fock partial trace on a seeded
// grid of 20 points.  For the Werner-Wolf family k and m hold two levels.
ChannelDeviation channel_output_vs_fock(const DetectorSpec& d, const std::vector<int>& k,
                                        const std::vector<int>& m, int cutoff,
                                        std::uint64_t seed = 1, int points = 20);

struct SimultaneousDiag {
  Mat O;              // orthogonal
  Vec k_diag, alpha_diag;
  double residual = 0.0;  // largest off-diagonal of O^T K O and O^T alpha O
};
// Requires symmetric commuting K and alpha.
SimultaneousDiag simultaneous_diagonalize(const Mat& K, const Mat& alpha, double tol = 1e-10);
double commutator_norm(const Mat& a, const Mat& b);

// Compares cp_check with the condition "detector physical when det K > 0,
// detector separable when det K < 0".
struct CpClaimAudit {
  bool is_cp = false;
  bool covariant = false;
  bool claimed = false;
  bool agrees() const { return is_cp == claimed; }
};
CpClaimAudit cp_claim_audit(const DetectorSpec& d);

}  // namespace cvw
