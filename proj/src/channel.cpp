#include "cvw/channel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "cvw/criteria.hpp"
#include "cvw/fock.hpp"

namespace cvw {

namespace {

DetectorSpec swap_parties(const DetectorSpec& d) {
  DetectorSpec s = d;
  s.M = {d.M[2], d.M[3], d.M[0], d.M[1], d.M[4], d.M[5]};
  return s;
}

CVec stacked(const CVec& nu) {
  const auto n = nu.size();
  CVec mu(2 * n);
  mu.head(n) = nu;
  mu.tail(n) = nu.conjugate();
  return mu;
}

// H_mk(u, v) = sum_l m! k! / ((m-l)! (k-l)! l!) (-1)^l u^(m-l) v^(k-l)
cd hermite_mk(int m, int k, cd u, cd v) {
  cd s(0, 0);
  for (int l = 0; l <= std::min(m, k); ++l) {
    const double c = std::exp(log_factorial(m) + log_factorial(k) - log_factorial(m - l) -
                              log_factorial(k - l) - log_factorial(l));
    s += c * ((l % 2 == 0) ? 1.0 : -1.0) * std::pow(u, m - l) * std::pow(v, k - l);
  }
  return s;
}

}  // namespace

GaussianChannel detector_to_channel(const DetectorSpec& d_in, int traced_party) {
  if (traced_party != 0 && traced_party != 1) throw InvalidInput("traced_party must be 0 or 1");
  const DetectorSpec d = traced_party == 1 ? d_in : swap_parties(d_in);
  const auto& M = d.M;
  const double scale = std::max({1.0, std::abs(M[0]), std::abs(M[2])});
  if (std::abs(M[0] - M[1]) > 1e-12 * scale || std::abs(M[2] - M[3]) > 1e-12 * scale) {
    throw InvalidInput("channel construction needs M1 = M2 and M3 = M4");
  }
  GaussianChannel ch;
  ch.family = d.family;
  ch.source = d_in;
  ch.m3prime = M[2] + 0.5;
  if (!(ch.m3prime > 1.0)) throw DegenerateLimit("M3' must exceed 1");
  const double kappa2 = ch.m3prime * (ch.m3prime - 1.0);
  const double kappa = std::sqrt(kappa2);
  const double a1 = M[0] - M[4] * M[4] * M[2] / kappa2;
  const double a2 = M[0] - M[5] * M[5] * M[2] / kappa2;
  if (d.family == Family::TwoMode) {
    ch.K = Mat::Zero(2, 2);
    ch.K(0, 0) = M[4] / kappa;
    ch.K(1, 1) = -M[5] / kappa;
    ch.alpha = Vec((Vec(2) << a1, a2).finished()).asDiagonal();
  } else {
    ch.K = Mat::Zero(4, 4);
    ch.K(0, 0) = M[4] / kappa;
    ch.K(1, 3) = -M[5] / kappa;
    ch.K(2, 2) = -M[4] / kappa;
    ch.K(3, 1) = -M[5] / kappa;
    ch.alpha = Vec((Vec(4) << a1, a2, a1, a2).finished()).asDiagonal();
  }
  return ch;
}

CpReport cp_check(const GaussianChannel& ch, double tol_psd) {
  if (ch.K.rows() != ch.alpha.rows() || ch.K.rows() % 2 != 0) {
    throw DimensionMismatch("K and alpha must be square of equal even size");
  }
  const int n = static_cast<int>(ch.K.rows() / 2);
  const Mat s = symplectic_form(n);
  CMat h = ch.alpha.cast<cd>() + cd(0, 0.5) * (s - ch.K.transpose() * s * ch.K).cast<cd>();
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  CpReport r;
  r.min_eig = es.eigenvalues().minCoeff();
  r.is_cp = r.min_eig >= -tol_psd;
  return r;
}

CovMatrix apply_to_gaussian(const GaussianChannel& ch, const CovMatrix& g) {
  if (g.matrix().rows() != ch.K.rows()) throw DimensionMismatch("channel and state sizes differ");
  return CovMatrix(ch.K.transpose() * g.matrix() * ch.K + ch.alpha);
}

cd channel_exact_chi(const DetectorSpec& d, int k, int m, cd nu) {
  if (d.family != Family::TwoMode) throw PatternMismatch("closed form is for two-mode detectors");
  const auto& M = d.M;
  const double m3p = M[2] + 0.5;
  if (!(m3p > 1.0)) throw DegenerateLimit("M3' must exceed 1");
  const double kappa = std::sqrt(m3p * (m3p - 1.0));
  const cd tau(M[5] * nu.real(), M[4] * nu.imag());
  const double pref = std::exp(-M[0] * std::norm(nu) + std::norm(tau) / m3p) *
                      std::pow(1.0 - 1.0 / m3p, 0.5 * (m + k)) /
                      (m3p * std::exp(0.5 * (log_factorial(m) + log_factorial(k))));
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * pref * hermite_mk(m, k, -std::conj(tau) / kappa, -tau / kappa);
}

cd channel_limit_chi(const GaussianChannel& ch, const std::vector<int>& k,
                     const std::vector<int>& m, const CVec& nu) {
  const int n = static_cast<int>(ch.K.rows() / 2);
  if (nu.size() != n || static_cast<int>(k.size()) != n || static_cast<int>(m.size()) != n) {
    throw DimensionMismatch("one level and one sample per mode");
  }
  const Vec z = mu_to_z(stacked(nu));
  const CVec mu_in = z_to_mu(ch.K * z);
  cd chi(1, 0);
  for (int j = 0; j < n; ++j) chi *= displacement_element(m[j], k[j], mu_in(j));
  return chi * std::exp(-0.5 * z.dot(ch.alpha * z)) / std::pow(ch.m3prime, n);
}

ChannelDeviation channel_output_vs_fock(const DetectorSpec& d, const std::vector<int>& k,
                                        const std::vector<int>& m, int cutoff,
                                        std::uint64_t seed, int points) {
  const int n = d.family == Family::TwoMode ? 1 : 2;
  if (static_cast<int>(k.size()) != n || static_cast<int>(m.size()) != n) {
    throw DimensionMismatch("input levels must match the traced party");
  }
  int top = 0;
  for (int j = 0; j < n; ++j) top = std::max({top, k[j], m[j]});
  if (cutoff < top + 10) throw CutoffTooSmall("cutoff must be at least max(k, m) + 10");
  const GaussianChannel ch = detector_to_channel(d, 1);

  // Bra levels (kept..., traced...) then ket levels.
  const int lvl = top + 1;
  std::vector<int> cuts;
  for (int rep = 0; rep < 2; ++rep) {
    for (int j = 0; j < n; ++j) cuts.push_back(cutoff);
    for (int j = 0; j < n; ++j) cuts.push_back(lvl);
  }
  const auto e = gaussian_fock_elements(d.cm(), cuts);
  std::vector<std::size_t> stride(cuts.size(), 1);
  for (int i = static_cast<int>(cuts.size()) - 2; i >= 0; --i) stride[i] = stride[i + 1] * cuts[i + 1];

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 0.7);
  ChannelDeviation out;
  for (int p = 0; p < points; ++p) {
    CVec nu(n);
    for (int j = 0; j < n; ++j) {
      const double re = nd(rng), im = nd(rng);
      nu(j) = cd(re, im);
    }
    out.grid.push_back(nu);
    std::vector<CMat> dm;
    for (int j = 0; j < n; ++j) dm.push_back(displacement_matrix(cutoff, nu(j)));
    // chi_out(nu) = sum <i, m| M |j, k> prod D_{j i}(nu)
    std::size_t fixed = 0;
    for (int j = 0; j < n; ++j) {
      fixed += m[j] * stride[n + j] + k[j] * stride[3 * n + j];
    }
    cd fock(0, 0);
    if (n == 1) {
      for (int i = 0; i < cutoff; ++i) {
        for (int jj = 0; jj < cutoff; ++jj) {
          fock += e[fixed + i * stride[0] + jj * stride[2]] * dm[0](jj, i);
        }
      }
    } else {
      for (int i1 = 0; i1 < cutoff; ++i1) {
        for (int i2 = 0; i2 < cutoff; ++i2) {
          for (int j1 = 0; j1 < cutoff; ++j1) {
            const cd d1 = dm[0](j1, i1);
            const std::size_t base = fixed + i1 * stride[0] + i2 * stride[1] + j1 * stride[4];
            for (int j2 = 0; j2 < cutoff; ++j2) fock += e[base + j2 * stride[5]] * d1 * dm[1](j2, i2);
          }
        }
      }
    }
    out.max_abs_fock = std::max(out.max_abs_fock, std::abs(fock));
    if (n == 1) out.exact = std::max(out.exact, std::abs(fock - channel_exact_chi(d, k[0], m[0], nu(0))));
    out.limit = std::max(out.limit, std::abs(fock - channel_limit_chi(ch, k, m, nu)));
  }
  if (n != 1) out.exact = std::numeric_limits<double>::quiet_NaN();
  return out;
}

double commutator_norm(const Mat& a, const Mat& b) {
  return (a * b - b * a).cwiseAbs().maxCoeff();
}

SimultaneousDiag simultaneous_diagonalize(const Mat& K, const Mat& alpha, double tol) {
  if (K.rows() != alpha.rows()) throw DimensionMismatch("K and alpha sizes differ");
  const double scale = std::max({1.0, K.cwiseAbs().maxCoeff(), alpha.cwiseAbs().maxCoeff()});
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > tol * scale ||
      (alpha - alpha.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
    throw InvalidInput("simultaneous diagonalization needs symmetric matrices");
  }
  if (commutator_norm(K, alpha) > tol * scale * scale) {
    throw InvalidInput("K and alpha do not commute");
  }
  const auto dim = alpha.rows();
  Eigen::SelfAdjointEigenSolver<Mat> ea(alpha);
  Mat o(dim, dim);
  // Within each degenerate eigenspace of alpha, diagonalize K.
  Eigen::Index start = 0;
  while (start < dim) {
    Eigen::Index end = start + 1;
    while (end < dim && ea.eigenvalues()(end) - ea.eigenvalues()(start) <= tol * scale) ++end;
    const Mat p = ea.eigenvectors().middleCols(start, end - start);
    Eigen::SelfAdjointEigenSolver<Mat> ek(p.transpose() * K * p);
    o.middleCols(start, end - start) = p * ek.eigenvectors();
    start = end;
  }
  SimultaneousDiag r;
  r.O = o;
  const Mat kd = o.transpose() * K * o, ad = o.transpose() * alpha * o;
  r.k_diag = kd.diagonal();
  r.alpha_diag = ad.diagonal();
  const Mat koff = kd - Mat(r.k_diag.asDiagonal()), aoff = ad - Mat(r.alpha_diag.asDiagonal());
  r.residual = std::max(koff.cwiseAbs().maxCoeff(), aoff.cwiseAbs().maxCoeff());
  return r;
}

CpClaimAudit cp_claim_audit(const DetectorSpec& d) {
  const GaussianChannel ch = detector_to_channel(d);
  CpClaimAudit a;
  a.is_cp = cp_check(ch).is_cp;
  a.covariant = ch.covariant();
  const Mat g = d.cm();
  const bool physical = validate_cm(g).is_physical;
  if (a.covariant) {
    a.claimed = physical;
  } else {
    const std::vector<int> party_a = d.family == Family::TwoMode ? std::vector<int>{0}
                                                                 : std::vector<int>{0, 1};
    a.claimed = physical && decide_separability(CovMatrix(g), party_a).verdict != Verdict::Entangled;
  }
  return a;
}

}  // namespace cvw
