#include "cvw/nongauss.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvw/fock.hpp"

namespace cvw {

namespace {

int sum_of(const std::vector<int>& v) { return std::accumulate(v.begin(), v.end(), 0); }

// (sigma_1 (x) I_n) in the (mu, mu*) block ordering.
CMat sigma1_blocks(int n) {
  CMat x = CMat::Zero(2 * n, 2 * n);
  x.topRightCorner(n, n).setIdentity();
  x.bottomLeftCorner(n, n).setIdentity();
  return x;
}

CMat tilde(const Mat& g) {
  const int n = static_cast<int>(g.rows() / 2);
  const CMat t = ccm_transform(n);
  return t.transpose() * g.cast<cd>() * t;
}

CVec stack2(const CVec& a) {
  CVec v(2 * a.size());
  v << a, a.conjugate();
  return v;
}

std::vector<int> target_exponents(const NonGaussState& s) {
  std::vector<int> t;
  for (int rep = 0; rep < 2; ++rep) t.insert(t.end(), s.add().begin(), s.add().end());
  for (int rep = 0; rep < 2; ++rep) t.insert(t.end(), s.subtract().begin(), s.subtract().end());
  return t;
}

double derivative_prefactor(const NonGaussState& s) {
  double lf = 0.0;
  for (int k : s.add()) lf += 2.0 * log_factorial(k);
  for (int m : s.subtract()) lf += 2.0 * log_factorial(m);
  const double sign = (s.order() % 2 == 0) ? 1.0 : -1.0;
  return sign * std::exp(lf);
}

// Row action of a^dag^k a^m on a matrix whose row index runs over a
// uniform-cutoff basis of n modes.
CMat left_ladders(CMat x, int n, int w, const std::vector<int>& k, const std::vector<int>& m) {
  std::vector<Eigen::Index> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * w;
  auto level = [&](Eigen::Index r, int j) { return static_cast<int>((r / stride[j]) % w); };
  auto lower = [&](const CMat& in, int j) {
    CMat out = CMat::Zero(in.rows(), in.cols());
    for (Eigen::Index r = 0; r < in.rows(); ++r) {
      const int l = level(r, j);
      if (l + 1 < w) out.row(r) = std::sqrt(l + 1.0) * in.row(r + stride[j]);
    }
    return out;
  };
  auto raise = [&](const CMat& in, int j) {
    CMat out = CMat::Zero(in.rows(), in.cols());
    for (Eigen::Index r = 0; r < in.rows(); ++r) {
      const int l = level(r, j);
      if (l > 0) out.row(r) = std::sqrt(static_cast<double>(l)) * in.row(r - stride[j]);
    }
    return out;
  };
  for (int j = 0; j < n; ++j) {
    for (int p = 0; p < m[j]; ++p) x = lower(x, j);
  }
  for (int j = 0; j < n; ++j) {
    for (int p = 0; p < k[j]; ++p) x = raise(x, j);
  }
  return x;
}

}  // namespace

NonGaussState::NonGaussState(CovMatrix kernel, std::vector<int> add, std::vector<int> subtract)
    : kernel_(std::move(kernel)), add_(std::move(add)), subtract_(std::move(subtract)) {
  const auto n = static_cast<std::size_t>(kernel_.n_modes());
  if (add_.empty()) add_.assign(n, 0);
  if (subtract_.empty()) subtract_.assign(n, 0);
  if (add_.size() != n || subtract_.size() != n) {
    throw DimensionMismatch("one add and one subtract index per mode");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (add_[j] < 0 || subtract_[j] < 0) throw InvalidInput("ladder indices must be non-negative");
  }
  if (!validate_cm(kernel_).is_physical) throw InvalidInput("kernel covariance matrix is not physical");
}

int NonGaussState::order() const { return sum_of(add_) + sum_of(subtract_); }

double NonGaussState::normalization() const {
  if (norm_ > 0) return norm_;
  if (order() > kMaxLadderOrder) throw OrderTooHigh("at most 8 ladder operators are supported");
  const QuadraticGenerator qg =
      quadratic_generator(kernel_, 0.5 * Mat::Identity(2 * n_modes(), 2 * n_modes()));
  const cd c = exp_quadratic_coefficient(qg.q0, target_exponents(*this));
  const double o = derivative_prefactor(*this) * c.real();
  if (!(o > 1e-12)) throw DegeneratePreparation("ladder operators annihilate the kernel");
  norm_ = 1.0 / o;
  return norm_;
}

cd QuadraticGenerator::chi_q(const CVec& v) const {
  return std::exp(0.5 * (v.transpose() * q0 * v)(0, 0));
}

cd QuadraticGenerator::f(const CVec& v) const {
  return 0.5 * (v.transpose() * (qf - q0) * v)(0, 0);
}

QuadraticGenerator quadratic_generator(const CovMatrix& kernel, const Mat& gamma_m,
                                       double sigma1_weight) {
  const int n = kernel.n_modes();
  if (gamma_m.rows() != 2 * n || gamma_m.cols() != 2 * n) {
    throw DimensionMismatch("detector and kernel sizes differ");
  }
  const CMat gt = tilde(kernel.matrix());
  const CMat gp = gt + sigma1_weight * sigma1_blocks(n);
  const CMat gm = gt - sigma1_weight * sigma1_blocks(n);
  QuadraticGenerator q;
  q.q0.resize(4 * n, 4 * n);
  q.q0 << -gp, -gm, -gm, -gm;
  const CMat a = gt + tilde(gamma_m);
  Eigen::FullPivLU<CMat> lu(a);
  if (!lu.isInvertible()) throw SingularSum("gamma_G + gamma_M is singular");
  CMat b(4 * n, 2 * n);
  b << gp, gm;
  q.qf = q.q0 + b * lu.solve(b.transpose());
  return q;
}

cd q_char(const CovMatrix& kernel, const CVec& xi, const CVec& eta, const CVec& mu,
          double sigma1_weight) {
  const int n = kernel.n_modes();
  if (xi.size() != n || eta.size() != n || mu.size() != n) {
    throw DimensionMismatch("one complex variable per mode");
  }
  const CMat gt = tilde(kernel.matrix());
  const CMat gp = gt + sigma1_weight * sigma1_blocks(n);
  const CMat gm = gt - sigma1_weight * sigma1_blocks(n);
  const CVec x = stack2(xi), e = stack2(eta), w = stack2(mu);
  auto form = [](const CVec& a, const CMat& m, const CVec& b) {
    return (a.transpose() * m * b)(0, 0);
  };
  const cd at0 = -0.5 * form(x, gp, x) - form(x, gm, e) - 0.5 * form(e, gm, e);
  const cd rest = -0.5 * form(w, gt, w) - form(x, gp, w) - form(e, gm, w);
  return std::exp(at0 + rest);
}

cd exp_quadratic_coefficient(const CMat& q, const std::vector<int>& t) {
  const int nv = static_cast<int>(t.size());
  if (q.rows() != nv || q.cols() != nv) throw DimensionMismatch("exponent and form sizes differ");
  const int total = sum_of(t);
  if (total % 2 != 0) return cd(0, 0);
  const int p = total / 2;
  // Dense coefficient arrays over the box prod (t_i + 1).
  std::vector<std::size_t> stride(nv, 1);
  for (int i = nv - 2; i >= 0; --i) stride[i] = stride[i + 1] * (t[i + 1] + 1);
  const std::size_t size = nv == 0 ? 1 : stride[0] * (t[0] + 1);
  struct Term {
    int i, j;
    cd c;
  };
  std::vector<Term> terms;
  for (int i = 0; i < nv; ++i) {
    for (int j = i; j < nv; ++j) {
      const bool fits = (i == j) ? t[i] >= 2 : (t[i] >= 1 && t[j] >= 1);
      if (!fits) continue;
      const cd c = (i == j) ? 0.5 * q(i, i) : 0.5 * (q(i, j) + q(j, i));
      if (c != cd(0, 0)) terms.push_back({i, j, c});
    }
  }
  std::vector<cd> cur(size, cd(0, 0)), next(size);
  cur[0] = 1.0;
  std::vector<int> idx(nv);
  for (int step = 0; step < p; ++step) {
    std::fill(next.begin(), next.end(), cd(0, 0));
    std::fill(idx.begin(), idx.end(), 0);
    for (std::size_t flat = 0; flat < size; ++flat) {
      if (flat > 0) {
        for (int d = nv - 1; d >= 0; --d) {
          if (++idx[d] <= t[d]) break;
          idx[d] = 0;
        }
      }
      const cd v = cur[flat];
      if (v == cd(0, 0)) continue;
      for (const auto& tm : terms) {
        if (tm.i == tm.j) {
          if (idx[tm.i] + 2 > t[tm.i]) continue;
          next[flat + 2 * stride[tm.i]] += v * tm.c;
        } else {
          if (idx[tm.i] + 1 > t[tm.i] || idx[tm.j] + 1 > t[tm.j]) continue;
          next[flat + stride[tm.i] + stride[tm.j]] += v * tm.c;
        }
      }
    }
    std::swap(cur, next);
  }
  return cur[size - 1] / std::exp(log_factorial(p));
}

double mean_on_detector(const NonGaussState& s, const Mat& gamma_m, double sigma1_weight) {
  if (s.order() > kMaxLadderOrder) throw OrderTooHigh("at most 8 ladder operators are supported");
  const QuadraticGenerator qg = quadratic_generator(s.kernel(), gamma_m, sigma1_weight);
  const auto t = target_exponents(s);
  const cd den = exp_quadratic_coefficient(qg.q0, t);
  if (!(std::abs(derivative_prefactor(s) * den.real()) > 1e-12)) {
    throw DegeneratePreparation("ladder operators annihilate the kernel");
  }
  const cd num = exp_quadratic_coefficient(qg.qf, t);
  const double det = (s.kernel().matrix() + gamma_m).determinant();
  if (det == 0.0) throw SingularSum("gamma_G + gamma_M is singular");
  return (num / den).real() / std::sqrt(std::abs(det));
}

double mean_on_detector(const NonGaussState& s, const DetectorSpec& d) {
  return mean_on_detector(s, d.cm());
}

std::vector<double> asymptotic_check(const NonGaussState& s, const Mat& gamma_m0,
                                     const std::vector<double>& scales) {
  std::vector<double> out;
  for (double t : scales) {
    const Mat gm = t * gamma_m0;
    const double det = (s.kernel().matrix() + gm).determinant();
    out.push_back(std::abs(mean_on_detector(s, gm) * std::sqrt(std::abs(det)) - 1.0));
  }
  return out;
}

CMat fock_state(const NonGaussState& s, int cutoff) {
  const int n = s.n_modes();
  int top = 0;
  for (int j = 0; j < n; ++j) top = std::max(top, s.add()[j] + s.subtract()[j]);
  if (cutoff < top + 10) throw CutoffTooSmall("cutoff must be at least max occupation + 10");
  const int w = cutoff + top + 2;
  const auto e = gaussian_fock_elements(s.kernel().matrix(), std::vector<int>(2 * n, w));
  const Eigen::Index dim = static_cast<Eigen::Index>(std::pow(w, n));
  using RowMajor = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const CMat rho = Eigen::Map<const RowMajor>(e.data(), dim, dim);
  // L rho L^dag = (L (L rho)^dag)^dag for Hermitian rho.
  const CMat x = left_ladders(rho, n, w, s.add(), s.subtract());
  const CMat full = left_ladders(x.adjoint(), n, w, s.add(), s.subtract()).adjoint();
  std::vector<Eigen::Index> keep;
  std::vector<int> lvl(n, 0);
  const std::size_t count = static_cast<std::size_t>(std::pow(cutoff, n));
  for (std::size_t c = 0; c < count; ++c) {
    Eigen::Index flat = 0;
    for (int j = 0; j < n; ++j) flat = flat * w + lvl[j];
    keep.push_back(flat);
    for (int j = n - 1; j >= 0; --j) {
      if (++lvl[j] < cutoff) break;
      lvl[j] = 0;
    }
  }
  const auto kd = static_cast<Eigen::Index>(keep.size());
  CMat crop(kd, kd);
  for (Eigen::Index i = 0; i < kd; ++i) {
    for (Eigen::Index j = 0; j < kd; ++j) crop(i, j) = full(keep[i], keep[j]);
  }
  const double tr_full = full.trace().real(), tr = crop.trace().real();
  if (!(tr > 0)) throw DegeneratePreparation("ladder operators annihilate the kernel");
  if (1.0 - tr / tr_full > 1e-6) throw CutoffTooSmall("state mass outside the truncation: " + std::to_string(1.0 - tr / tr_full));
  return crop / tr;
}

double fock_direct_trace(const NonGaussState& s, const Mat& gamma_m, int cutoff) {
  const CMat rho = fock_state(s, cutoff);
  const int n = s.n_modes();
  const auto e = gaussian_fock_elements(gamma_m, std::vector<int>(2 * n, cutoff));
  using RowMajor = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const CMat m = Eigen::Map<const RowMajor>(e.data(), rho.rows(), rho.cols());
  return (rho.cwiseProduct(m.transpose())).sum().real();
}

double fock_direct_trace(const NonGaussState& s, const DetectorSpec& d, int cutoff) {
  return fock_direct_trace(s, d.cm(), cutoff);
}

CriterionReport decide_separability_nongauss(const NonGaussState& s,
                                             const std::vector<int>& party_a,
                                             const Tolerances& tol) {
  CriterionReport r = decide_separability(s.kernel(), party_a, tol);
  r.criterion += " applied to the Gaussian kernel";
  return r;
}

}  // namespace cvw
