#include "cvw/fock.hpp"

#include <boost/math/special_functions/laguerre.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "cvw/parallel.hpp"

namespace cvw {

namespace {

constexpr int kFactorialTable = 512;

const std::array<double, kFactorialTable + 1>& log_factorial_table() {
  static const auto table = [] {
    std::array<double, kFactorialTable + 1> t{};
    t[0] = 0.0;
    for (int i = 1; i <= kFactorialTable; ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  return table;
}

std::size_t product(const std::vector<int>& v) {
  std::size_t p = 1;
  for (int c : v) p *= static_cast<std::size_t>(c);
  return p;
}

std::vector<std::size_t> row_major_strides(const std::vector<int>& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * dims[i + 1];
  return s;
}

// Multi-index recurrence shared by mixed and pure Gaussian amplitudes:
// E(k + e_i) = sum_j A_ij sqrt(k_j) E(k - e_j) / sqrt(k_i + 1).
std::vector<cd> hermite_recurrence(const CMat& a, cd e0, const std::vector<int>& dims) {
  const int d = static_cast<int>(dims.size());
  const auto stride = row_major_strides(dims);
  const std::size_t total = product(dims);
  std::vector<cd> e(total, cd(0, 0));
  if (total == 0) return e;
  e[0] = e0;
  std::vector<int> k(d, 0);
  std::vector<double> sq(*std::max_element(dims.begin(), dims.end()) + 1);
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = std::sqrt(static_cast<double>(i));
  for (std::size_t flat = 1; flat < total; ++flat) {
    for (int t = d - 1; t >= 0; --t) {
      if (++k[t] < dims[t]) break;
      k[t] = 0;
    }
    int i = d - 1;
    while (k[i] == 0) --i;
    const std::size_t prev = flat - stride[i];
    const int ki = k[i] - 1;
    cd s(0, 0);
    for (int j = 0; j < d; ++j) {
      const int kj = (j == i) ? ki : k[j];
      if (kj > 0) s += a(i, j) * sq[kj] * e[prev - stride[j]];
    }
    e[flat] = s / sq[ki + 1];
  }
  return e;
}

// Applies sum_k alpha_k a_k + beta_k a_k^dagger on a uniform-cutoff vector.
CVec apply_linear_ladder(const CVec& v, int n, int w, const CVec& alpha, const CVec& beta) {
  std::vector<int> dims(n, w);
  const auto stride = row_major_strides(dims);
  CVec out = CVec::Zero(v.size());
  std::vector<int> lvl(n, 0);
  for (Eigen::Index flat = 0; flat < v.size(); ++flat) {
    if (flat > 0) {
      for (int t = n - 1; t >= 0; --t) {
        if (++lvl[t] < w) break;
        lvl[t] = 0;
      }
    }
    cd s(0, 0);
    for (int k = 0; k < n; ++k) {
      if (lvl[k] + 1 < w) s += alpha(k) * std::sqrt(lvl[k] + 1.0) * v(flat + stride[k]);
      if (lvl[k] > 0) s += beta(k) * std::sqrt(static_cast<double>(lvl[k])) * v(flat - stride[k]);
    }
    out(flat) = s;
  }
  return out;
}

// Indices of the uniform-cutoff-w vector that lie below cutoff c.
std::vector<Eigen::Index> crop_indices(int n, int w, int c) {
  std::vector<Eigen::Index> idx;
  std::vector<int> lvl(n, 0);
  const std::size_t total = static_cast<std::size_t>(std::pow(c, n));
  idx.reserve(total);
  for (std::size_t f = 0; f < total; ++f) {
    Eigen::Index flat = 0;
    for (int t = 0; t < n; ++t) flat = flat * w + lvl[t];
    idx.push_back(flat);
    for (int t = n - 1; t >= 0; --t) {
      if (++lvl[t] < c) break;
      lvl[t] = 0;
    }
  }
  return idx;
}

using RowMajorCMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TopEig {
  double value;
  CVec vec;
};

TopEig top_eigen(const CMat& h) {
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h + h.adjoint()));
  const Eigen::Index last = h.rows() - 1;
  return {es.eigenvalues()(last), es.eigenvectors().col(last)};
}

// Top eigenpair of U U^dagger from the small Gram matrix.
TopEig top_eigen_factored(const CMat& u) {
  TopEig g = top_eigen(u.adjoint() * u);
  CVec v = u * g.vec;
  const double nrm = v.norm();
  if (nrm > 0) v /= nrm;
  return {g.value, v};
}

int party_dim(const std::vector<int>& cutoffs, int from, int to) {
  int d = 1;
  for (int i = from; i < to; ++i) d *= cutoffs[i];
  return d;
}

CVec random_unit(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  CVec v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cd(nd(rng), nd(rng));
  return v / v.norm();
}

// Generic alternating loop given the two partial-contraction steps.
template <class StepA, class StepB>
SeesawResult alternate(StepA&& step_a, StepB&& step_b, CVec psi_b, int max_iter, double tol) {
  SeesawResult r;
  r.psi_b = std::move(psi_b);
  double last = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    TopEig ea = step_a(r.psi_b);
    r.psi_a = ea.vec;
    const double slack = 1e-12 * std::max(1.0, std::abs(ea.value));
    if (ea.value < last - slack) r.monotone = false;
    TopEig eb = step_b(r.psi_a);
    r.psi_b = eb.vec;
    if (eb.value < ea.value - slack) r.monotone = false;
    r.iterations = it + 1;
    r.lambda = eb.value;
    if (eb.value - last <= tol * std::max(1.0, std::abs(eb.value))) {
      r.converged = true;
      break;
    }
    last = eb.value;
  }
  return r;
}

template <class Op>
SeesawResult seesaw_restarts(const Op& m, int n_modes_a, int dim_b, const SeesawOptions& opt) {
  const int runs = opt.restarts + 1;
  auto results = parallel_map<SeesawResult>(static_cast<std::size_t>(runs), [&](std::size_t i) {
    CVec start;
    if (i == 0) {
      start = CVec::Zero(dim_b);
      start(0) = 1.0;
    } else {
      start = random_unit(dim_b, opt.seed * 1000003ULL + i);
    }
    return seesaw_from(m, n_modes_a, start, opt.max_iter, opt.tol);
  });
  SeesawResult best = results[0];
  bool monotone = true;
  for (const auto& r : results) {
    monotone = monotone && r.monotone;
    if (r.lambda > best.lambda) best = r;
  }
  best.monotone = monotone;
  return best;
}

}  // namespace

double log_factorial(int n) {
  if (n < 0 || n > kFactorialTable) throw InvalidInput("log_factorial argument out of range");
  return log_factorial_table()[n];
}

cd displacement_element(int m, int k, cd mu) {
  if (m < 0 || k < 0) throw InvalidInput("Fock levels must be non-negative");
  const double r = std::abs(mu);
  if (r == 0.0) return m == k ? cd(1, 0) : cd(0, 0);
  // For m >= k: sqrt(k!/m!) mu^(m-k) e^{-r^2/2} L_k^(m-k)(r^2); the case
  // m < k follows from <m|D(mu)|k> = conj(<k|D(-mu)|m>).
  const int lo = std::min(m, k), gap = std::abs(m - k);
  const double logmag =
      0.5 * (log_factorial(lo) - log_factorial(lo + gap)) + gap * std::log(r) - 0.5 * r * r;
  const double lag = boost::math::laguerre(static_cast<unsigned>(lo), static_cast<unsigned>(gap), r * r);
  const double sign = (m < k && gap % 2 == 1) ? -1.0 : 1.0;
  return sign * lag * std::exp(logmag) * std::polar(1.0, (m - k) * std::arg(mu));
}

CMat displacement_matrix(int cutoff, cd mu) {
  if (cutoff < 1) throw InvalidInput("cutoff must be positive");
  CMat d(cutoff, cutoff);
  for (int m = 0; m < cutoff; ++m) {
    for (int k = 0; k < cutoff; ++k) d(m, k) = displacement_element(m, k, mu);
  }
  return d;
}

double FockOperator::hermiticity_residual() const {
  return (data - data.adjoint()).cwiseAbs().maxCoeff();
}

std::vector<cd> gaussian_fock_elements(const Mat& gamma, const std::vector<int>& cuts) {
  if (gamma.rows() != gamma.cols() || gamma.rows() % 2 != 0) {
    throw DimensionMismatch("covariance matrix must be square with even size");
  }
  const int n = static_cast<int>(gamma.rows() / 2);
  if (static_cast<int>(cuts.size()) != 2 * n) throw DimensionMismatch("need one cutoff per index");
  for (int c : cuts) {
    if (c < 1) throw InvalidInput("cutoffs must be positive");
  }
  const Mat shifted = gamma + 0.5 * Mat::Identity(2 * n, 2 * n);
  const double det = shifted.determinant();
  if (!(det > 0)) throw NonPositiveDeterminant("det(gamma + I/2) must be positive");
  const CMat t = ccm_transform(n);
  const CMat q = t.transpose() * shifted.cast<cd>() * t;
  CMat x = CMat::Zero(2 * n, 2 * n);
  x.topRightCorner(n, n).setIdentity();
  x.bottomLeftCorner(n, n).setIdentity();
  Eigen::VectorXcd z(2 * n);
  for (int i = 0; i < n; ++i) {
    z(i) = 1.0;
    z(n + i) = -1.0;
  }
  const CMat a = x + z.asDiagonal() * q.inverse() * z.asDiagonal();
  return hermite_recurrence(a, cd(1.0 / std::sqrt(det), 0), cuts);
}

FockOperator gaussian_op_fock(const Mat& gamma, int cutoff, double tail_tol) {
  if (cutoff < 8) throw InvalidInput("cutoff must be at least 8");
  if (!validate_cm(gamma).is_physical) throw InvalidInput("covariance matrix is not physical");
  const int n = static_cast<int>(gamma.rows() / 2);
  std::vector<int> cuts(2 * n, cutoff);
  auto e = gaussian_fock_elements(gamma, cuts);
  FockOperator op;
  op.n_modes = n;
  op.cutoffs.assign(n, cutoff);
  const Eigen::Index dim = static_cast<Eigen::Index>(std::pow(cutoff, n));
  op.data = Eigen::Map<RowMajorCMat>(e.data(), dim, dim);
  const double tail = 1.0 - op.trace_real();
  if (tail > tail_tol) {
    throw CutoffTooSmall("mass outside the truncation is " + std::to_string(tail));
  }
  return op;
}

FockOperator gaussian_op_fock(const DetectorSpec& d, int cutoff, double tail_tol) {
  return gaussian_op_fock(d.cm(), cutoff, tail_tol);
}

CVec pure_gaussian_state(const Mat& gamma, int cutoff) {
  const int n = static_cast<int>(gamma.rows() / 2);
  const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
  if ((symplectic_eigenvalues(gamma).array() - 0.5).abs().maxCoeff() > 1e-8 * scale) {
    throw InvalidInput("covariance matrix is not a pure Gaussian state");
  }
  Mat xx(n, n), pp(n, n), xp(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      xx(i, j) = gamma(2 * i, 2 * j);
      pp(i, j) = gamma(2 * i + 1, 2 * j + 1);
      xp(i, j) = gamma(2 * i, 2 * j + 1);
    }
  }
  const cd I(0, 1);
  const CMat mm = 0.5 * (xx - pp).cast<cd>() + 0.5 * I * (xp + xp.transpose()).cast<cd>();
  const CMat nn = 0.5 * (xx + pp).cast<cd>() + 0.5 * I * (xp - xp.transpose()).cast<cd>() -
                  0.5 * CMat::Identity(n, n);
  const CMat b = mm * (CMat::Identity(n, n) + nn).inverse();
  const double norm2 = (CMat::Identity(n, n) - b * b.conjugate()).determinant().real();
  if (!(norm2 > 0)) throw InvalidInput("covariance matrix is not a pure Gaussian state");
  auto e = hermite_recurrence(b, cd(std::pow(norm2, 0.25), 0), std::vector<int>(n, cutoff));
  return Eigen::Map<CVec>(e.data(), static_cast<Eigen::Index>(e.size()));
}

std::size_t LowRankOperator::dim() const {
  return static_cast<std::size_t>(std::pow(cutoff, n_modes));
}

FockOperator LowRankOperator::dense() const {
  FockOperator op;
  op.n_modes = n_modes;
  op.cutoffs.assign(n_modes, cutoff);
  const auto d = static_cast<Eigen::Index>(dim());
  op.data = CMat::Zero(d, d);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    op.data.noalias() += weights[i] * vectors[i] * vectors[i].adjoint();
  }
  return op;
}

LowRankOperator gaussian_low_rank(const Mat& gamma, int cutoff, double drop_tol,
                                  double tail_tol) {
  if (!validate_cm(gamma).is_physical) throw InvalidInput("covariance matrix is not physical");
  const int n = static_cast<int>(gamma.rows() / 2);
  const Williamson wd = williamson(gamma);
  std::vector<double> q(n), p0(n);
  for (int j = 0; j < n; ++j) {
    const double nu = std::max(wd.nu(j), 0.5);
    q[j] = (nu - 0.5) / (nu + 0.5);
    p0[j] = 1.0 / (nu + 0.5);
  }

  // Thermal occupation patterns, largest weight first, until the missing
  // weight is below drop_tol.
  struct Pattern {
    double w;
    std::vector<int> occ;
  };
  std::vector<Pattern> cand;
  const double floor_w = drop_tol * 1e-3;
  std::vector<int> occ(n, 0);
  auto enumerate = [&](auto&& self, int j, double w) -> void {
    if (w < floor_w) return;
    if (j == n) {
      cand.push_back({w, occ});
      return;
    }
    double wj = w * p0[j];
    for (int k = 0; wj >= floor_w; ++k) {
      occ[j] = k;
      self(self, j + 1, wj);
      if (q[j] == 0.0) break;
      wj *= q[j];
    }
    occ[j] = 0;
  };
  enumerate(enumerate, 0, 1.0);
  std::sort(cand.begin(), cand.end(), [](const Pattern& a, const Pattern& b) { return a.w > b.w; });
  double kept = 0.0;
  std::size_t used = 0;
  int max_exc = 0;
  while (used < cand.size() && 1.0 - kept > drop_tol) {
    kept += cand[used].w;
    max_exc = std::max(max_exc, std::accumulate(cand[used].occ.begin(), cand[used].occ.end(), 0));
    ++used;
  }
  if (1.0 - kept > drop_tol) throw CutoffTooSmall("thermal weight could not be represented");

  // Each ladder application corrupts at most one level at the top of the
  // working space, so max_exc spare levels keep the cropped block exact.
  const int w = cutoff + max_exc;
  const Mat pure = wd.S * wd.S.transpose() / 2.0;
  const CVec v0 = pure_gaussian_state(pure, w);
  const Mat l = wd.S.inverse();
  std::vector<CVec> alpha(n), beta(n);
  for (int j = 0; j < n; ++j) {
    CVec wv = CVec::Zero(2 * n);
    wv(2 * j) = 1.0 / std::sqrt(2.0);
    wv(2 * j + 1) = cd(0, -1.0 / std::sqrt(2.0));
    const CVec c = l.transpose().cast<cd>() * wv;
    alpha[j].resize(n);
    beta[j].resize(n);
    for (int k = 0; k < n; ++k) {
      alpha[j](k) = (c(2 * k) - cd(0, 1) * c(2 * k + 1)) / std::sqrt(2.0);
      beta[j](k) = (c(2 * k) + cd(0, 1) * c(2 * k + 1)) / std::sqrt(2.0);
    }
  }
  const auto sel = crop_indices(n, w, cutoff);

  LowRankOperator lr;
  lr.n_modes = n;
  lr.cutoff = cutoff;
  lr.dropped = std::max(0.0, 1.0 - kept);
  for (std::size_t t = 0; t < used; ++t) {
    CVec v = v0;
    for (int j = 0; j < n; ++j) {
      for (int s = 0; s < cand[t].occ[j]; ++s) {
        v = apply_linear_ladder(v, n, w, alpha[j], beta[j]) / std::sqrt(s + 1.0);
      }
    }
    CVec c(static_cast<Eigen::Index>(sel.size()));
    for (std::size_t i = 0; i < sel.size(); ++i) c(static_cast<Eigen::Index>(i)) = v(sel[i]);
    lr.tail += cand[t].w * std::max(0.0, 1.0 - c.squaredNorm());
    lr.weights.push_back(cand[t].w);
    lr.vectors.push_back(std::move(c));
  }
  if (lr.tail > tail_tol) {
    throw CutoffTooSmall("mass outside the truncation is " + std::to_string(lr.tail));
  }
  return lr;
}

LowRankOperator gaussian_low_rank(const DetectorSpec& d, int cutoff, double drop_tol,
                                  double tail_tol) {
  return gaussian_low_rank(d.cm(), cutoff, drop_tol, tail_tol);
}

SeesawResult seesaw_from(const FockOperator& m, int n_modes_a, const CVec& psi_b0, int max_iter,
                         double tol) {
  if (n_modes_a <= 0 || n_modes_a >= m.n_modes) throw InvalidInput("invalid bipartition");
  const int da = party_dim(m.cutoffs, 0, n_modes_a);
  const int db = party_dim(m.cutoffs, n_modes_a, m.n_modes);
  if (psi_b0.size() != db) throw DimensionMismatch("start vector has the wrong size");
  const CMat& big = m.data;
  auto step_a = [&](const CVec& pb) {
    CMat o(da, da);
    for (int ap = 0; ap < da; ++ap) {
      CVec y = big.middleCols(static_cast<Eigen::Index>(ap) * db, db) * pb;
      for (int a = 0; a < da; ++a) {
        o(a, ap) = pb.dot(y.segment(static_cast<Eigen::Index>(a) * db, db));
      }
    }
    return top_eigen(o);
  };
  auto step_b = [&](const CVec& pa) {
    CMat o = CMat::Zero(db, db);
    for (int a = 0; a < da; ++a) {
      for (int ap = 0; ap < da; ++ap) {
        o += std::conj(pa(a)) * pa(ap) *
             big.block(static_cast<Eigen::Index>(a) * db, static_cast<Eigen::Index>(ap) * db, db, db);
      }
    }
    return top_eigen(o);
  };
  return alternate(step_a, step_b, psi_b0, max_iter, tol);
}

SeesawResult seesaw_from(const LowRankOperator& m, int n_modes_a, const CVec& psi_b0,
                         int max_iter, double tol) {
  if (n_modes_a <= 0 || n_modes_a >= m.n_modes) throw InvalidInput("invalid bipartition");
  const int da = static_cast<int>(std::pow(m.cutoff, n_modes_a));
  const int db = static_cast<int>(std::pow(m.cutoff, m.n_modes - n_modes_a));
  if (psi_b0.size() != db) throw DimensionMismatch("start vector has the wrong size");
  const int r = static_cast<int>(m.vectors.size());
  auto view = [&](int i) {
    return Eigen::Map<const RowMajorCMat>(m.vectors[i].data(), da, db);
  };
  auto step_a = [&](const CVec& pb) {
    CMat u(da, r);
    const CVec pbc = pb.conjugate();
    for (int i = 0; i < r; ++i) u.col(i) = std::sqrt(m.weights[i]) * (view(i) * pbc);
    return top_eigen_factored(u);
  };
  auto step_b = [&](const CVec& pa) {
    CMat u(db, r);
    const CVec pac = pa.conjugate();
    for (int i = 0; i < r; ++i) u.col(i) = std::sqrt(m.weights[i]) * (view(i).transpose() * pac);
    return top_eigen_factored(u);
  };
  return alternate(step_a, step_b, psi_b0, max_iter, tol);
}

SeesawResult seesaw_lambda(const FockOperator& m, int n_modes_a, const SeesawOptions& opt) {
  if (n_modes_a <= 0 || n_modes_a >= m.n_modes) throw InvalidInput("invalid bipartition");
  return seesaw_restarts(m, n_modes_a, party_dim(m.cutoffs, n_modes_a, m.n_modes), opt);
}

SeesawResult seesaw_lambda(const LowRankOperator& m, int n_modes_a, const SeesawOptions& opt) {
  if (n_modes_a <= 0 || n_modes_a >= m.n_modes) throw InvalidInput("invalid bipartition");
  const int db = static_cast<int>(std::pow(m.cutoff, m.n_modes - n_modes_a));
  return seesaw_restarts(m, n_modes_a, db, opt);
}

double fock_mean(const FockOperator& m, const FockOperator& state) {
  if (m.data.rows() != state.data.rows() || m.cutoffs != state.cutoffs) {
    throw DimensionMismatch("operators live on different truncations");
  }
  return (state.data.cwiseProduct(m.data.transpose())).sum().real();
}

double product_fidelity(const SeesawResult& s, int n_modes_a, int n_modes_b, int cutoff,
                        double x, double y) {
  auto squeezed = [&](double v, int modes) {
    Mat g(2, 2);
    g << 0.5 * v, 0.0, 0.0, 0.5 / v;
    const CVec one = pure_gaussian_state(g, cutoff);
    CVec acc = one;
    for (int k = 1; k < modes; ++k) {
      CVec next(acc.size() * one.size());
      for (Eigen::Index i = 0; i < acc.size(); ++i) next.segment(i * one.size(), one.size()) = acc(i) * one;
      acc = std::move(next);
    }
    return acc;
  };
  const CVec a = squeezed(x, n_modes_a), b = squeezed(y, n_modes_b);
  if (a.size() != s.psi_a.size() || b.size() != s.psi_b.size()) {
    throw DimensionMismatch("seesaw vectors do not match the requested truncation");
  }
  return std::norm(a.dot(s.psi_a)) * std::norm(b.dot(s.psi_b));
}

void dump_matrix(const CMat& m, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "binary dump assumes little-endian");
  if (m.rows() != m.cols()) throw DimensionMismatch("only square matrices are dumped");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open " + path);
  const std::uint64_t dim = static_cast<std::uint64_t>(m.rows());
  out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double re = m(i, j).real(), im = m(i, j).imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof re);
      out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  }
}

CMat load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path);
  std::uint64_t dim = 0;
  in.read(reinterpret_cast<char*>(&dim), sizeof dim);
  if (!in) throw InvalidInput("truncated matrix file");
  CMat m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double re = 0, im = 0;
      in.read(reinterpret_cast<char*>(&re), sizeof re);
      in.read(reinterpret_cast<char*>(&im), sizeof im);
      m(i, j) = cd(re, im);
    }
  }
  if (!in) throw InvalidInput("truncated matrix file");
  return m;
}

}  // namespace cvw
