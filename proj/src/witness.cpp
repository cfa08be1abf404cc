#include "cvw/witness.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cvw/nelder_mead.hpp"
#include "cvw/parallel.hpp"

namespace cvw {

namespace {

// Detector blocks stored through their inverses W = M^{-1} and log det M.
// For positive definite W every term of det(I + W D) is positive, which
// keeps the inner problem free of cancellation.
struct WForm {
  Eigen::Matrix2d Wx, Wp;
  double log_det_mx = 0.0, log_det_mp = 0.0;
  double kappa = 0.5;  // log(ell) = kappa * (log det ratio of both blocks)
};

double kappa_of(Family fam) { return fam == Family::TwoMode ? 0.5 : 1.0; }

WForm wform_of(const DetectorSpec& d) {
  WForm w;
  Eigen::Matrix2d mx = d.Mx(), mp = d.Mp();
  const double dx = mx.determinant(), dp = mp.determinant();
  if (!(dx > 0) || !(dp > 0) || !(mx(0, 0) > 0) || !(mp(0, 0) > 0)) {
    throw NonPositiveDeterminant("detector blocks are not positive definite");
  }
  w.Wx = mx.inverse();
  w.Wp = mp.inverse();
  w.log_det_mx = std::log(dx);
  w.log_det_mp = std::log(dp);
  w.kappa = kappa_of(d.family);
  return w;
}

// log det(I + Wx Dx) + log det(I + Wp Dp) with u = log x, v = log y, plus
// gradient and Hessian.  Both terms are log-sum-exp of affine functions and
// therefore convex in (u, v).
struct InnerEval {
  double g;
  Eigen::Vector2d grad;
  Eigen::Matrix2d hess;
  double s1, s2;
};

InnerEval inner_eval(const WForm& w, double u, double v) {
  const double a = 0.5 * w.Wx(0, 0), b = 0.5 * w.Wx(1, 1), c = 0.25 * w.Wx.determinant();
  const double d = 0.5 * w.Wp(0, 0), e = 0.5 * w.Wp(1, 1), h = 0.25 * w.Wp.determinant();
  const double eu = std::exp(u), ev = std::exp(v), euv = std::exp(u + v);
  const double emu = std::exp(-u), emv = std::exp(-v), emuv = std::exp(-u - v);
  InnerEval r;
  r.s1 = 1.0 + a * eu + b * ev + c * euv;
  r.s2 = 1.0 + d * emu + e * emv + h * emuv;
  const double s1u = a * eu + c * euv, s1v = b * ev + c * euv, s1uv = c * euv;
  const double s2u = -(d * emu + h * emuv), s2v = -(e * emv + h * emuv), s2uv = h * emuv;
  r.g = std::log(r.s1) + std::log(r.s2);
  r.grad << s1u / r.s1 + s2u / r.s2, s1v / r.s1 + s2v / r.s2;
  r.hess(0, 0) = s1u / r.s1 - (s1u / r.s1) * (s1u / r.s1) + (-s2u) / r.s2 - (s2u / r.s2) * (s2u / r.s2);
  r.hess(1, 1) = s1v / r.s1 - (s1v / r.s1) * (s1v / r.s1) + (-s2v) / r.s2 - (s2v / r.s2) * (s2v / r.s2);
  r.hess(0, 1) = r.hess(1, 0) =
      s1uv / r.s1 - (s1u * s1v) / (r.s1 * r.s1) + s2uv / r.s2 - (s2u * s2v) / (r.s2 * r.s2);
  return r;
}

struct InnerMin {
  double u = 0.0, v = 0.0;
  InnerEval at;
};

InnerMin inner_minimize(const WForm& w, int grid) {
  // Balance point of each quadrature pair as the natural centre.
  double u0 = 0.5 * std::log(w.Wp(0, 0) / w.Wx(0, 0));
  double v0 = 0.5 * std::log(w.Wp(1, 1) / w.Wx(1, 1));
  if (grid > 1) {
    constexpr double kHalfWidth = 6.0;
    double best = std::numeric_limits<double>::infinity();
    double bu = u0, bv = v0;
    for (int i = 0; i < grid; ++i) {
      const double u = u0 - kHalfWidth + 2 * kHalfWidth * i / (grid - 1);
      for (int j = 0; j < grid; ++j) {
        const double v = v0 - kHalfWidth + 2 * kHalfWidth * j / (grid - 1);
        const double g = inner_eval(w, u, v).g;
        if (g < best) {
          best = g;
          bu = u;
          bv = v;
        }
      }
    }
    u0 = bu;
    v0 = bv;
  }
  InnerMin m{u0, v0, inner_eval(w, u0, v0)};
  for (int it = 0; it < 200; ++it) {
    Eigen::Vector2d step;
    Eigen::LLT<Eigen::Matrix2d> llt(m.at.hess);
    if (llt.info() == Eigen::Success) {
      step = -llt.solve(m.at.grad);
    } else {
      step = -m.at.grad;
    }
    double lr = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const double nu = m.u + lr * step(0), nv = m.v + lr * step(1);
      InnerEval e = inner_eval(w, nu, nv);
      if (e.g <= m.at.g) {
        moved = e.g < m.at.g || lr * step.norm() > 0;
        m.u = nu;
        m.v = nv;
        m.at = e;
        break;
      }
      lr *= 0.5;
    }
    if (!moved || (lr * step).norm() < 1e-15 * (1.0 + std::abs(m.u) + std::abs(m.v))) break;
  }
  return m;
}

// ell for a reduced state against a W-form detector, accurate near ell = 1.
EllResult ell_wform(const BlockForm& f, const WForm& w, int grid) {
  InnerMin m = inner_minimize(w, grid);
  const double x = std::exp(m.u), y = std::exp(m.v);
  Eigen::Matrix2d dx = Eigen::Vector2d(0.5 * x, 0.5 * y).asDiagonal();
  Eigen::Matrix2d dp = Eigen::Vector2d(0.5 / x, 0.5 / y).asDiagonal();
  const double dwx = w.Wx.determinant(), dwp = w.Wp.determinant();
  // det(I + W Y) - det(I + W D) = tr(W (Y - D)) + det W (det Y - det D)
  const double num1 = (w.Wx * (f.X - dx)).trace() + dwx * (f.X.determinant() - dx.determinant());
  const double num2 = (w.Wp * (f.P - dp)).trace() + dwp * (f.P.determinant() - dp.determinant());
  const double delta1 = num1 / m.at.s1;
  const double delta2 = num2 / m.at.s2;
  const double log_ell = w.kappa * (std::log1p(delta1) + std::log1p(delta2));
  EllResult r;
  r.x = x;
  r.y = y;
  r.ell_minus_one = std::expm1(log_ell);
  r.ell = 1.0 + r.ell_minus_one;
  // log F_min = log det Mx + log det Mp + g_min
  const double log_fmin = w.log_det_mx + w.log_det_mp + m.at.g;
  const double log_lambda = -w.kappa * log_fmin;
  r.lambda = std::exp(log_lambda);
  r.trace_mean = std::exp(log_lambda - log_ell);
  return r;
}

Eigen::Matrix2d chol_param(double l0, double l1, double l2) {
  Eigen::Matrix2d l;
  l << std::exp(l0), 0.0, l1, std::exp(l2);
  return l * l.transpose();
}

}  // namespace

Mat DetectorSpec::cm() const {
  if (family == Family::TwoMode) {
    Mat g = Mat::Zero(4, 4);
    g(0, 0) = M[0];
    g(1, 1) = M[1];
    g(2, 2) = M[2];
    g(3, 3) = M[3];
    g(0, 2) = g(2, 0) = M[4];
    g(1, 3) = g(3, 1) = -M[5];
    return g;
  }
  WernerWolfForm f{M[0], M[1], M[2], M[3], M[4], M[5]};
  return f.to_cm();
}

Eigen::Matrix2d DetectorSpec::Mx() const {
  Eigen::Matrix2d m;
  m << M[0], M[4], M[4], M[2];
  return m;
}

Eigen::Matrix2d DetectorSpec::Mp() const {
  Eigen::Matrix2d m;
  m << M[1], -M[5], -M[5], M[3];
  return m;
}

DetectorSpec DetectorSpec::from_blocks(Family fam, const Eigen::Matrix2d& mx,
                                       const Eigen::Matrix2d& mp) {
  DetectorSpec d;
  d.family = fam;
  d.M = {mx(0, 0), mp(0, 0), mx(1, 1), mp(1, 1), 0.5 * (mx(0, 1) + mx(1, 0)),
         -0.5 * (mp(0, 1) + mp(1, 0))};
  return d;
}

DetectorSpec DetectorSpec::from_cm(const Mat& cm) {
  const double scale = std::max(1.0, cm.cwiseAbs().maxCoeff());
  DetectorSpec d;
  if (cm.rows() == 4 && cm.cols() == 4) {
    d.family = Family::TwoMode;
    d.M = {cm(0, 0), cm(1, 1), cm(2, 2), cm(3, 3), cm(0, 2), -cm(1, 3)};
  } else if (cm.rows() == 8 && cm.cols() == 8) {
    d.family = Family::WernerWolf;
    d.M = {cm(0, 0), cm(1, 1), cm(4, 4), cm(5, 5), cm(0, 4), -cm(1, 7)};
  } else {
    throw PatternMismatch("detector CM must be 4x4 or 8x8");
  }
  const double res = (d.cm() - cm).cwiseAbs().maxCoeff();
  if (res > 1e-12 * scale) {
    throw PatternMismatch("detector CM does not follow a structured pattern");
  }
  return d;
}

bool detector_physical(const DetectorSpec& d, double tol_psd) {
  const Mat g = d.cm();
  const int n = static_cast<int>(g.rows() / 2);
  Mat gx(n, n), gp(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      gx(i, j) = g(2 * i, 2 * j);
      gp(i, j) = g(2 * i + 1, 2 * j + 1);
      if (g(2 * i, 2 * j + 1) != 0.0) return validate_cm(g, tol_psd).is_physical;
    }
  }
  // Symplectic eigenvalues squared are the eigenvalues of L^T Gp L with
  // Gx = L L^T; the state condition is nu >= 1/2.
  Eigen::LLT<Mat> llt(gx);
  if (llt.info() != Eigen::Success) return false;
  const Mat l = llt.matrixL();
  Mat s = l.transpose() * gp * l;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= 0.25 - tol_psd;
}

LambdaResult minimize_product_det(const Eigen::Matrix2d& mx, const Eigen::Matrix2d& mp, int grid) {
  DetectorSpec d = DetectorSpec::from_blocks(Family::TwoMode, mx, mp);
  WForm w = wform_of(d);
  InnerMin m = inner_minimize(w, grid);
  LambdaResult r;
  r.x = std::exp(m.u);
  r.y = std::exp(m.v);
  Eigen::Matrix2d dx = Eigen::Vector2d(0.5 * r.x, 0.5 * r.y).asDiagonal();
  Eigen::Matrix2d dp = Eigen::Vector2d(0.5 / r.x, 0.5 / r.y).asDiagonal();
  r.f1 = (mx + dx).determinant();
  r.f2 = (mp + dp).determinant();
  r.det_min = std::exp(w.log_det_mx + w.log_det_mp + m.at.g);
  return r;
}

LambdaResult lambda_closed_form(const DetectorSpec& d, int grid) {
  LambdaResult r = minimize_product_det(d.Mx(), d.Mp(), grid);
  r.lambda = d.family == Family::TwoMode ? 1.0 / std::sqrt(r.det_min) : 1.0 / r.det_min;
  return r;
}

EllResult ell_ratio(const CovMatrix& g, const DetectorSpec& d, int grid) {
  const Mat gm = d.cm();
  if (gm.rows() != g.matrix().rows()) throw DimensionMismatch("state and detector sizes differ");
  LambdaResult lr = lambda_closed_form(d, grid);
  EllResult r;
  r.lambda = lr.lambda;
  r.x = lr.x;
  r.y = lr.y;
  r.trace_mean = gaussian_overlap(g.matrix(), gm);
  r.ell = r.lambda / r.trace_mean;
  r.ell_minus_one = r.ell - 1.0;
  return r;
}

EllResult ell_factorized(const BlockForm& f, const DetectorSpec& d, int grid) {
  if (f.family != d.family) throw PatternMismatch("state and detector families differ");
  return ell_wform(f, wform_of(d), grid);
}

AsymptoticWitness asymptotic_witness(const BlockForm& f) {
  AsymptoticWitness a;
  const double c1 = std::abs(f.X(0, 1)), c2 = std::abs(f.P(0, 1));
  a.G << f.X(0, 0), -c1, -0.5, 0.0,  //
      -c1, f.X(1, 1), 0.0, -0.5,     //
      -0.5, 0.0, f.P(0, 0), -c2,     //
      0.0, -0.5, -c2, f.P(1, 1);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(a.G);
  a.min_eig = es.eigenvalues()(0);
  a.direction = es.eigenvectors().col(0).cwiseAbs();
  const double p = a.direction(0), r = a.direction(1), q = a.direction(2), s = a.direction(3);
  const double sx = f.X(0, 1) >= 0 ? 1.0 : -1.0;
  const double sp = f.P(0, 1) >= 0 ? 1.0 : -1.0;
  Eigen::Matrix2d wx, wp;
  wx << p * p, -sx * p * r, -sx * p * r, r * r;
  wp << q * q, -sp * q * s, -sp * q * s, s * s;
  // Rank-one optimum regularized to a positive definite direction.  The
  // shift costs at most eps * (tr X + tr P) in H, half the optimal value.
  const double tr = f.X.trace() + f.P.trace();
  double eps = std::abs(a.min_eig) / (2.0 * tr);
  eps = std::max(eps, 1e-12);
  if (a.min_eig >= 0) eps = std::max(eps, 1e-3);
  a.Wx = wx + eps * Eigen::Matrix2d::Identity();
  a.Wp = wp + eps * Eigen::Matrix2d::Identity();
  return a;
}

namespace {

DetectorSpec detector_from_w(Family fam, const Eigen::Matrix2d& wx, const Eigen::Matrix2d& wp,
                             double t) {
  return DetectorSpec::from_blocks(fam, t * wx.inverse(), t * wp.inverse());
}

WForm wform_scaled(Family fam, const Eigen::Matrix2d& wx, const Eigen::Matrix2d& wp, double t) {
  WForm w;
  w.Wx = wx / t;
  w.Wp = wp / t;
  w.log_det_mx = 2 * std::log(t) - std::log(wx.determinant());
  w.log_det_mp = 2 * std::log(t) - std::log(wp.determinant());
  w.kappa = kappa_of(fam);
  return w;
}

struct Candidate {
  EllResult ell;
  DetectorSpec det;
  std::string stage;
};

}  // namespace

WitnessReport minmax_optimize(const BlockForm& f, const MinmaxOptions& opt) {
  WitnessReport rep;
  const Family fam = f.family;
  int evals = 0;
  Candidate best;
  best.ell.ell_minus_one = std::numeric_limits<double>::infinity();
  auto consider = [&](const EllResult& e, const DetectorSpec& d, const char* stage) {
    if (e.ell_minus_one < best.ell.ell_minus_one) best = {e, d, stage};
  };

  // Large-detector stage: closed-form direction, then a scale schedule.
  AsymptoticWitness aw = asymptotic_witness(f);
  rep.asymptotic_min_eig = aw.min_eig;
  for (int k = 0; k <= 14; ++k) {
    const double t = std::pow(10.0, k);
    DetectorSpec d = detector_from_w(fam, aw.Wx, aw.Wp, t);
    if (fam == Family::TwoMode) {
      // nu_min^2 = t^2 / lambda_max(Wx Wp), exact in the W representation
      const Eigen::Matrix2d prod = aw.Wx * aw.Wp;
      const double tr = prod.trace(), det = prod.determinant();
      const double lmax = 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4 * det)));
      if (t * t < 0.25 * lmax) continue;
    } else if (!detector_physical(d)) {
      continue;
    }
    EllResult e = ell_wform(f, wform_scaled(fam, aw.Wx, aw.Wp, t), opt.final_grid);
    ++evals;
    if (k >= 2 && k <= 4) {
      rep.scale_audit.push_back({t, e.ell_minus_one, t * std::log1p(e.ell_minus_one)});
    }
    consider(e, d, "asymptotic");
  }

  // Finite stage: Nelder-Mead over log-Cholesky factors of the detector
  // blocks.  For the two-mode family Mp = Mx^{-1}/4 + Lp Lp^T keeps every
  // iterate physical.
  if (opt.finite_stage) {
    auto build = [&](const std::vector<double>& th) {
      Eigen::Matrix2d mx = chol_param(th[0], th[1], th[2]);
      Eigen::Matrix2d mp = 0.25 * mx.inverse() + chol_param(th[3], th[4], th[5]);
      return DetectorSpec::from_blocks(fam, mx, mp);
    };
    // Optimal detectors for pure states sit at infinite squeezing, where the
    // stored M1..M6 can no longer resolve the blocks.  Iterates are kept
    // below a fixed condition number.
    constexpr double kBound = 18.0;
    constexpr double kMaxLogCond = 13.8;  // about 1e6
    auto log_cond = [](const Eigen::Matrix2d& m) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m, Eigen::EigenvaluesOnly);
      return std::log(es.eigenvalues()(1) / es.eigenvalues()(0));
    };
    auto objective = [&](const std::vector<double>& th) {
      double pen = 0.0;
      for (double v : {th[0], th[2], th[3], th[5]}) pen += std::max(0.0, std::abs(v) - kBound);
      if (pen > 0) return 1e3 + pen;
      DetectorSpec d = build(th);
      const double lc = std::max(log_cond(d.Mx()), log_cond(d.Mp()));
      if (!(lc <= kMaxLogCond)) return 1e3 + (std::isfinite(lc) ? lc : 1e3);
      if (fam == Family::WernerWolf && !detector_physical(d)) return 1e3;
      try {
        EllResult e = ell_wform(f, wform_of(d), opt.inner_grid);
        return std::log1p(e.ell_minus_one);
      } catch (const Error&) {
        return 1e3;
      }
    };
    auto encode = [](const Eigen::Matrix2d& mx, const Eigen::Matrix2d& extra) {
      Eigen::LLT<Eigen::Matrix2d> lx(mx), le(extra);
      Eigen::Matrix2d a = lx.matrixL(), b = le.matrixL();
      return std::vector<double>{std::log(a(0, 0)), a(1, 0), std::log(a(1, 1)),
                                 std::log(b(0, 0)), b(1, 0), std::log(b(1, 1))};
    };
    std::vector<std::vector<double>> seeds;
    {
      Eigen::Matrix2d extra = f.P - 0.25 * f.X.inverse();
      extra += 1e-6 * Eigen::Matrix2d::Identity();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(extra);
      if (es.eigenvalues()(0) > 0) seeds.push_back(encode(f.X, extra));
    }
    for (double t : {1.0, 10.0}) {
      Eigen::Matrix2d mx = t * aw.Wx.inverse();
      Eigen::Matrix2d extra = t * aw.Wp.inverse() - 0.25 * mx.inverse();
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(extra);
      if (es.eigenvalues()(0) > 0) seeds.push_back(encode(mx, extra));
    }
    if (seeds.empty()) seeds.push_back({0, 0, 0, 0, 0, 0});
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const std::size_t n_det = seeds.size();
    for (int r = 0; r < opt.restarts; ++r) {
      std::vector<double> s = seeds[r % n_det];
      for (double& v : s) v += nd(rng);
      seeds.push_back(s);
    }
    NelderMeadOptions nmo;
    nmo.max_evals = opt.max_evals;
    nmo.f_tol = 1e-14;
    nmo.x_tol = 1e-9;
    nmo.initial_step = 0.3;
    auto runs = parallel_map<NelderMeadResult>(
        seeds.size(), [&](std::size_t i) { return nelder_mead(objective, seeds[i], nmo); });
    for (const auto& res : runs) {
      evals += res.evals;
      if (res.f >= 1e3) continue;
      DetectorSpec d = build(res.x);
      if (!detector_physical(d)) continue;
      consider(ell_wform(f, wform_of(d), opt.final_grid), d, "finite");
    }
  }

  if (!std::isfinite(best.ell.ell_minus_one)) {
    throw OptimizerStalled("no physical detector evaluated");
  }
  rep.lambda = best.ell.lambda;
  rep.ell = best.ell.ell;
  rep.ell_minus_one = best.ell.ell_minus_one;
  rep.trace_mean = best.ell.trace_mean;
  rep.matched = best.det;
  rep.x = best.ell.x;
  rep.y = best.ell.y;
  rep.stage = best.stage;
  rep.evaluations = evals;
  if (rep.ell_minus_one < -opt.tol_ell) {
    rep.verdict = Verdict::Entangled;
  } else if (rep.ell_minus_one > opt.tol_ell) {
    rep.verdict = Verdict::Separable;
  } else {
    rep.verdict = Verdict::Boundary;
  }
  return rep;
}

WitnessReport minmax_optimize(const CovMatrix& g, const std::vector<int>& party_a,
                              const MinmaxOptions& opt) {
  return minmax_optimize(reduce(g, party_a).form, opt);
}

MatchedWitness matched_witness(const CovMatrix& g, const std::vector<int>& party_a,
                               const MinmaxOptions& opt) {
  const Reduction red = reduce(g, party_a);
  WitnessReport rep = minmax_optimize(red.form, opt);
  if (rep.verdict != Verdict::Entangled) throw NotEntangled("no detector with ell < 1 found");
  // Recomputed from the stored detector: Lambda by the inner minimization and
  // the mean by the Gaussian overlap in the standard-form frame.
  MatchedWitness m;
  m.detector = rep.matched;
  m.lambda = lambda_closed_form(rep.matched).lambda;
  m.trace_mean = gaussian_overlap(red.form.to_cm(), rep.matched.cm());
  m.violation = m.lambda - m.trace_mean;
  return m;
}

}  // namespace cvw
