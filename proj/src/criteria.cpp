#include "cvw/criteria.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "cvw/nelder_mead.hpp"

namespace cvw {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Separable:
      return "Separable";
    case Verdict::Entangled:
      return "Entangled";
    case Verdict::Boundary:
      return "Boundary";
  }
  return "?";
}

Mat BlockForm::to_cm() const {
  if (family == Family::TwoMode) {
    TwoModeStandardForm f{X(0, 0), X(1, 1), X(0, 1), -P(0, 1)};
    return f.to_cm();
  }
  WernerWolfForm f{X(0, 0), P(0, 0), X(1, 1), P(1, 1), X(0, 1), -P(0, 1)};
  return f.to_cm();
}

BlockForm block_form(const TwoModeStandardForm& f) {
  BlockForm b;
  b.family = Family::TwoMode;
  b.X << f.a, f.c1, f.c1, f.b;
  b.P << f.a, -f.c2, -f.c2, f.b;
  return b;
}

BlockForm block_form(const WernerWolfForm& f) {
  BlockForm b;
  b.family = Family::WernerWolf;
  b.X << f.A, f.E, f.E, f.C;
  b.P << f.B, -f.F, -f.F, f.D;
  return b;
}

double simon_lhs(const TwoModeStandardForm& f) {
  const double ab = f.a * f.b;
  return (ab - f.c1 * f.c1) * (ab - f.c2 * f.c2) - 0.5 * std::abs(f.c1 * f.c2) -
         0.25 * (f.a * f.a + f.b * f.b) + 1.0 / 16.0;
}

double werner_wolf_lhs(const WernerWolfForm& f) {
  return (f.A * f.C - f.E * f.E) * (f.B * f.D - f.F * f.F) - 0.5 * std::abs(f.E * f.F) -
         0.25 * (f.C * f.D + f.A * f.B) + 1.0 / 16.0;
}

double werner_wolf_family_claim(const WWFamilyParams& p) {
  return -(p.a * p.d - p.b * p.c) / (16.0 * p.b * (p.c * p.e - p.a));
}

PptReport ppt_decide(const CovMatrix& g, const std::vector<int>& party_a, double tol_psd) {
  const int n = g.n_modes();
  std::vector<bool> in_a(n, false);
  for (int m : party_a) {
    if (m < 0 || m >= n) throw InvalidInput("invalid partition");
    in_a[m] = true;
  }
  Vec flip = Vec::Ones(2 * n);
  for (int m = 0; m < n; ++m) {
    if (!in_a[m]) flip(2 * m + 1) = -1.0;
  }
  Mat pt = flip.asDiagonal() * g.matrix() * flip.asDiagonal();
  PptReport rep;
  ValidityReport v = validate_cm(pt, tol_psd);
  rep.min_eig = v.min_eig;
  rep.is_ppt = v.min_eig >= -tol_psd;
  rep.min_pt_symplectic_eig = symplectic_eigenvalues(pt).minCoeff();
  return rep;
}

double certificate_slack(const BlockForm& f, double x, double y) {
  Eigen::Matrix2d dx = Eigen::Vector2d(0.5 * x, 0.5 * y).asDiagonal();
  Eigen::Matrix2d dp = Eigen::Vector2d(0.5 / x, 0.5 / y).asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ex(f.X - dx, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ep(f.P - dp, Eigen::EigenvaluesOnly);
  return std::min(ex.eigenvalues()(0), ep.eigenvalues()(0));
}

std::optional<Certificate> feasibility_analytic(const BlockForm& f) {
  const double a1 = f.X(0, 0), b1 = f.X(1, 1), c1 = f.X(0, 1);
  const double a2 = f.P(0, 0), b2 = f.P(1, 1), c2 = f.P(0, 1);
  if (b1 <= 0 || b2 <= 0) return std::nullopt;
  // Largest admissible x from the x-block as y -> 0 and smallest from the
  // p-block as y -> infinity.
  const double sx = a1 - c1 * c1 / b1;
  const double sp = a2 - c2 * c2 / b2;
  if (sx <= 0 || sp <= 0) return std::nullopt;
  const double x_hi = 2.0 * sx;
  const double x_lo = 0.5 / sp;
  if (!(x_lo < x_hi)) return std::nullopt;
  // y_max(x) >= y_min(x) multiplied through by x > 0 gives G(x) >= 0 with
  // G quadratic; G is negative at both ends of (x_lo, x_hi).
  const double p0 = a1 * b1 - c1 * c1, p1 = -0.5 * b1;
  const double q0 = -0.5 * b2, q1 = a2 * b2 - c2 * c2;
  const double g2 = 4 * p1 * q1 + 0.5 * a2;
  const double g1 = 4 * (p0 * q1 + p1 * q0) - (a1 * a2 + 0.25);
  if (!(g2 < 0)) return std::nullopt;
  double x = -g1 / (2 * g2);
  if (!(x > x_lo && x < x_hi)) return std::nullopt;
  const double u = a1 - 0.5 * x;
  const double v = a2 - 0.5 / x;
  const double y_max = 2.0 * (b1 - c1 * c1 / u);
  const double den = b2 - c2 * c2 / v;
  if (!(den > 0) || !(y_max > 0)) return std::nullopt;
  const double y_min = 0.5 / den;
  if (y_min > y_max * (1 + 1e-12)) return std::nullopt;
  Certificate c;
  c.x = x;
  c.y = std::sqrt(y_min * y_max);
  c.min_eig = certificate_slack(f, c.x, c.y);
  return c;
}

Certificate feasibility_grid(const BlockForm& f, int grid) {
  const double a1 = f.X(0, 0), b1 = f.X(1, 1);
  const double a2 = f.P(0, 0), b2 = f.P(1, 1);
  // x/2 <= a1 and 1/(2x) <= a2 bound the useful range of x; same for y.
  const double lx0 = std::log(0.5 / a2) - 1.0, lx1 = std::log(2 * a1) + 1.0;
  const double ly0 = std::log(0.5 / b2) - 1.0, ly1 = std::log(2 * b1) + 1.0;
  Certificate best;
  best.min_eig = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double x = std::exp(lx0 + (lx1 - lx0) * (i + 0.5) / grid);
    for (int j = 0; j < grid; ++j) {
      const double y = std::exp(ly0 + (ly1 - ly0) * (j + 0.5) / grid);
      const double s = certificate_slack(f, x, y);
      if (s > best.min_eig) best = {x, y, s};
    }
  }
  auto obj = [&](const std::vector<double>& p) {
    return -certificate_slack(f, std::exp(p[0]), std::exp(p[1]));
  };
  NelderMeadOptions opt;
  opt.max_evals = 4000;
  opt.f_tol = 1e-15;
  opt.x_tol = 1e-13;
  opt.initial_step = 0.5 * (lx1 - lx0) / grid;
  auto res = nelder_mead(obj, {std::log(best.x), std::log(best.y)}, opt);
  if (-res.f > best.min_eig) {
    best = {std::exp(res.x[0]), std::exp(res.x[1]), -res.f};
  }
  return best;
}

std::optional<Certificate> feasibility_search(const BlockForm& f) {
  constexpr double kSlack = -1e-10;
  if (auto c = feasibility_analytic(f); c && c->min_eig >= kSlack) return c;
  Certificate g = feasibility_grid(f);
  if (g.min_eig >= kSlack) return g;
  return std::nullopt;
}

WernerWolfForm werner_wolf_family(const WWFamilyParams& p) {
  if (!(p.a > 0 && p.b > 0 && p.c > 0 && p.d > 0 && p.e > 0)) {
    throw ConstraintViolated("family parameters must be positive");
  }
  const double adbc = p.a * p.d - p.b * p.c;
  const double cea = p.c * p.e - p.a;
  if (!(adbc > 0)) throw ConstraintViolated("ad - bc must be positive");
  if (!(cea > 0)) throw ConstraintViolated("ce - a must be positive");
  WernerWolfForm f;
  f.A = (p.d * p.e - p.b) / (2 * cea);
  f.B = p.a / (2 * p.b);
  f.C = p.c * adbc / (2 * cea);
  f.D = (p.e * p.b + p.d) / (2 * p.b * adbc);
  f.E = adbc / (2 * cea);
  f.F = 1.0 / (2 * p.b);
  return f;
}

Reduction reduce(const CovMatrix& g, const std::vector<int>& party_a) {
  Reduction r;
  if (g.n_modes() == 2) {
    if (party_a.size() != 1) throw PatternMismatch("two-mode states need a 1|1 partition");
    CovMatrix h(reorder_party_first(g.matrix(), party_a));
    auto red = reduce_two_mode(h);
    r.family = Family::TwoMode;
    r.two_mode = red.form;
    r.form = block_form(red.form);
    r.S = red.S;
  } else if (g.n_modes() == 4) {
    if (party_a.size() != 2) throw PatternMismatch("four-mode states need a 2|2 partition");
    CovMatrix h(reorder_party_first(g.matrix(), party_a));
    auto red = reduce_werner_wolf(h);
    r.family = Family::WernerWolf;
    r.werner_wolf = red.form;
    r.form = block_form(red.form);
    r.S = red.S;
  } else {
    throw PatternMismatch("only two-mode and Werner-Wolf four-mode states are supported");
  }
  return r;
}

double family_lhs(const Reduction& r) {
  return r.family == Family::TwoMode ? simon_lhs(r.two_mode) : werner_wolf_lhs(r.werner_wolf);
}

CriterionReport decide_separability(const CovMatrix& g, const std::vector<int>& party_a,
                                    const Tolerances& tol) {
  const Reduction r = reduce(g, party_a);
  CriterionReport rep;
  rep.family = r.family;
  rep.form = r.form;
  rep.criterion = r.family == Family::TwoMode ? "simon" : "wernerwolf";
  rep.lhs = family_lhs(r);
  rep.ppt = ppt_decide(g, party_a, tol.psd);
  if (rep.lhs < -tol.boundary) {
    rep.verdict = Verdict::Entangled;
  } else {
    // A certificate proves separability even inside the boundary band.
    rep.certificate = feasibility_search(r.form);
    if (rep.certificate) {
      rep.verdict = Verdict::Separable;
    } else {
      rep.verdict = Verdict::Boundary;
    }
  }
  rep.bound_entangled = rep.verdict == Verdict::Entangled && rep.ppt->is_ppt;
  return rep;
}

}  // namespace cvw
