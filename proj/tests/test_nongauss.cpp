#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "cvw/fock.hpp"
#include "cvw/nongauss.hpp"
#include "cvw/sampling.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cvw;
using cvw::test::max_abs;

namespace {

Mat thermal(int n, double nbar) { return (nbar + 0.5) * Mat::Identity(2 * n, 2 * n); }

CMat lowering(int cutoff) {
  CMat a = CMat::Zero(cutoff, cutoff);
  for (int j = 1; j < cutoff; ++j) a(j - 1, j) = std::sqrt(static_cast<double>(j));
  return a;
}

// Tr[Q D(mu)] on a single mode with Q built from truncated matrix exponentials.
cd q_char_fock(const Mat& gamma, cd xi, cd eta, cd mu, int cutoff) {
  const auto e = gaussian_fock_elements(gamma, {cutoff, cutoff});
  CMat rho(cutoff, cutoff);
  for (int i = 0; i < cutoff; ++i) {
    for (int j = 0; j < cutoff; ++j) rho(i, j) = e[i * cutoff + j];
  }
  const CMat a = lowering(cutoff), ad = a.adjoint();
  const CMat l = CMat(xi * ad).exp() * CMat(-std::conj(eta) * a).exp();
  const CMat r = CMat(eta * ad).exp() * CMat(-std::conj(xi) * a).exp();
  const CMat q = l * rho * r;
  return (q * displacement_matrix(cutoff, mu)).trace();
}

std::vector<int> random_levels(std::mt19937_64& rng, int n, int max_total) {
  std::uniform_int_distribution<int> pick(0, 2 * n - 1);
  std::uniform_int_distribution<int> total(1, max_total);
  std::vector<int> lv(2 * n, 0);
  for (int t = total(rng); t > 0; --t) ++lv[pick(rng)];
  return lv;
}

}  // namespace

TEST_CASE("q_char reduces to the Gaussian characteristic function") {
  const CovMatrix g = CovMatrix::vacuum(1);
  CVec zero = CVec::Zero(1), mu(1);
  mu << cd(0.4, -0.7);
  CHECK(std::abs(q_char(g, zero, zero, mu) - std::exp(-0.5 * std::norm(mu(0)))) < 1e-15);
  std::mt19937_64 rng(157);
  const CovMatrix h(random_physical_cm(rng, 2, 0.4));
  CVec z2 = CVec::Zero(2), mu2(2);
  mu2 << cd(0.3, 0.1), cd(-0.2, 0.5);
  CVec stacked(4);
  stacked << mu2, mu2.conjugate();
  CHECK(std::abs(q_char(h, z2, z2, mu2) - characteristic(h, mu_to_z(stacked))) < 1e-13);
  CHECK_THROWS_AS(q_char(h, zero, z2, mu2), DimensionMismatch);
}

TEST_CASE("q_char matches the Fock construction only with weight one half") {
  std::mt19937_64 rng(163);
  std::normal_distribution<double> nd(0.0, 0.3);
  double worst_half = 0.0, best_one = 1e9;
  for (int t = 0; t < 20; ++t) {
    const Mat gamma = random_physical_cm(rng, 1, 0.2);
    CVec xi(1), eta(1), mu(1);
    xi << cd(nd(rng), nd(rng));
    eta << cd(nd(rng), nd(rng));
    mu << cd(nd(rng), nd(rng));
    const cd ref = q_char_fock(gamma, xi(0), eta(0), mu(0), 20);
    worst_half = std::max(worst_half, std::abs(q_char(CovMatrix(gamma), xi, eta, mu, 0.5) - ref));
    best_one = std::min(best_one, std::abs(q_char(CovMatrix(gamma), xi, eta, mu, 1.0) - ref));
  }
  CHECK(worst_half < 1e-7);
  CHECK(best_one > 1e-4);
}

TEST_CASE("normalization examples") {
  CHECK(NonGaussState(CovMatrix::vacuum(1), {1}, {0}).normalization() == doctest::Approx(1.0).epsilon(1e-12));
  for (double nbar : {0.2, 1.0, 3.0}) {
    const CovMatrix th(thermal(1, nbar));
    CHECK(NonGaussState(th, {0}, {1}).normalization() == doctest::Approx(1 / nbar).epsilon(1e-12));
    CHECK(NonGaussState(th, {2}, {0}).normalization() ==
          doctest::Approx(1 / (2 * (nbar + 1) * (nbar + 1))).epsilon(1e-12));
  }
  for (double r : {0.2, 0.7}) {
    const NonGaussState s(CovMatrix::tmsv(r), {1, 0}, {0, 0});
    CHECK(s.normalization() == doctest::Approx(1 / std::pow(std::cosh(r), 2)).epsilon(1e-12));
    const NonGaussState m(CovMatrix::tmsv(r), {0, 0}, {1, 0});
    CHECK(m.normalization() == doctest::Approx(1 / std::pow(std::sinh(r), 2)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(NonGaussState(CovMatrix::vacuum(1), {0}, {1}).normalization(), DegeneratePreparation);
  CHECK_THROWS_AS(NonGaussState(CovMatrix(thermal(1, 1e-14)), {0}, {1}).normalization(),
                  DegeneratePreparation);
}

TEST_CASE("state construction errors") {
  CHECK_THROWS_AS(NonGaussState(CovMatrix::vacuum(2), {1}, {0, 0}), DimensionMismatch);
  CHECK_THROWS_AS(NonGaussState(CovMatrix::vacuum(1), {-1}, {0}), InvalidInput);
  const NonGaussState big(CovMatrix(thermal(1, 1.0)), {5}, {4});
  CHECK(big.order() == 9);
  CHECK_THROWS_AS(big.normalization(), OrderTooHigh);
  CHECK_THROWS_AS(mean_on_detector(big, thermal(1, 1.0)), OrderTooHigh);
  CHECK_THROWS_AS(mean_on_detector(NonGaussState(CovMatrix::vacuum(1), {1}, {0}), thermal(2, 1.0)),
                  DimensionMismatch);
}

TEST_CASE("exp_quadratic_coefficient examples") {
  // exp(q x^2 / 2): coefficient of x^2 is q/2, of x^4 is q^2/8.
  CMat q(1, 1);
  q << cd(0.6, 0.2);
  CHECK(std::abs(exp_quadratic_coefficient(q, {2}) - q(0, 0) / 2.0) < 1e-15);
  CHECK(std::abs(exp_quadratic_coefficient(q, {4}) - q(0, 0) * q(0, 0) / 8.0) < 1e-15);
  CHECK(std::abs(exp_quadratic_coefficient(q, {3})) < 1e-15);
  // exp(c x y): coefficient of x^2 y^2 is c^2 / 2.
  CMat p = CMat::Zero(2, 2);
  p(0, 1) = p(1, 0) = 0.7;
  CHECK(std::abs(exp_quadratic_coefficient(p, {2, 2}) - 0.49 / 2) < 1e-15);
}

TEST_CASE("mean_on_detector examples") {
  std::mt19937_64 rng(167);
  const CovMatrix g(random_physical_cm(rng, 2, 0.4));
  const Mat gm = random_physical_cm(rng, 2, 0.4);
  const NonGaussState plain(g, {}, {});
  CHECK(mean_on_detector(plain, gm) == doctest::Approx(gaussian_overlap(g.matrix(), gm)).epsilon(1e-12));

  const NonGaussState one(CovMatrix::vacuum(1), {1}, {0});
  CHECK(std::abs(mean_on_detector(one, CovMatrix::vacuum(1).matrix())) < 1e-15);
  for (double nbar : {0.3, 2.0}) {
    CHECK(mean_on_detector(one, thermal(1, nbar)) ==
          doctest::Approx(nbar / ((nbar + 1) * (nbar + 1))).epsilon(1e-12));
  }
  DetectorSpec d;
  d.family = Family::TwoMode;
  d.M = {1.0, 1.0, 1.0, 1.0, 0.0, 0.0};
  const NonGaussState two(CovMatrix::vacuum(2), {1, 0}, {0, 0});
  CHECK(mean_on_detector(two, d) == doctest::Approx(0.5 / 2.25 / 1.5).epsilon(1e-12));
}

TEST_CASE("mean_on_detector agrees with the Fock trace") {
  std::mt19937_64 rng(173);
  double worst = 0.0;
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    const int n = t % 3 == 0 ? 2 : 1;
    const CovMatrix g(random_physical_cm(rng, n, 0.2));
    const Mat gm = random_physical_cm(rng, n, 0.3);
    const auto lv = random_levels(rng, n, n == 1 ? 4 : 3);
    const NonGaussState s(g, std::vector<int>(lv.begin(), lv.begin() + n),
                          std::vector<int>(lv.begin() + n, lv.end()));
    const int cutoff = n == 1 ? 30 : 16;
    const double fock = fock_direct_trace(s, gm, cutoff);
    worst = std::max(worst, std::abs(mean_on_detector(s, gm) - fock));
    ++checked;
  }
  CHECK(checked == 40);
  CHECK(worst < 1e-6);
}

TEST_CASE("weight one fails against the Fock trace") {
  const NonGaussState s(CovMatrix(thermal(1, 0.4)), {1}, {1});
  const Mat gm = thermal(1, 0.7);
  const double fock = fock_direct_trace(s, gm, 30);
  CHECK(std::abs(mean_on_detector(s, gm) - fock) < 1e-9);
  CHECK(std::abs(mean_on_detector(s, gm, 1.0) - fock) > 1e-3);
}

TEST_CASE("fock_state is a unit-trace Hermitian operator") {
  std::mt19937_64 rng(179);
  for (int t = 0; t < 5; ++t) {
    const NonGaussState s(CovMatrix(random_physical_cm(rng, 2, 0.2)), {1, 0}, {0, 1});
    const CMat rho = fock_state(s, 14);
    CHECK(std::abs(rho.trace() - cd(1, 0)) < 1e-12);
    CHECK(max_abs(CMat(rho - rho.adjoint())) < 1e-12);
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (rho + rho.adjoint()));
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
  CHECK_THROWS_AS(fock_state(NonGaussState(CovMatrix::vacuum(1), {3}, {0}), 12), CutoffTooSmall);
}

TEST_CASE("asymptotic check") {
  std::mt19937_64 rng(181);
  const CovMatrix g(random_physical_cm(rng, 2, 0.3));
  const Mat m0 = random_physical_cm(rng, 2, 0.3);
  const std::vector<double> scales{10.0, 100.0, 1000.0};
  for (double r : asymptotic_check(NonGaussState(g, {}, {}), m0, scales)) CHECK(r < 1e-12);
  for (auto lv : {std::vector<int>{1, 0, 0, 0}, {0, 1, 1, 0}, {2, 0, 0, 1}}) {
    const NonGaussState s(g, {lv[0], lv[1]}, {lv[2], lv[3]});
    const auto res = asymptotic_check(s, m0, scales);
    CHECK(res[1] < res[0]);
    CHECK(res[2] < res[1]);
    CHECK(res[2] < 1e-2);
  }
}

TEST_CASE("kernel-level separability decisions") {
  const NonGaussState added(CovMatrix::tmsv(0.5), {1, 0}, {0, 0});
  CHECK(decide_separability_nongauss(added, {0}).verdict == Verdict::Entangled);
  const NonGaussState vac(CovMatrix::vacuum(2), {1, 1}, {0, 0});
  CHECK(decide_separability_nongauss(vac, {0}).verdict == Verdict::Separable);

  const CovMatrix ww(werner_wolf_family({1, 1, 2, 3, 1}).to_cm());
  const NonGaussState sub(ww, {0, 0, 0, 0}, {1, 0, 0, 0});
  const CriterionReport r = decide_separability_nongauss(sub, {0, 1});
  CHECK(r.verdict == Verdict::Entangled);
  CHECK(r.bound_entangled);
  CHECK(r.criterion.find("kernel") != std::string::npos);
}
