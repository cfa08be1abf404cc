#include "cvw/sampling.hpp"

#include <cmath>

namespace cvw {

WWFamilyParams random_ww_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(std::log(0.2), std::log(5.0));
  for (;;) {
    WWFamilyParams p{std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng)),
                     std::exp(u(rng))};
    if (p.a * p.d - p.b * p.c > 0 && p.c * p.e - p.a > 0) return p;
  }
}

TwoModeStandardForm random_two_mode_form(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    TwoModeStandardForm f;
    f.a = 0.5 + 2.0 * u(rng);
    f.b = 0.5 + 2.0 * u(rng);
    const double cmax = std::sqrt(f.a * f.b);
    f.c1 = (2.0 * u(rng) - 1.0) * cmax;
    f.c2 = (2.0 * u(rng) - 1.0) * cmax;
    if (validate_cm(f.to_cm()).is_physical) return f;
  }
}

DetectorSpec random_detector(std::mt19937_64& rng, Family fam, double spread, double max_nu) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (;;) {
    const double th = 3.14159265358979323846 * u(rng);
    const double l1 = std::exp(std::log(0.15) + std::log(20.0) * u(rng));
    const double l2 = std::exp(std::log(0.15) + std::log(20.0) * u(rng));
    Eigen::Matrix2d r;
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const Eigen::Matrix2d mx = r * Eigen::Vector2d(l1, l2).asDiagonal() * r.transpose();
    Eigen::Matrix2d l;
    l << nd(rng), 0.0, nd(rng), nd(rng);
    const Eigen::Matrix2d mp = 0.25 * mx.inverse() + spread * l * l.transpose();
    const DetectorSpec d = DetectorSpec::from_blocks(fam, mx, mp);
    if (!detector_physical(d)) continue;
    if (symplectic_eigenvalues(d.cm()).maxCoeff() <= max_nu) return d;
  }
}

Mat random_physical_cm(std::mt19937_64& rng, int n_modes, double scale) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const int d = 2 * n_modes;
  Mat a(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) a(i, j) = scale * nd(rng);
  }
  return a * a.transpose() + 0.5 * Mat::Identity(d, d);
}

}  // namespace cvw
