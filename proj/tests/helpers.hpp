#pragma once

#include <unsupported/Eigen/MatrixFunctions>
#include <random>

#include "cvw/core.hpp"

namespace cvw::test {

// exp(sigma H) with H symmetric is symplectic.
inline Mat random_symplectic(std::mt19937_64& rng, int n_modes, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  const int d = 2 * n_modes;
  Mat h(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = nd(rng);
  }
  const Mat gen = symplectic_form(n_modes) * h;
  return gen.exp();
}

// Block-diagonal symplectic acting on party A = mode 0 and party B = mode 1.
inline Mat random_local_symplectic(std::mt19937_64& rng, double scale) {
  Mat s = Mat::Zero(4, 4);
  s.block(0, 0, 2, 2) = random_symplectic(rng, 1, scale);
  s.block(2, 2, 2, 2) = random_symplectic(rng, 1, scale);
  return s;
}

template <class D>
double max_abs(const Eigen::MatrixBase<D>& m) {
  return m.cwiseAbs().maxCoeff();
}

}  // namespace cvw::test
