#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace cvw {

struct NelderMeadOptions {
  int max_evals = 10000;
  double f_tol = 1e-12;   // stop when the simplex f-spread falls below this
  double x_tol = 1e-10;   // and the simplex diameter falls below this
  double initial_step = 0.1;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
  bool converged = false;
};

// Standard Nelder-Mead simplex minimizer (reflection 1, expansion 2,
// contraction 1/2, shrink 1/2).
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const NelderMeadOptions& opt) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> s(n + 1, x0);
  std::vector<double> fs(n + 1);
  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    double v = f(x);
    return std::isnan(v) ? INFINITY : v;
  };
  for (std::size_t i = 0; i < n; ++i) s[i + 1][i] += opt.initial_step;
  for (std::size_t i = 0; i <= n; ++i) fs[i] = eval(s[i]);

  std::vector<std::size_t> idx(n + 1);
  std::vector<double> c(n), xr(n), xe(n), xc(n);
  bool converged = false;
  while (evals < opt.max_evals) {
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = idx[0], worst = idx[n], second = idx[n - 1];
    double diam = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t k = 0; k < n; ++k) diam = std::max(diam, std::abs(s[idx[i]][k] - s[best][k]));
    }
    if (std::abs(fs[worst] - fs[best]) <= opt.f_tol && diam <= opt.x_tol) {
      converged = true;
      break;
    }
    std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) c[k] += s[idx[i]][k] / n;
    }
    for (std::size_t k = 0; k < n; ++k) xr[k] = c[k] + (c[k] - s[worst][k]);
    const double fr = eval(xr);
    if (fr < fs[best]) {
      for (std::size_t k = 0; k < n; ++k) xe[k] = c[k] + 2.0 * (c[k] - s[worst][k]);
      const double fe = eval(xe);
      if (fe < fr) {
        s[worst] = xe;
        fs[worst] = fe;
      } else {
        s[worst] = xr;
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      s[worst] = xr;
      fs[worst] = fr;
      continue;
    }
    const bool outside = fr < fs[worst];
    for (std::size_t k = 0; k < n; ++k) {
      xc[k] = outside ? c[k] + 0.5 * (xr[k] - c[k]) : c[k] + 0.5 * (s[worst][k] - c[k]);
    }
    const double fc = eval(xc);
    if (fc < (outside ? fr : fs[worst])) {
      s[worst] = xc;
      fs[worst] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      auto& v = s[idx[i]];
      for (std::size_t k = 0; k < n; ++k) v[k] = s[best][k] + 0.5 * (v[k] - s[best][k]);
      fs[idx[i]] = eval(v);
    }
  }
  std::size_t b = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (fs[i] < fs[b]) b = i;
  }
  return {s[b], fs[b], evals, converged};
}

}  // namespace cvw
