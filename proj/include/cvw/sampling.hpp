#pragma once

#include <random>

#include "cvw/criteria.hpp"
#include "cvw/witness.hpp"

namespace cvw {

// Seeded samplers shared by the CLI sweeps and the test suites.  Every
// sampler draws from the generator it is given and nothing else.

// Log-uniform a..e in [0.2, 5], rejected until ad > bc and ce > a.
WWFamilyParams random_ww_params(std::mt19937_64& rng);

// a, b uniform in [0.5, 2.5] with correlations rejected until physical.
TwoModeStandardForm random_two_mode_form(std::mt19937_64& rng);

// Physical structured detector.  Mx has eigenvalues in [0.15, 3] and
// Mp = Mx^{-1}/4 + spread * L L^T; rejected until every symplectic
// eigenvalue is at most max_nu.
DetectorSpec random_detector(std::mt19937_64& rng, Family fam, double spread = 0.3,
                             double max_nu = 10.0);

// A A^T * scale^2 + I/2 with standard normal A; always physical.
Mat random_physical_cm(std::mt19937_64& rng, int n_modes, double scale);

}  // namespace cvw
