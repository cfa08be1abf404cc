#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cvw/core.hpp"

namespace cvw {

enum class Verdict { Separable, Entangled, Boundary };
const char* to_string(Verdict v);

// x-quadrature and p-quadrature 2x2 blocks of a standard form.  Both
// structured families reduce to this shape: for the two-mode form
// X = [[a, c1], [c1, b]], P = [[a, -c2], [-c2, b]]; for the Werner-Wolf form
// X = [[A, E], [E, C]], P = [[B, -F], [-F, D]].
struct BlockForm {
  Family family = Family::TwoMode;
  Eigen::Matrix2d X = 0.5 * Eigen::Matrix2d::Identity();
  Eigen::Matrix2d P = 0.5 * Eigen::Matrix2d::Identity();
  Mat to_cm() const;
};
BlockForm block_form(const TwoModeStandardForm& f);
BlockForm block_form(const WernerWolfForm& f);

struct Certificate {
  double x = 1.0;
  double y = 1.0;
  double min_eig = 0.0;  // min eigenvalue of gamma - gamma_A (+) gamma_B
};

struct PptReport {
  bool is_ppt = false;
  double min_pt_symplectic_eig = 0.0;
  double min_eig = 0.0;  // of P gamma P + i sigma / 2
};

struct CriterionReport {
  Verdict verdict = Verdict::Boundary;
  double lhs = 0.0;
  std::string criterion;
  std::optional<Certificate> certificate;
  std::optional<PptReport> ppt;
  bool bound_entangled = false;
  Family family = Family::TwoMode;
  BlockForm form;
};

struct WWFamilyParams {
  double a, b, c, d, e;
};

double simon_lhs(const TwoModeStandardForm& f);
double werner_wolf_lhs(const WernerWolfForm& f);
// The family value claimed in closed form, -(ad-bc)/(16 b (ce-a)).  Kept for
// auditing only; werner_wolf_lhs is the decision of record.
double werner_wolf_family_claim(const WWFamilyParams& p);

PptReport ppt_decide(const CovMatrix& g, const std::vector<int>& party_a,
                     double tol_psd = 1e-10);

// Minimum eigenvalue of gamma - product squeezed CM for the block form.
double certificate_slack(const BlockForm& f, double x, double y);

// Analytic intersection test: returns the certificate, or nothing when the
// region cut out by the two block conditions is empty.
std::optional<Certificate> feasibility_analytic(const BlockForm& f);
// Log-space 256x256 grid followed by local refinement.  Returns the best
// point found even when infeasible (min_eig < 0).
Certificate feasibility_grid(const BlockForm& f, int grid = 256);
// Analytic test with grid fallback.  Returned certificates satisfy
// min_eig >= -1e-10.
std::optional<Certificate> feasibility_search(const BlockForm& f);
inline std::optional<Certificate> feasibility_search(const TwoModeStandardForm& f) {
  return feasibility_search(block_form(f));
}
inline std::optional<Certificate> feasibility_search(const WernerWolfForm& f) {
  return feasibility_search(block_form(f));
}

WernerWolfForm werner_wolf_family(const WWFamilyParams& p);

// Reduced standard form of gamma together with the family tag.
struct Reduction {
  Family family;
  BlockForm form;
  TwoModeStandardForm two_mode;
  WernerWolfForm werner_wolf;
  LocalSymplectic S;
};
// Two-mode states use party_a = {m}; four-mode states must split 2|2 and
// follow the Werner-Wolf pattern after reordering.
Reduction reduce(const CovMatrix& g, const std::vector<int>& party_a);

double family_lhs(const Reduction& r);

CriterionReport decide_separability(const CovMatrix& g, const std::vector<int>& party_a,
                                    const Tolerances& tol = {});

}  // namespace cvw
