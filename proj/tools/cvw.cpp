// cvw: separability checks, witness oracles and family sweeps for Gaussian
// covariance matrices.  Exit codes: 0 separable, 2 entangled, 3 boundary,
// 1 invalid input or runtime error, 4 oracle disagreement.

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "cvw/criteria.hpp"
#include "cvw/fock.hpp"
#include "cvw/io.hpp"
#include "cvw/nongauss.hpp"
#include "cvw/parallel.hpp"
#include "cvw/sampling.hpp"
#include "cvw/witness.hpp"

namespace {

using namespace cvw;

constexpr int kExitError = 1;
constexpr int kExitOracleMismatch = 4;
constexpr double kOracleTolerance = 1e-3;

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Separable: return 0;
    case Verdict::Entangled: return 2;
    case Verdict::Boundary: return 3;
  }
  return kExitError;
}

struct CommonOptions {
  std::uint64_t seed = 1;
  double tol_psd = 1e-10;
  std::string format = "json";
  Tolerances tol() const {
    Tolerances t;
    t.psd = tol_psd;
    return t;
  }
};

void emit(const json& j, const std::vector<std::pair<std::string, std::string>>& csv,
          const std::string& format) {
  if (format == "csv") {
    std::string head, row;
    for (std::size_t i = 0; i < csv.size(); ++i) {
      head += (i ? "," : "") + csv[i].first;
      row += (i ? "," : "") + csv[i].second;
    }
    std::cout << head << '\n' << row << '\n';
  } else {
    std::cout << j.dump(2) << '\n';
  }
}

std::string cell(const std::optional<Certificate>& c, double Certificate::*field) {
  return c ? format_double((*c).*field) : "";
}

int run_check(const std::string& path, const std::string& criterion, int restarts,
              const CommonOptions& o) {
  const StateFile s = read_state_file(path);
  const auto valid = validate_cm(s.cm, o.tol_psd);
  if (!valid.is_physical) {
    throw InvalidInput("covariance matrix is not physical (min eigenvalue of gamma + i sigma/2 = " +
                       format_double(valid.min_eig) + ")");
  }
  const int n = s.cm.n_modes();
  if (criterion == "simon" && n != 2) throw InvalidInput("simon needs a two-mode state");
  if (criterion == "wernerwolf" && n != 4) throw InvalidInput("wernerwolf needs a four-mode state");

  json meta = run_meta(o.seed, o.tol());
  meta["input"] = path;

  if (criterion == "witness") {
    if (s.non_gaussian()) throw InvalidInput("witness optimization needs a Gaussian state");
    MinmaxOptions mo;
    mo.seed = o.seed;
    mo.restarts = restarts;
    meta["tolerances"]["ell"] = mo.tol_ell;
    const WitnessReport r = minmax_optimize(s.cm, s.partition, mo);
    json j = to_json(r);
    j["criterion"] = "witness";
    j["meta"] = meta;
    emit(j,
         {{"verdict", to_string(r.verdict)},
          {"lambda", format_double(r.lambda)},
          {"ell", format_double(r.ell)},
          {"ell_minus_one", format_double(r.ell_minus_one)},
          {"stage", r.stage}},
         o.format);
    return exit_code(r.verdict);
  }

  if (criterion == "ppt") {
    if (s.non_gaussian()) throw InvalidInput("the PPT test here applies to Gaussian states only");
    const PptReport p = ppt_decide(s.cm, s.partition, o.tol_psd);
    const Verdict v = p.is_ppt ? Verdict::Separable : Verdict::Entangled;
    const bool sufficient = s.partition.size() == 1 || static_cast<int>(s.partition.size()) == n - 1;
    json j{{"verdict", to_string(v)},
           {"criterion", "ppt"},
           {"ppt", {{"is_ppt", p.is_ppt},
                    {"min_pt_symplectic_eig", p.min_pt_symplectic_eig},
                    {"min_eig", p.min_eig}}},
           {"ppt_sufficient_for_separability", sufficient},
           {"meta", meta}};
    emit(j,
         {{"verdict", to_string(v)},
          {"is_ppt", p.is_ppt ? "true" : "false"},
          {"min_pt_symplectic_eig", format_double(p.min_pt_symplectic_eig)},
          {"ppt_sufficient_for_separability", sufficient ? "true" : "false"}},
         o.format);
    return exit_code(v);
  }

  if (criterion != "auto" && criterion != "simon" && criterion != "wernerwolf") {
    throw InvalidInput("unknown criterion " + criterion);
  }
  CriterionReport r;
  if (s.non_gaussian()) {
    r = decide_separability_nongauss(NonGaussState(s.cm, s.add, s.subtract), s.partition, o.tol());
  } else {
    r = decide_separability(s.cm, s.partition, o.tol());
  }
  json j = to_json(r);
  j["meta"] = meta;
  emit(j,
       {{"verdict", to_string(r.verdict)},
        {"lhs", format_double(r.lhs)},
        {"criterion", r.criterion},
        {"cert_x", cell(r.certificate, &Certificate::x)},
        {"cert_y", cell(r.certificate, &Certificate::y)},
        {"cert_min_eig", cell(r.certificate, &Certificate::min_eig)},
        {"is_ppt", r.ppt ? (r.ppt->is_ppt ? "true" : "false") : ""}},
       o.format);
  return exit_code(r.verdict);
}

int run_oracle(const std::string& path, int cutoff, int restarts, const std::string& dump,
               const CommonOptions& o) {
  const DetectorSpec d = read_detector_file(path);
  if (!detector_physical(d, o.tol_psd)) throw InvalidInput("detector CM is not physical");
  const double closed = lambda_closed_form(d).lambda;
  SeesawOptions so;
  so.restarts = restarts;
  so.seed = o.seed;
  SeesawResult sr;
  if (d.family == Family::TwoMode) {
    const FockOperator op = gaussian_op_fock(d, cutoff);
    if (!dump.empty()) dump_matrix(op.data, dump);
    sr = seesaw_lambda(op, 1, so);
  } else {
    if (!dump.empty()) throw InvalidInput("--dump is available for two-mode detectors only");
    sr = seesaw_lambda(gaussian_low_rank(d, cutoff), 2, so);
  }
  const double delta = std::abs(closed - sr.lambda);
  json meta = run_meta(o.seed, o.tol());
  meta["input"] = path;
  meta["cutoff"] = cutoff;
  meta["restarts"] = restarts;
  json j{{"lambda_closed", closed},
         {"lambda_seesaw", sr.lambda},
         {"delta", delta},
         {"converged", sr.converged},
         {"detector", to_json(d)},
         {"meta", meta}};
  emit(j,
       {{"lambda_closed", format_double(closed)},
        {"lambda_seesaw", format_double(sr.lambda)},
        {"delta", format_double(delta)}},
       o.format);
  return delta > kOracleTolerance ? kExitOracleMismatch : 0;
}

struct SweepRow {
  std::vector<double> params;
  double lhs = 0.0, claim = 0.0, ell = 1.0;
  bool is_ppt = false;
};

int run_sweep(const std::string& family, int n, const std::string& out_path, int restarts,
              const CommonOptions& o) {
  if (n < 1) throw InvalidInput("-n must be at least 1");
  if (family != "tmsv" && family != "wernerwolf") throw InvalidInput("unknown family " + family);
  MinmaxOptions mo;
  mo.seed = o.seed;
  mo.restarts = restarts;

  std::vector<SweepRow> rows;
  if (family == "tmsv") {
    const auto computed = parallel_map<SweepRow>(n, [&](std::size_t i) {
      SweepRow row;
      const double r = static_cast<double>(i) / 10.0;
      row.params = {r};
      const CovMatrix g = CovMatrix::tmsv(r);
      const Reduction red = reduce(g, {0});
      row.lhs = family_lhs(red);
      row.claim = (1.0 - std::cosh(4.0 * r)) / 8.0;
      row.is_ppt = ppt_decide(g, {0}, o.tol_psd).is_ppt;
      row.ell = minmax_optimize(red.form, mo).ell;
      return row;
    });
    rows = computed;
  } else {
    std::mt19937_64 rng(o.seed);
    std::vector<WWFamilyParams> params;
    for (int i = 0; i < n; ++i) params.push_back(random_ww_params(rng));
    rows = parallel_map<SweepRow>(n, [&](std::size_t i) {
      const WWFamilyParams& p = params[i];
      SweepRow row;
      row.params = {p.a, p.b, p.c, p.d, p.e};
      const WernerWolfForm f = werner_wolf_family(p);
      row.lhs = werner_wolf_lhs(f);
      row.claim = werner_wolf_family_claim(p);
      row.is_ppt = ppt_decide(CovMatrix(f.to_cm()), {0, 1}, o.tol_psd).is_ppt;
      row.ell = minmax_optimize(block_form(f), mo).ell;
      return row;
    });
  }

  std::ostringstream csv;
  csv << (family == "tmsv" ? "r" : "a,b,c,d,e") << ",lhs,lhs_closed_form_claim,is_ppt,ell\n";
  for (const auto& row : rows) {
    for (double v : row.params) csv << format_double(v) << ',';
    csv << format_double(row.lhs) << ',' << format_double(row.claim) << ','
        << (row.is_ppt ? "true" : "false") << ',' << format_double(row.ell) << '\n';
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + out_path);
    out << csv.str();
    if (!out) throw InvalidInput("write failed for " + out_path);
    json meta = run_meta(o.seed, o.tol());
    meta["family"] = family;
    meta["rows"] = n;
    meta["output"] = out_path;
    std::cout << meta.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement criteria and witness oracles for Gaussian states"};
  app.set_version_flag("--version", std::string("cvw ") + kVersion);
  app.require_subcommand(1);

  CommonOptions o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "RNG seed recorded in every report")->capture_default_str();
    sub->add_option("--tol-psd", o.tol_psd, "PSD slack for physicality tests")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"json", "csv"}));
  };

  std::string input, criterion = "auto", family, out_path, dump;
  int restarts = 5, cutoff = 25, n = 0;

  auto* check = app.add_subcommand("check", "decide separability of a state file");
  check->add_option("input", input, "state JSON file")->required();
  check->add_option("--criterion", criterion, "decision procedure")
      ->capture_default_str()
      ->check(CLI::IsMember({"simon", "wernerwolf", "ppt", "witness", "auto"}));
  check->add_option("--restarts", restarts, "optimizer restarts (witness)")->capture_default_str();
  add_common(check);

  auto* oracle = app.add_subcommand("oracle", "compare closed-form and seesaw product-state maxima");
  oracle->add_option("input", input, "detector JSON file")->required();
  oracle->add_option("--cutoff", cutoff, "Fock cutoff per mode")->capture_default_str();
  oracle->add_option("--restarts", restarts, "random seesaw starts")->capture_default_str();
  oracle->add_option("--dump", dump, "write the detector's Fock matrix (two-mode only)");
  add_common(oracle);

  auto* sweep = app.add_subcommand("sweep", "evaluate a structured family and write CSV");
  sweep->add_option("--family", family, "tmsv or wernerwolf")
      ->required()
      ->check(CLI::IsMember({"tmsv", "wernerwolf"}));
  sweep->add_option("-n", n, "number of rows")->required();
  sweep->add_option("-o,--out", out_path, "CSV path (stdout when omitted)");
  sweep->add_option("--restarts", restarts, "optimizer restarts for ell")->capture_default_str();
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  try {
    if (*check) return run_check(input, criterion, restarts, o);
    if (*oracle) return run_oracle(input, cutoff, restarts, dump, o);
    if (*sweep) return run_sweep(family, n, out_path, restarts, o);
  } catch (const cvw::Error& e) {
    std::cerr << "cvw: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "cvw: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
