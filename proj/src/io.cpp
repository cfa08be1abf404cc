#include "cvw/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

namespace cvw {

namespace {

std::vector<int> int_list(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + " must be an array of integers");
  std::vector<int> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw InvalidInput(std::string(what) + " must hold integers");
    out.push_back(v.get<int>());
  }
  return out;
}

void check_keys(const json& j, const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    if (k == "mean" || k == "means" || k == "first_moments" || k == "displacement") {
      throw InvalidInput("states with first moments are not accepted");
    }
    if (!allowed.count(k)) throw InvalidInput("unknown field \"" + k + "\"");
  }
}

json cert_json(const std::optional<Certificate>& c) {
  if (!c) return nullptr;
  return json{{"x", c->x}, {"y", c->y}, {"min_eig", c->min_eig}};
}

json ppt_json(const std::optional<PptReport>& p) {
  if (!p) return nullptr;
  return json{{"is_ppt", p->is_ppt},
              {"min_pt_symplectic_eig", p->min_pt_symplectic_eig},
              {"min_eig", p->min_eig}};
}

const char* family_name(Family f) { return f == Family::TwoMode ? "twomode" : "wernerwolf"; }

}  // namespace

bool StateFile::non_gaussian() const {
  for (int v : add) if (v != 0) return true;
  for (int v : subtract) if (v != 0) return true;
  return false;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const json& j, const char* what) {
  const std::string name(what);
  if (!j.is_array() || j.empty()) throw InvalidInput(name + " must be a non-empty array of rows");
  const auto rows = j.size();
  if (!j[0].is_array()) throw InvalidInput(name + " rows must be arrays");
  const auto cols = j[0].size();
  Mat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw InvalidInput(name + " is not rectangular");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw InvalidInput(name + " entries must be numbers");
      const double v = j[i][k].get<double>();
      if (!std::isfinite(v)) throw InvalidInput(name + " entries must be finite");
      m(i, k) = v;
    }
  }
  return m;
}

StateFile parse_state(const json& j, bool allow_ladder) {
  if (!j.is_object()) throw InvalidInput("state file must hold a JSON object");
  std::set<std::string> allowed{"n_modes", "cm", "partition"};
  if (allow_ladder) allowed.insert({"add", "subtract"});
  check_keys(j, allowed);
  for (const char* key : {"n_modes", "cm", "partition"}) {
    if (!j.contains(key)) throw InvalidInput(std::string("missing field \"") + key + "\"");
  }
  if (!j["n_modes"].is_number_integer()) throw InvalidInput("n_modes must be an integer");
  const int n = j["n_modes"].get<int>();
  if (n < 1) throw InvalidInput("n_modes must be positive");
  const Mat m = matrix_from_json(j["cm"], "cm");
  if (m.rows() != 2 * n || m.cols() != 2 * n) {
    throw DimensionMismatch("cm must be " + std::to_string(2 * n) + "x" + std::to_string(2 * n));
  }
  StateFile s;
  s.cm = CovMatrix(m);
  s.partition = int_list(j["partition"], "partition");
  std::set<int> seen;
  for (int v : s.partition) {
    if (v < 0 || v >= n) throw InvalidInput("partition mode out of range");
    if (!seen.insert(v).second) throw InvalidInput("partition lists a mode twice");
  }
  if (s.partition.empty() || static_cast<int>(s.partition.size()) == n) {
    throw InvalidInput("partition must leave both parties non-empty");
  }
  auto ladder = [&](const char* key, std::vector<int>& out) {
    if (!j.contains(key)) return;
    out = int_list(j[key], key);
    if (static_cast<int>(out.size()) != n) {
      throw DimensionMismatch(std::string(key) + " needs one entry per mode");
    }
    for (int v : out) {
      if (v < 0) throw InvalidInput(std::string(key) + " entries must be non-negative");
    }
  };
  ladder("add", s.add);
  ladder("subtract", s.subtract);
  return s;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

StateFile read_state_file(const std::string& path) { return parse_state(read_json_file(path)); }

json to_json(const StateFile& s) {
  json j{{"n_modes", s.cm.n_modes()}, {"cm", matrix_to_json(s.cm.matrix())},
         {"partition", s.partition}};
  if (!s.add.empty()) j["add"] = s.add;
  if (!s.subtract.empty()) j["subtract"] = s.subtract;
  return j;
}

DetectorSpec parse_detector(const json& j) {
  if (!j.is_object()) throw InvalidInput("detector file must hold a JSON object");
  if (j.contains("M")) {
    check_keys(j, {"family", "M"});
    if (!j.contains("family") || !j["family"].is_string()) {
      throw InvalidInput("detector needs a \"family\" string");
    }
    const auto fam = j["family"].get<std::string>();
    DetectorSpec d;
    if (fam == "twomode") {
      d.family = Family::TwoMode;
    } else if (fam == "wernerwolf") {
      d.family = Family::WernerWolf;
    } else {
      throw InvalidInput("family must be twomode or wernerwolf");
    }
    if (!j["M"].is_array() || j["M"].size() != 6) throw InvalidInput("M must hold six numbers");
    for (std::size_t i = 0; i < 6; ++i) {
      if (!j["M"][i].is_number()) throw InvalidInput("M must hold six numbers");
      d.M[i] = j["M"][i].get<double>();
    }
    return d;
  }
  const StateFile s = parse_state(j, false);
  return DetectorSpec::from_cm(s.cm.matrix());
}

DetectorSpec read_detector_file(const std::string& path) {
  return parse_detector(read_json_file(path));
}

json to_json(const DetectorSpec& d) {
  return json{{"family", family_name(d.family)},
              {"M", std::vector<double>(d.M.begin(), d.M.end())}};
}

json to_json(const CriterionReport& r) {
  return json{{"verdict", to_string(r.verdict)},
              {"lhs", r.lhs},
              {"criterion", r.criterion},
              {"certificate", cert_json(r.certificate)},
              {"ppt", ppt_json(r.ppt)},
              {"bound_entangled", r.bound_entangled},
              {"family", family_name(r.family)}};
}

json to_json(const WitnessReport& r) {
  json audit = json::array();
  for (const auto& p : r.scale_audit) {
    audit.push_back({{"t", p.t}, {"ell_minus_one", p.ell_minus_one}, {"t_log_ell", p.t_log_ell}});
  }
  return json{{"verdict", to_string(r.verdict)},
              {"lambda", r.lambda},
              {"ell", r.ell},
              {"ell_minus_one", r.ell_minus_one},
              {"trace_mean", r.trace_mean},
              {"detector", to_json(r.matched)},
              {"x", r.x},
              {"y", r.y},
              {"asymptotic_min_eig", r.asymptotic_min_eig},
              {"scale_audit", audit},
              {"evaluations", r.evaluations},
              {"stage", r.stage}};
}

json to_json(const GaussianChannel& ch) {
  return json{{"K", matrix_to_json(ch.K)},
              {"alpha", matrix_to_json(ch.alpha)},
              {"m3prime", ch.m3prime}};
}

GaussianChannel channel_from_json(const json& j) {
  if (!j.is_object()) throw InvalidInput("channel must be a JSON object");
  check_keys(j, {"K", "alpha", "m3prime"});
  for (const char* key : {"K", "alpha", "m3prime"}) {
    if (!j.contains(key)) throw InvalidInput(std::string("missing field \"") + key + "\"");
  }
  GaussianChannel ch;
  ch.K = matrix_from_json(j["K"], "K");
  ch.alpha = matrix_from_json(j["alpha"], "alpha");
  if (ch.K.rows() != ch.K.cols() || ch.K.rows() % 2 != 0 || ch.alpha.rows() != ch.K.rows() ||
      ch.alpha.cols() != ch.K.cols()) {
    throw DimensionMismatch("K and alpha must be square of equal even size");
  }
  if (!j["m3prime"].is_number()) throw InvalidInput("m3prime must be a number");
  ch.m3prime = j["m3prime"].get<double>();
  ch.family = ch.K.rows() == 2 ? Family::TwoMode : Family::WernerWolf;
  return ch;
}

json run_meta(std::uint64_t seed, const Tolerances& tol) {
  return json{{"tool", "cvw"},
              {"version", kVersion},
              {"seed", seed},
              {"tolerances", {{"psd", tol.psd}, {"boundary", tol.boundary}}}};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace cvw
