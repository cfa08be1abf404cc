#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cvw/channel.hpp"
#include "cvw/criteria.hpp"
#include "cvw/nongauss.hpp"
#include "cvw/witness.hpp"
#include "json.hpp"

namespace cvw {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::ordered_json;

// {"n_modes": int, "cm": [[...]], "partition": [modes of A]}.  Unknown keys
// are rejected; "add" and "subtract" are accepted only by read_state_file.
struct StateFile {
  CovMatrix cm;
  std::vector<int> partition;
  std::vector<int> add, subtract;  // empty for Gaussian states
  bool non_gaussian() const;
};

StateFile parse_state(const json& j, bool allow_ladder = true);
StateFile read_state_file(const std::string& path);
json to_json(const StateFile& s);

// Detector files: either {"family": "twomode"|"wernerwolf", "M": [6 reals]}
// or a CM file whose matrix follows one of the two structured patterns.
DetectorSpec parse_detector(const json& j);
DetectorSpec read_detector_file(const std::string& path);
json to_json(const DetectorSpec& d);

json matrix_to_json(const Mat& m);
Mat matrix_from_json(const json& j, const char* what);

json to_json(const CriterionReport& r);
json to_json(const WitnessReport& r);
json to_json(const GaussianChannel& ch);
GaussianChannel channel_from_json(const json& j);

// Run metadata embedded in every report.
json run_meta(std::uint64_t seed, const Tolerances& tol);

// Locale-independent shortest round-trip formatting.
std::string format_double(double v);

json read_json_file(const std::string& path);

}  // namespace cvw
