#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "cvw/io.hpp"
#include "cvw/sampling.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cvw;
using cvw::test::max_abs;

namespace {

json tmsv_file(double r) {
  return json{{"n_modes", 2}, {"cm", matrix_to_json(CovMatrix::tmsv(r).matrix())}, {"partition", {0}}};
}

}  // namespace

TEST_CASE("parse_state accepts a well-formed file") {
  const StateFile s = parse_state(tmsv_file(0.5));
  CHECK(s.cm.n_modes() == 2);
  CHECK(s.partition == std::vector<int>{0});
  CHECK_FALSE(s.non_gaussian());
  CHECK(max_abs(Mat(s.cm.matrix() - CovMatrix::tmsv(0.5).matrix())) == 0.0);

  json j = tmsv_file(0.5);
  j["add"] = {1, 0};
  const StateFile a = parse_state(j);
  CHECK(a.non_gaussian());
  CHECK(a.add == std::vector<int>{1, 0});
  CHECK(a.subtract.empty());
  CHECK_THROWS_AS(parse_state(j, false), InvalidInput);
}

TEST_CASE("parse_state rejects malformed input") {
  const auto broken = [](auto edit) {
    json j = tmsv_file(0.3);
    edit(j);
    return j;
  };
  CHECK_THROWS_AS(parse_state(json::array()), InvalidInput);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j.erase("partition"); })), InvalidInput);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j.erase("cm"); })), InvalidInput);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j["n_modes"] = 3; })), DimensionMismatch);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j["n_modes"] = 0; })), InvalidInput);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j["n_modes"] = 2.5; })), InvalidInput);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j["extra"] = 1; })), InvalidInput);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j["partition"] = {2}; })), InvalidInput);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j["partition"] = {0, 0}; })), InvalidInput);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j["partition"] = {0, 1}; })), InvalidInput);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j["partition"] = json::array(); })), InvalidInput);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j["cm"][0][1] = "x"; })), InvalidInput);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j["cm"][1].erase(0); })), InvalidInput);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j["add"] = {1}; })), DimensionMismatch);
  CHECK_THROWS_AS(parse_state(broken([](json& j) { j["subtract"] = {0, -1}; })), InvalidInput);
  for (const char* key : {"mean", "means", "first_moments", "displacement"}) {
    try {
      parse_state(broken([key](json& j) { j[key] = {0, 0, 0, 0}; }));
      FAIL("first moments accepted");
    } catch (const InvalidInput& e) {
      CHECK(std::string(e.what()).find("first moments") != std::string::npos);
    }
  }
}

TEST_CASE("state round trip through JSON and disk") {
  std::mt19937_64 rng(191);
  StateFile s = parse_state(tmsv_file(0.1));
  s.cm = CovMatrix(random_physical_cm(rng, 3, 0.7));
  s.partition = {2, 0};
  s.add = {0, 1, 0};
  s.subtract = {2, 0, 0};
  const std::string path = "cvw_io_roundtrip.json";
  {
    std::ofstream out(path);
    out << to_json(s).dump(2);
  }
  const StateFile back = read_state_file(path);
  std::remove(path.c_str());
  CHECK(max_abs(Mat(back.cm.matrix() - s.cm.matrix())) == 0.0);
  CHECK(back.partition == s.partition);
  CHECK(back.add == s.add);
  CHECK(back.subtract == s.subtract);
  CHECK_THROWS_AS(read_state_file("does/not/exist.json"), InvalidInput);
}

TEST_CASE("detector files") {
  const DetectorSpec d = parse_detector(json{{"family", "wernerwolf"}, {"M", {1, 0.5, 1, 2, 0.5, 0.5}}});
  CHECK(d.family == Family::WernerWolf);
  CHECK(d.M[3] == 2.0);
  const json back = to_json(d);
  CHECK(back["family"] == "wernerwolf");
  const DetectorSpec again = parse_detector(back);
  CHECK(again.M == d.M);

  const DetectorSpec from_cm = parse_detector(tmsv_file(0.5));
  CHECK(from_cm.family == Family::TwoMode);
  CHECK(max_abs(Mat(from_cm.cm() - CovMatrix::tmsv(0.5).matrix())) < 1e-15);

  CHECK_THROWS_AS(parse_detector(json{{"family", "other"}, {"M", {1, 1, 1, 1, 0, 0}}}), InvalidInput);
  CHECK_THROWS_AS(parse_detector(json{{"family", "twomode"}, {"M", {1, 1, 1, 1, 0}}}), InvalidInput);
  CHECK_THROWS_AS(parse_detector(json{{"M", {1, 1, 1, 1, 0, 0}}}), InvalidInput);
  CHECK_THROWS_AS(parse_detector(json{{"family", "twomode"}, {"M", {1, 1, 1, 1, 0, 0}}, {"x", 1}}),
                  InvalidInput);
}

TEST_CASE("channel round trip") {
  DetectorSpec d;
  d.family = Family::WernerWolf;
  d.M = {1.0, 1.0, 1.5, 1.5, 1.0, 1.0};
  const GaussianChannel ch = detector_to_channel(d);
  const GaussianChannel back = channel_from_json(json::parse(to_json(ch).dump()));
  CHECK(max_abs(Mat(back.K - ch.K)) == 0.0);
  CHECK(max_abs(Mat(back.alpha - ch.alpha)) == 0.0);
  CHECK(back.m3prime == ch.m3prime);
  CHECK(back.family == Family::WernerWolf);
  json bad = to_json(ch);
  bad["alpha"] = matrix_to_json(Mat::Identity(2, 2));
  CHECK_THROWS_AS(channel_from_json(bad), DimensionMismatch);
  bad = to_json(ch);
  bad.erase("m3prime");
  CHECK_THROWS_AS(channel_from_json(bad), InvalidInput);
}

TEST_CASE("report serialization") {
  const CriterionReport r = decide_separability(CovMatrix::vacuum(2), {0});
  const json j = to_json(r);
  CHECK(j["verdict"] == "Separable");
  CHECK(j["certificate"].is_object());
  CHECK(j["family"] == "twomode");
  const json e = to_json(decide_separability(CovMatrix::tmsv(0.5), {0}));
  CHECK(e["verdict"] == "Entangled");
  CHECK(e["certificate"].is_null());

  const json m = run_meta(7, Tolerances{});
  CHECK(m["seed"] == 7);
  CHECK(m["version"] == kVersion);
  CHECK(m["tolerances"].contains("psd"));
}

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(193);
  std::normal_distribution<double> nd(0.0, 1e3);
  for (int t = 0; t < 1000; ++t) {
    const double v = nd(rng) * std::pow(10.0, t % 40 - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}
