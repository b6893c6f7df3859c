#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "qmeasure/cli.hpp"
#include "qmeasure/report.hpp"

using qmeasure::Json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "qmeasure");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = qmeasure::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Json without_wall_time(const std::string& text) {
  Json j = Json::parse(text);
  j.erase("wall_time_seconds");
  return j;
}

}  // namespace

TEST_CASE("sg exact reports an even split") {
  const Result r = invoke({"sg", "--shots", "0", "--exact"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["command"] == "sg");
  CHECK(j["exact_probabilities"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(j["exact_probabilities"][1].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(j["counts"].is_null());
}

TEST_CASE("mz exact with one mirror") {
  const Result r = invoke({"mz", "--exact"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["exact_probabilities"][0].get<double>() == doctest::Approx(0.5));
  CHECK(j["exact_probabilities"][1].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("mz with both mirrors is deterministic") {
  const Result r = invoke({"mz", "--second-mirror", "--exact"});
  REQUIRE(r.code == 0);
  const Json j = Json::parse(r.out);
  const double p0 = j["exact_probabilities"][0].get<double>();
  const double p1 = j["exact_probabilities"][1].get<double>();
  CHECK(std::min(p0, p1) < 1e-12);
  CHECK(p0 + p1 == doctest::Approx(1.0));
}

TEST_CASE("same seed and flags reproduce the report") {
  for (const auto& cmd : std::vector<std::vector<std::string>>{
           {"--seed", "11", "sg", "--shots", "5000"},
           {"--seed", "11", "measure", "--basis", "y", "--shots", "3000"},
           {"--seed", "11", "chsh", "--shots", "2000"},
           {"--seed", "11", "nosignal", "--groups", "6", "--pairs", "40", "--pool", "4"},
           {"--seed", "11", "device-runs", "--runs", "40", "--n-env", "3"}}) {
    const Result a = invoke(cmd);
    const Result b = invoke(cmd);
    REQUIRE(a.code == 0);
    CHECK(without_wall_time(a.out) == without_wall_time(b.out));
  }
  const Result c = invoke({"--seed", "12", "sg", "--shots", "5000"});
  CHECK(without_wall_time(c.out) != without_wall_time(invoke({"--seed", "11", "sg", "--shots", "5000"}).out));
}

TEST_CASE("seed is taken from the environment") {
  ::setenv("QMEASURE_SEED", "99", 1);
  const Result r = invoke({"sg", "--shots", "10"});
  ::unsetenv("QMEASURE_SEED");
  REQUIRE(r.code == 0);
  CHECK(Json::parse(r.out)["seed"] == 99);
  CHECK(without_wall_time(r.out) == without_wall_time(invoke({"--seed", "99", "sg", "--shots", "10"}).out));
}

TEST_CASE("usage errors exit with 2") {
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"teleport"}).code == 2);
  CHECK(invoke({"sg", "--no-such-flag"}).code == 2);
  CHECK(invoke({"sg", "--shots", "many"}).code == 2);
  CHECK(invoke({"sg", "--input", "x+"}).code == 2);
  CHECK(invoke({"device-runs", "--n-env", "13"}).code == 2);
  CHECK(invoke({"double-slit", "--wavelength", "-1"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("library errors exit with 1") {
  const Result r = invoke({"measure", "--alpha", "0", "--beta", "0"});
  CHECK(r.code == 1);
  CHECK(r.err.find("error") != std::string::npos);
  CHECK(invoke({"nosignal", "--message", "01x"}).code == 1);
}

TEST_CASE("double-slit writes a csv") {
  const auto path = std::filesystem::temp_directory_path() / "qmeasure_cli_test.csv";
  const Result r = invoke({"double-slit", "--points", "64", "--csv", path.string()});
  REQUIRE(r.code == 0);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,density");
  int lines = 1;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 65);
  std::filesystem::remove(path);

  const Json j = Json::parse(r.out);
  CHECK(j["diagnostics"]["integral"].get<double>() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("double-slit interference fringes") {
  const Json both = Json::parse(invoke({"double-slit"}).out);
  const Json one = Json::parse(invoke({"double-slit", "--slits", "upper"}).out);
  const double expected = both["diagnostics"]["fringe_period_expected"].get<double>();
  const double step = both["diagnostics"]["grid_step"].get<double>();
  CHECK(std::abs(both["diagnostics"]["fringe_spacing_measured"].get<double>() - expected) <= step);
  CHECK(both["diagnostics"]["visibility"].get<double>() > 0.9);
  CHECK(one["diagnostics"]["visibility"].get<double>() < 0.1);
}

TEST_CASE("chsh exceeds the classical bound") {
  const Json j = Json::parse(invoke({"chsh", "--exact"}).out);
  CHECK(j["diagnostics"]["S"].get<double>() == doctest::Approx(2.0 * std::sqrt(2.0)));
  const Json p = Json::parse(invoke({"chsh", "--exact", "--state", "up-up"}).out);
  CHECK(std::abs(p["diagnostics"]["S"].get<double>()) <= 2.0 + 1e-9);
}
