#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kinoclear/errors.hpp"
#include "kinoclear/output.hpp"
#include "kinoclear/runner.hpp"
#include "kinoclear/scenario.hpp"
#include "support.hpp"

using namespace kinoclear;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kinoclear-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json small_scenario() {
  return json::parse(R"({
    "name": "tiny",
    "system": "galaga",
    "control_samples": 9,
    "scene": {"base": "galaga-corner", "box": [[-2, 2.5], [-1.5, 1.5]]},
    "spacing": 0.1,
    "tau": 0.1,
    "checks": [
      {"id": "clr", "type": "clearance", "at": [-0.5, -1], "expect": 0.5, "tol": 0.1},
      {"id": "flag", "type": "envelope_flag", "at": [-0.5, -0.5]}
    ]
  })");
}

}  // namespace

TEST_CASE("ticks format exactly") {
  CHECK(format_ticks(to_ticks(0.5)) == "0.500000000");
  CHECK(format_ticks(to_ticks(2.25)) == "2.250000000");
  CHECK(format_ticks(-1) == "-0.000000001");
  CHECK(format_ticks(kUnreachable) == "null");
  CHECK(format_double(-0.5) == "-0.5");
  CHECK(format_double(0.0) == "0");
}

TEST_CASE("sha256 of a known message") {
  const fs::path d = scratch("sha");
  std::ofstream(d / "abc") << "abc";
  CHECK(sha256_file(d / "abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("heatmap maps finite values linearly and infinity to the sentinel") {
  const auto& cf = test::galaga_corner_clearance();
  const auto& lat = *cf.graph->lattice;
  const GrayImage img = cost_heatmap(lat, cf.field.value);
  CHECK(img.width == 181);
  CHECK(img.height == 141);
  // Top-left pixel is (x1 min, x2 max): inside the left wall, infinite.
  CHECK(img.pixels.front() == kInfinityGray);
  // (-0.5, -1) has clr 0.5; row counts down from x2 = 4.
  const int col = 110;  // (-0.5 + 6) / 0.05
  const int row = 100;  // (4 - -1) / 0.05
  const CostTicks vmax = [&] {
    CostTicks m = 0;
    for (CostTicks v : cf.field.value)
      if (v != kUnreachable) m = std::max(m, v);
    return m;
  }();
  CHECK(img.pixels[static_cast<std::size_t>(row * img.width + col)] ==
        static_cast<int>(std::llround(254.0 * 0.5 / to_cost(vmax))));

  const fs::path d = scratch("pgm");
  write_pgm(d / "a.pgm", img);
  const std::string bytes = slurp(d / "a.pgm");
  CHECK(bytes.rfind("P5\n181 141\n255\n", 0) == 0);
  CHECK(bytes.size() == std::string("P5\n181 141\n255\n").size() + 181u * 141u);
}

TEST_CASE("clearance CSV has one header line and one row per node") {
  const auto& cf = test::galaga_corner_clearance();
  const fs::path d = scratch("csv");
  write_clearance_csv(d / "c.csv", cf);
  std::ifstream in(d / "c.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "id,x1,x2,class,clr,backpointer,witness,certified");
  std::size_t rows = 0;
  bool saw = false;
  while (std::getline(in, line)) {
    ++rows;
    if (line.rfind("15550,-0.5,-1,free,0.500000000,", 0) == 0) saw = true;
  }
  CHECK(rows == cf.node_count());
  CHECK(saw);
}

TEST_CASE("scenario parsing rejects malformed input") {
  CHECK_NOTHROW(parse_scenario(small_scenario()));
  json bad = small_scenario();
  bad["colour"] = "blue";
  CHECK_THROWS_AS(parse_scenario(bad), ConfigurationError);
  bad = small_scenario();
  bad["spacing"] = -0.1;
  CHECK_THROWS_AS(parse_scenario(bad), ConfigurationError);
  bad = small_scenario();
  bad["system"] = "dubins";
  CHECK_THROWS_AS(parse_scenario(bad), ConfigurationError);
  bad = small_scenario();
  bad["checks"].push_back(json{{"id", "clr"}, {"type", "clearance"}, {"at", {0, 0}}});
  CHECK_THROWS_AS(parse_scenario(bad), ConfigurationError);
  bad = small_scenario();
  bad.erase("system");
  CHECK_THROWS_AS(parse_scenario(bad), ConfigurationError);

  const Region r = parse_region(json::parse(R"({"union": [
      {"box": {"lo": [null, null], "hi": [-1, 0]}},
      {"complement": {"half_space": {"normal": [1, 0], "offset": 2}}}]})"));
  CHECK(r.contains(Vec{-2, -1}));
  CHECK(r.contains(Vec{3, 0}));
  CHECK_FALSE(r.contains(Vec{0, 0}));
  CHECK_THROWS_AS(parse_region(json::parse(R"({"ball": {}})")), ConfigurationError);
}

TEST_CASE("spacing override leaves circle axes alone") {
  Scenario s;
  s.system_name = "dubins";
  s.control_samples = 9;
  s.spacing = {0.025, 0.025, 0.1};
  RunOptions o;
  o.spacing = 0.05;
  o.seed = 42;
  apply_overrides(s, o);
  CHECK(s.spacing == std::vector<double>{0.05, 0.05, 0.1});
  CHECK(s.seed == 42);
}

TEST_CASE("a run writes fields, reports and a hashed manifest") {
  const fs::path d = scratch("run");
  std::ostringstream log;
  const Scenario s = parse_scenario(small_scenario());
  CHECK(run_scenario(s, d, Execution{2}, log) == kExitOk);
  for (const char* f : {"clearance.csv", "clearance.pgm", "envelope.csv", "envelope.pgm", "summary.json",
                        "reports/clr.json", "reports/flag.json", "manifest.json"})
    CHECK(fs::exists(d / f));
  const json m = json::parse(slurp(d / "manifest.json"));
  CHECK(m.at("checks").size() == 2);
  CHECK(m.at("checks")[0].at("value").get<double>() == doctest::Approx(0.5));
  for (const json& f : m.at("files")) CHECK(f.at("sha256").get<std::string>() == sha256_file(d / f.at("path").get<std::string>()));

  json failing = small_scenario();
  failing["checks"][0]["expect"] = 0.9;
  const fs::path d2 = scratch("run-fail");
  CHECK(run_scenario(parse_scenario(failing), d2, Execution{1}, log) == kExitCheckFailed);

  json none = small_scenario();
  none.erase("checks");
  const fs::path d3 = scratch("run-none");
  CHECK(run_scenario(parse_scenario(none), d3, Execution{1}, log) == kExitOk);
  CHECK(slurp(d / "clearance.csv") == slurp(d3 / "clearance.csv"));
}
