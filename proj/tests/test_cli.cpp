#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "kinoclear/output.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kCli = KINOCLEAR_CLI_PATH;
const fs::path kScenarios = KINOCLEAR_SCENARIO_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kinoclear-cli-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + kCli.string() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

// Runs a bundled scenario and compares it with its sidecar.
void check_bundled(const std::string& name) {
  const fs::path out = scratch(name);
  const json side = read_json(kScenarios / (name + ".expected.json"));
  const int code = run_cli("run --scenario " + (kScenarios / (name + ".scenario")).string() + " --out " + out.string() +
                           " --workers 2");
  CHECK(code == side.at("exit_status").get<int>());
  for (const auto& [id, pointers] : side.at("reports").items()) {
    const json rep = read_json(out / "reports" / (id + ".json"));
    for (const auto& [ptr, want] : pointers.items()) {
      INFO(name << " " << id << ptr);
      const json got = rep.at(json::json_pointer(ptr));
      if (want.is_number())
        CHECK(got.get<double>() == doctest::Approx(want.get<double>()).epsilon(0.05));
      else if (want.is_array() && !want.empty() && want[0].is_number())
        for (std::size_t i = 0; i < want.size(); ++i)
          CHECK(got.at(i).get<double>() == doctest::Approx(want[i].get<double>()).epsilon(0.1));
      else
        CHECK(got == want);
    }
  }
  const json m = read_json(out / "manifest.json");
  CHECK(m.at("exit_status").get<int>() == code);
  CHECK(!m.at("files").empty());
  for (const json& f : m.at("files")) {
    const fs::path p = out / f.at("path").get<std::string>();
    CHECK(fs::exists(p));
    CHECK(f.at("bytes").get<std::uintmax_t>() == fs::file_size(p));
    CHECK(f.at("sha256").get<std::string>() == kinoclear::sha256_file(p));
  }
}

fs::path write_scenario(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "s.scenario";
  std::ofstream(p) << text;
  return p;
}

const char* kTiny = R"({
  "name": "tiny", "system": "galaga", "control_samples": 9,
  "scene": {"base": "galaga-corner", "box": [[-2, 2.5], [-1.5, 1.5]]},
  "spacing": 0.1, "tau": 0.1)";

}  // namespace

TEST_CASE("bundled Galaga corner") { check_bundled("galaga-corner"); }
TEST_CASE("bundled slanted wall") { check_bundled("galaga-slant"); }
TEST_CASE("bundled horizontal system") { check_bundled("horiz-corner"); }

TEST_CASE("exit statuses") {
  const fs::path d = scratch("codes");
  const fs::path none = write_scenario(d, std::string(kTiny) + "}");
  CHECK(run_cli("run --scenario " + none.string() + " --out " + (d / "a").string()) == 0);
  CHECK(fs::exists(d / "a" / "clearance.csv"));

  const fs::path failing = write_scenario(
      d, std::string(kTiny) + R"(, "checks": [{"id": "c", "type": "clearance", "at": [-0.5, -1], "expect": 3.0}]})");
  CHECK(run_cli("run --scenario " + failing.string() + " --out " + (d / "b").string()) == 1);

  const fs::path malformed = write_scenario(d, std::string(kTiny) + ", \"spacing\": ");
  CHECK(run_cli("run --scenario " + malformed.string() + " --out " + (d / "c").string()) == 2);
  CHECK(run_cli("run --out " + (d / "c").string()) == 2);
  CHECK(run_cli("run --scenario " + (d / "missing.scenario").string() + " --out " + (d / "c").string()) == 2);

  const fs::path ok = write_scenario(d, std::string(kTiny) + "}");
  CHECK(run_cli("run --scenario " + ok.string() + " --out " + (d / "e").string(), "KINOCLEAR_MAX_NODES=100") == 3);

  CHECK(run_cli("list") == 0);
}
