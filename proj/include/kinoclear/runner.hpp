#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"
#include "kinoclear/analysis.hpp"
#include "kinoclear/clearance.hpp"
#include "kinoclear/reach.hpp"
#include "kinoclear/scenario.hpp"

namespace kinoclear {

// Everything computed for a scenario before the checks run. Clearance and the
// envelope are always built; the boundary classification only on demand.
struct Pipeline {
  Scenario scenario;
  Execution exec;
  std::shared_ptr<const ControlSystem> system;
  std::shared_ptr<const Lattice> lattice;
  std::shared_ptr<const PrimitiveGraph> graph;
  std::optional<ClearanceField> clearance;
  std::optional<EnvelopeMap> envelope;
  std::optional<BoundaryClassification> boundary;
  double kappa = 0.0;
  double rho_probe = 0.0;
  std::map<std::string, double> timings;  // seconds per stage

  SearchOptions search() const { return {scenario.search, kUnreachable, exec}; }
  const BoundaryClassification& boundary_classification();
};

Pipeline build_pipeline(const Scenario& scenario, const Execution& exec);

// Runs one check. The report always carries "id", "type" and "passed"; check
// errors are caught and reported with passed = false.
nlohmann::json run_check(Pipeline& pipeline, const CheckSpec& check);

struct RunOptions {
  std::filesystem::path scenario_file;
  std::filesystem::path out_dir;
  int workers = 1;
  std::optional<double> spacing;
  std::optional<std::uint64_t> seed;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfiguration = 2;
inline constexpr int kExitResource = 3;

// Applies the command-line overrides. A spacing override replaces the
// spacing of line axes only; circle axes keep a divisor of their period.
void apply_overrides(Scenario& scenario, const RunOptions& options);

// Full pipeline with artifacts written to out_dir. Returns the exit status.
int run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir, const Execution& exec,
                 std::ostream& log);

// Loads, overrides and runs; maps errors to exit statuses.
int run(const RunOptions& options, std::ostream& log);

}  // namespace kinoclear
