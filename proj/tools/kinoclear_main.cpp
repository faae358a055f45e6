#include <iostream>

#include "CLI11.hpp"
#include "kinoclear/parallel.hpp"
#include "kinoclear/runner.hpp"
#include "kinoclear/scene.hpp"
#include "kinoclear/systems.hpp"

int main(int argc, char** argv) {
  CLI::App app{"kinoclear: cost-distance, clearance and wave envelopes for control systems among obstacles"};
  app.require_subcommand(1);

  kinoclear::RunOptions opts;
  opts.workers = kinoclear::available_workers();
  double spacing = 0.0;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
  run->add_option("--scenario", opts.scenario_file, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", opts.out_dir, "Output directory")->required();
  run->add_option("--workers", opts.workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* spacing_opt = run->add_option("--spacing", spacing, "Override the spacing of line axes")
                          ->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");

  auto* list = app.add_subcommand("list", "List built-in systems and scenes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kinoclear::kExitConfiguration;
  }

  if (list->parsed()) {
    std::cout << "systems:";
    for (const auto& s : kinoclear::builtin_system_names()) std::cout << ' ' << s;
    std::cout << "\nscenes:";
    for (const auto& s : kinoclear::builtin_scene_names()) std::cout << ' ' << s;
    std::cout << '\n';
    return 0;
  }

  if (*spacing_opt) opts.spacing = spacing;
  if (*seed_opt) opts.seed = seed;
  return kinoclear::run(opts, std::cerr);
}
