#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kinoclear/reach.hpp"
#include "kinoclear/scene.hpp"

namespace kinoclear {

struct CheckSpec {
  std::string id;
  std::string type;
  nlohmann::json params;
};

// A run configuration. Scenario files are JSON documents; see README.md for
// the keys.
struct Scenario {
  std::string name;
  std::string system_name;
  int control_samples = 32;
  Scene scene;
  std::vector<double> spacing;  // one per axis
  double tau = 0.0;             // <= 0 selects the default
  std::optional<double> kappa;
  std::optional<double> rho_probe;
  std::uint64_t seed = 1;
  SearchMode search = SearchMode::dijkstra;
  bool contact_edges = true;
  std::vector<std::string> fields{"clearance", "envelope"};
  std::optional<double> image_slice;  // coordinate on axis 3 for 3-D heatmaps
  std::vector<CheckSpec> checks;
  nlohmann::json source;
};

// Throws ConfigurationError on malformed input.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

// {"half_space": {"normal": [..], "offset": b}}, {"box": {"lo": [..], "hi": [..]}}
// (null bounds are infinite), {"union": [..]}, {"intersection": [..]},
// {"complement": region}.
Region parse_region(const nlohmann::json& doc);

// Vec from a JSON array of numbers.
Vec parse_vec(const nlohmann::json& doc, std::size_t expected_dim = 0);

}  // namespace kinoclear
