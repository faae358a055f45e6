#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kinoclear/clearance.hpp"
#include "kinoclear/reach.hpp"
#include "kinoclear/scene.hpp"
#include "kinoclear/systems.hpp"

namespace test {

struct World {
  std::shared_ptr<const kinoclear::ControlSystem> system;
  std::shared_ptr<const kinoclear::Lattice> lattice;
  std::shared_ptr<const kinoclear::PrimitiveGraph> graph;
};

inline World make_world(const std::string& system, const kinoclear::Scene& scene, std::vector<double> spacing,
                        double tau, int samples, int workers = 1) {
  World w;
  w.system = std::make_shared<const kinoclear::ControlSystem>(kinoclear::builtin_system(system, samples));
  w.lattice = std::make_shared<const kinoclear::Lattice>(
      kinoclear::build_lattice(scene, w.system->axes, spacing, kinoclear::Execution{workers}));
  kinoclear::GraphOptions go;
  go.tau = tau;
  w.graph = std::make_shared<const kinoclear::PrimitiveGraph>(
      kinoclear::build_graph(w.system, w.lattice, go, kinoclear::Execution{workers}));
  return w;
}

// Galaga corner at h = 0.05, tau = 0.05, 32 controls.
inline const World& galaga_corner() {
  static const World w = make_world("galaga", kinoclear::builtin_scene("galaga-corner"), {0.05, 0.05}, 0.05, 32);
  return w;
}

inline const kinoclear::ClearanceField& galaga_corner_clearance() {
  static const kinoclear::ClearanceField cf = kinoclear::clearance_field(galaga_corner().graph);
  return cf;
}

// Coarse Galaga corner for brute-force oracles.
inline const World& galaga_coarse() {
  static const World w = make_world("galaga", kinoclear::builtin_scene("galaga-corner"), {0.1, 0.1}, 0.1, 9);
  return w;
}

inline kinoclear::NodeId node_at(const World& w, const kinoclear::Vec& x) { return w.lattice->nearest(x); }

}  // namespace test
