#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kinoclear/clearance.hpp"
#include "kinoclear/cost.hpp"
#include "kinoclear/reach.hpp"
#include "kinoclear/scene.hpp"
#include "kinoclear/systems.hpp"

namespace kinoclear {

// ---------------------------------------------------------------------------
// Clearance along trajectories

struct ClearanceStep {
  NodeId from = kNoNode;
  NodeId to = kNoNode;
  CostTicks clr_from = 0;
  CostTicks clr_to = 0;
  CostTicks step_bound = 0;  // edge cost, or graph distance when no direct edge exists
};

struct ClearanceAlongReport {
  std::vector<NodeId> nodes;                // trajectory snapped to nodes, consecutive repeats merged
  std::vector<ClearanceStep> steps;
  std::vector<std::size_t> upward_jumps;    // step indices with clr_to - clr_from > threshold
  std::vector<std::size_t> downward_jumps;  // step indices with clr_from - clr_to > threshold
  std::vector<std::size_t> violations;      // step indices with clr_from - clr_to > step_bound
  double threshold = 0.0;
  bool passed() const { return violations.empty(); }
};

// Snaps each sample to its nearest node. Throws InadmissibleTrajectoryError if
// a sample lies outside the lattice or snaps to an obstacle-interior node.
ClearanceAlongReport check_clearance_along(const ClearanceField& cf, const Trajectory& traj, double threshold);

// Same check on an explicit node sequence.
ClearanceAlongReport check_clearance_along_nodes(const ClearanceField& cf, const std::vector<NodeId>& nodes,
                                                 double threshold);

// Random walk along graph edges, stopping early at dead ends.
GraphPath random_graph_walk(const PrimitiveGraph& graph, NodeId start, std::size_t steps, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Principle of optimality and envelope propagation

struct OptimalityReport {
  bool applicable = false;
  std::vector<NodeId> chain;
  std::vector<CostTicks> prefix_cost;
  std::vector<std::size_t> mismatches;  // chain indices where clr(x) - clr(node) != prefix
  bool passed() const { return applicable && mismatches.empty(); }
};

OptimalityReport check_optimality_principle(const ClearanceField& cf, NodeId x);

struct PropagationReport {
  bool applicable = false;
  std::string reason;
  std::vector<NodeId> chain;
  std::size_t interior_nodes = 0;
  std::size_t flagged_nodes = 0;
  double fraction = 1.0;
  double required_fraction = 0.8;
  bool passed() const { return applicable && fraction >= required_fraction; }
};

PropagationReport check_envelope_propagation(const ClearanceField& cf, const EnvelopeMap& em, NodeId x);

// ---------------------------------------------------------------------------
// Shelf / cliff classification

enum class BoundaryLabel : std::uint8_t { not_boundary = 0, shelf = 1, cliff = 2 };

struct BoundaryClassification {
  double rho_probe = 0.0;
  std::vector<BoundaryLabel> label;
  std::vector<CostTicks> inflow_cost;  // min over FREE n of d_c(n, y), kUnreachable at or above the probe

  BoundaryLabel label_of(NodeId n) const { return label[static_cast<std::size_t>(n)]; }
  std::size_t count(BoundaryLabel l) const;
};

// 10 h psi_max with h the largest lattice spacing.
double default_probe_radius(const PrimitiveGraph& graph);

BoundaryClassification classify_boundary(const PrimitiveGraph& graph, double rho_probe,
                                         const SearchOptions& options = {});

// ---------------------------------------------------------------------------
// Hypotheses

struct H1Result {
  Vec direction;
  bool auto_direction = false;
  double hamiltonian = 0.0;  // min_hamiltonian(y0, xi)
  bool h1a = false;
  double r_star = 0.0;
  Vec star_point;                       // y* = y0 + (r*/|xi|) xi
  std::size_t boundary_in_ball = 0;
  std::vector<NodeId> cliff_in_ball;    // H1(b) offenders
  bool h1b = false;
  std::optional<DirectionalityCertificate> certificate;
  std::string certificate_error;
  bool holds() const { return h1a && h1b; }
};

// xi empty selects the best direction of a 64-entry fan at y0.
H1Result check_H1(const ControlSystem& system, const Lattice& lattice, const BoundaryClassification& bc, NodeId y0,
                  const Vec& xi, double r_star, std::size_t fan_size = 64);

struct H2Result {
  std::vector<double> radii;
  std::vector<int> component_counts;
  bool isolated = false;  // some ball held no FREE node
  bool holds() const;
};

H2Result check_H2(const Lattice& lattice, NodeId y0, const std::vector<double>& radii);

// ---------------------------------------------------------------------------
// Envelope generators

struct EnvGenReport {
  NodeId candidate = kNoNode;
  std::vector<double> radii;
  std::vector<double> thresholds;
  std::vector<NodeId> hits;  // lowest-clearance envelope node per level, or kNoNode
  bool verdict = false;
  std::optional<H1Result> h1_result;
  std::optional<H2Result> h2_result;
};

// {8, 4, 2} * kappa for both radii and thresholds.
std::vector<double> default_generator_levels(double kappa);

EnvGenReport detect_envelope_generator(const ClearanceField& cf, const EnvelopeMap& em, NodeId y0,
                                       const std::vector<double>& radii, const std::vector<double>& thresholds);

// ---------------------------------------------------------------------------
// Persistent boundary of reachable sets

struct PersistenceSide {
  std::vector<NodeId> persistent;  // nodes z != x in B_r(x) on the discrete boundary for every rho
  bool found() const { return !persistent.empty(); }
};

struct PersistentBoundaryReport {
  bool applicable = false;
  std::string reason;
  std::optional<DirectionalityCertificate> certificate;
  std::vector<double> rho_list;
  double radius = 0.0;
  bool degenerate = false;  // first rho below the cheapest edge
  PersistenceSide reverse;
  PersistenceSide forward;
  bool passed() const { return applicable && reverse.found() && forward.found(); }
};

// A node is on the discrete boundary of S when its closed Moore neighbourhood
// contains members and non-members of S.
bool on_discrete_boundary(const Lattice& lattice, const std::vector<std::uint8_t>& member, NodeId z);

// The certificate uses xi (best fan direction when empty) with r* = r.
PersistentBoundaryReport check_persistent_boundary(const PrimitiveGraph& graph, NodeId x, double r,
                                                   const std::vector<double>& rho_list, const Vec& xi = {});

// ---------------------------------------------------------------------------
// Uniform penetration

struct PenetrationReport {
  bool applicable = false;
  std::size_t samples = 0;
  std::size_t containment_failures = 0;  // endpoint outside B_{eta*(t*) r*}(x*)
  std::size_t stlnr_failures = 0;        // endpoint of cost rho inside B_{r(rho)}(anchor)
  std::size_t monotone_failures = 0;     // |x* - pi(t)| increased beyond tolerance
  double worst_margin = 0.0;             // min over samples of eta*(t*) r* - |end - x*|
  bool passed() const {
    return applicable && containment_failures == 0 && stlnr_failures == 0 && monotone_failures == 0;
  }
};

PenetrationReport check_uniform_penetration(const ControlSystem& system, const DirectionalityCertificate& cert,
                                            std::size_t n_samples, std::uint64_t seed = 1, double step = 0.001);

// ---------------------------------------------------------------------------
// Graph-level property suite

struct PropertySuiteOptions {
  std::size_t triples = 100;
  std::size_t chains = 50;
  std::size_t nesting_pairs = 5;
  std::size_t walks = 50;
  std::size_t walk_length = 40;
  std::uint64_t seed = 1;
};

struct PropertyCheck {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  bool passed() const { return failures == 0; }
};

struct PropertySuiteReport {
  std::vector<PropertyCheck> checks;
  bool passed() const;
};

// Quasi-metric axioms, Bellman prefix optimality, rho_min == clr, wave
// nesting and the downward-jump bound, all compared exactly in ticks.
PropertySuiteReport run_property_suite(const ClearanceField& cf, const EnvelopeMap& em,
                                       const PropertySuiteOptions& options = {});

// Reachable-set nesting: for rho < mu every node of F_rho and every face
// neighbour joined to it by a graph edge has value < mu.
bool check_nesting(const PrimitiveGraph& graph, const CostField& field, double rho, double mu);

// ---------------------------------------------------------------------------
// Lipschitz dependence of sublevel sets on the base point

struct SublevelLipschitzReport {
  double rho = 0.0;
  std::vector<NodeId> bases;
  std::vector<double> ratios;  // Hausdorff(F_rho(x0), F_rho(xi)) / |x0 - xi|
  double max_ratio = 0.0;
};

SublevelLipschitzReport check_sublevel_lipschitz(const PrimitiveGraph& graph, NodeId x, double rho);

}  // namespace kinoclear
