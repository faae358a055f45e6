#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "kinoclear/cost.hpp"
#include "kinoclear/parallel.hpp"
#include "kinoclear/scene.hpp"
#include "kinoclear/systems.hpp"

namespace kinoclear {

struct Edge {
  NodeId target = kNoNode;
  CostTicks cost = 0;
  std::uint32_t control = 0;
  double duration = 0.0;
  // Truncated primitive ending at its first obstacle contact.
  bool contact = false;
};

struct GraphOptions {
  double tau = 0.0;              // primitive duration; <= 0 selects the default
  int collision_substeps = 8;    // minimum number of collision samples per primitive
  double integration_step = 0.01;
  // Keep primitives that run into the obstacle as edges to the boundary node
  // at the first contact point, with the cost accrued up to contact.
  bool contact_edges = true;
};

// Motion-primitive graph over FREE and BOUNDARY lattice nodes.
struct PrimitiveGraph {
  std::shared_ptr<const ControlSystem> system;
  std::shared_ptr<const Lattice> lattice;
  double tau = 0.0;
  int collision_substeps = 0;

  // Forward CSR adjacency; edges of a node are sorted by target id.
  std::vector<std::size_t> offsets;
  std::vector<Edge> edges;

  // Reverse CSR: for each node the (source, forward edge index) pairs.
  std::vector<std::size_t> rev_offsets;
  std::vector<NodeId> rev_sources;
  std::vector<std::size_t> rev_edge_index;

  // Nodes with at least one primitive discarded for leaving the lattice box.
  std::vector<std::uint8_t> leaks;

  std::size_t node_count() const { return lattice->node_count(); }
  std::span<const Edge> out_edges(NodeId n) const {
    const auto i = static_cast<std::size_t>(n);
    return {edges.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  std::size_t edge_count() const { return edges.size(); }
  // Cheapest edge a -> b, if any.
  std::optional<Edge> find_edge(NodeId a, NodeId b) const;
  CostTicks min_edge_cost() const;
};

// Speed and running-cost extremes over the controls at a strided sample of
// graph nodes.
struct SampledBounds {
  double min_speed = 0.0;  // smallest nonzero speed
  double max_speed = 0.0;
  double max_cost = 0.0;   // psi_max
};

SampledBounds sample_bounds(const ControlSystem& system, const Lattice& lattice);

// tau = h_max / (0.8 * min nonzero speed), clamped so a primitive travels
// between one and three cells at the largest sampled speed.
double default_tau(const ControlSystem& system, const Lattice& lattice);

PrimitiveGraph build_graph(std::shared_ptr<const ControlSystem> system, std::shared_ptr<const Lattice> lattice,
                           const GraphOptions& options = {}, const Execution& exec = {});

// Serial reference implementation of build_graph.
PrimitiveGraph build_graph_serial(std::shared_ptr<const ControlSystem> system, std::shared_ptr<const Lattice> lattice,
                                  const GraphOptions& options = {});

enum class SearchMode {
  dijkstra,                  // sequential, ties broken by node id
  parallel_label_correcting  // frontier-based relaxation with OpenMP
};

struct SearchOptions {
  SearchMode mode = SearchMode::dijkstra;
  // Values at or above the cap are reported unreachable.
  CostTicks cap = kUnreachable;
  Execution exec;
};

enum class FieldDirection { forward, reverse };

// Optimal cost-to-come (forward) or cost-to-go (reverse) over the graph.
// For forward fields backpointer[n] is the index of the tight edge into n;
// for reverse fields it is the index of the tight edge out of n. Both refer to
// PrimitiveGraph::edges. Among tight edges the one whose other end has the
// smallest id wins, so the arrays do not depend on the search mode.
struct CostField {
  FieldDirection direction = FieldDirection::forward;
  std::vector<NodeId> sources;
  std::vector<CostTicks> value;
  std::vector<std::int64_t> backpointer;

  bool reachable(NodeId n) const { return value[static_cast<std::size_t>(n)] != kUnreachable; }
  CostTicks at(NodeId n) const { return value[static_cast<std::size_t>(n)]; }
  double cost(NodeId n) const { return to_cost(at(n)); }
};

inline constexpr std::int64_t kNoEdge = -1;

// Source node of forward edge index e.
NodeId edge_source(const PrimitiveGraph& graph, std::size_t edge_index);

// Node at the other end of the backpointer of n (predecessor for forward
// fields, successor for reverse fields), or kNoNode.
NodeId backpointer_node(const PrimitiveGraph& graph, const CostField& field, NodeId n);

CostField cost_from(const PrimitiveGraph& graph, const Vec& x, const SearchOptions& options = {});
CostField cost_from_nodes(const PrimitiveGraph& graph, std::span<const NodeId> sources,
                          const SearchOptions& options = {});
CostField cost_to(const PrimitiveGraph& graph, std::span<const NodeId> targets, const SearchOptions& options = {});

// {n : value(n) < rho}, in increasing id order.
std::vector<NodeId> reachable_set(const CostField& field, double rho);

struct GraphPath {
  std::vector<NodeId> nodes;
  std::vector<std::size_t> edge_indices;  // edge i joins nodes[i] -> nodes[i+1]
  std::vector<CostTicks> prefix_cost;     // cost from nodes[0] to nodes[i]
  Trajectory trajectory;
  CostTicks cost_ticks = 0;
};

// Follows backpointers from endpoint. Forward fields yield the path source ->
// endpoint; reverse fields yield endpoint -> target.
// Piecewise-constant trajectory through nodes along the given edges.
Trajectory path_trajectory(const PrimitiveGraph& graph, const std::vector<NodeId>& nodes,
                           const std::vector<std::size_t>& edge_indices);

GraphPath extract_path(const PrimitiveGraph& graph, const CostField& field, NodeId endpoint);
Trajectory extract_trajectory(const PrimitiveGraph& graph, const CostField& field, NodeId endpoint);

// Symmetric Hausdorff distance between node sets in the lattice metric.
double hausdorff_distance(const Lattice& lattice, std::span<const NodeId> a, std::span<const NodeId> b,
                          const Execution& exec = {});

}  // namespace kinoclear
