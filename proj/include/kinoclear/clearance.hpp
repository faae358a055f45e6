#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "kinoclear/cost.hpp"
#include "kinoclear/parallel.hpp"
#include "kinoclear/reach.hpp"
#include "kinoclear/scene.hpp"

namespace kinoclear {

// Clearance as a multi-source reverse search to the BOUNDARY nodes.
//
// The lattice box truncates state space, so a large clr value may only mean
// the optimal route leaves the box. leak_cost is the cost-to-go to nodes that
// lose a primitive through the box faces; clr(n) is trusted ("certified")
// when it does not exceed leak_cost(n). Otherwise the true clearance on the
// unbounded domain is only known to be at least min(clr, leak_cost).
struct ClearanceField {
  std::shared_ptr<const PrimitiveGraph> graph;
  CostField field;
  std::vector<NodeId> witness;        // terminal BOUNDARY node of the optimal chain, or kNoNode
  std::vector<CostTicks> leak_cost;   // kUnreachable when nothing leaks

  CostTicks clr(NodeId n) const { return field.at(n); }
  double clr_cost(NodeId n) const { return field.cost(n); }
  bool certified(NodeId n) const { return clr(n) <= leak_cost[static_cast<std::size_t>(n)]; }
  CostTicks lower_bound(NodeId n) const { return std::min(clr(n), leak_cost[static_cast<std::size_t>(n)]); }
  std::size_t node_count() const { return field.value.size(); }
};

ClearanceField clearance_field(std::shared_ptr<const PrimitiveGraph> graph, const SearchOptions& options = {});

// FREE nodes with clr < rho, in increasing id order.
std::vector<NodeId> wave(const ClearanceField& cf, double rho);

enum class EnvelopeCategory : std::uint8_t {
  none = 0,
  envelope = 1,
  // Jump above kappa at a FREE node with a BOUNDARY face-neighbour, where the
  // stencil mixes obstacle-surface effects with free-space discontinuities.
  boundary_adjacent = 2,
  // Jump above kappa at a node whose own clearance is not certified.
  window_limited = 3,
};

struct EnvelopeMap {
  double kappa = 0.0;
  std::vector<CostTicks> rho_min;
  std::vector<CostTicks> rho_max;
  std::vector<CostTicks> jump;  // rho_max - rho_min; kUnreachable when rho_max is infinite
  std::vector<EnvelopeCategory> category;
  std::vector<std::uint8_t> envelope;  // category == envelope

  bool flagged(NodeId n) const { return envelope[static_cast<std::size_t>(n)] != 0; }
  EnvelopeCategory category_of(NodeId n) const { return category[static_cast<std::size_t>(n)]; }
  std::size_t count(EnvelopeCategory c) const;
};

// 4 h psi_max M_max / h0, with h0 the best sampled minimal Hamiltonian at the
// box centre (the ratio is dropped when no direction has h0 > 0).
double default_kappa(const ControlSystem& system, const Lattice& lattice);

EnvelopeMap envelope(const ClearanceField& cf, double kappa, const Execution& exec = {});

// Serial reference implementation of envelope().
EnvelopeMap envelope_serial(const ClearanceField& cf, double kappa);

}  // namespace kinoclear
