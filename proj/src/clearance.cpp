#include "kinoclear/clearance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kinoclear/errors.hpp"

namespace kinoclear {

ClearanceField clearance_field(std::shared_ptr<const PrimitiveGraph> graph, const SearchOptions& options) {
  if (!graph) throw ConfigurationError("clearance needs a graph");
  const Lattice& lat = *graph->lattice;
  std::vector<NodeId> boundary;
  for (std::size_t i = 0; i < lat.node_count(); ++i)
    if (lat.node_class(static_cast<NodeId>(i)) == NodeClass::boundary) boundary.push_back(static_cast<NodeId>(i));
  if (boundary.empty()) throw NoObstacleError("lattice has no BOUNDARY nodes; clearance would be infinite everywhere");

  ClearanceField cf;
  cf.field = cost_to(*graph, boundary, options);

  // Witnesses: resolve in increasing value order so every successor is done.
  const std::size_t n = lat.node_count();
  cf.witness.assign(n, kNoNode);
  std::vector<NodeId> order;
  for (std::size_t i = 0; i < n; ++i)
    if (cf.field.value[i] != kUnreachable) order.push_back(static_cast<NodeId>(i));
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return cf.field.at(a) < cf.field.at(b); });
  for (NodeId v : order) {
    const NodeId next = backpointer_node(*graph, cf.field, v);
    cf.witness[static_cast<std::size_t>(v)] = next == kNoNode ? v : cf.witness[static_cast<std::size_t>(next)];
  }

  std::vector<NodeId> leaks;
  for (std::size_t i = 0; i < n; ++i)
    if (graph->leaks[i]) leaks.push_back(static_cast<NodeId>(i));
  if (leaks.empty()) {
    cf.leak_cost.assign(n, kUnreachable);
  } else {
    SearchOptions lo = options;
    lo.cap = kUnreachable;
    cf.leak_cost = cost_to(*graph, leaks, lo).value;
  }
  cf.graph = std::move(graph);
  return cf;
}

std::vector<NodeId> wave(const ClearanceField& cf, double rho) {
  if (!(rho > 0.0)) throw ConfigurationError("wave level must be positive");
  const CostTicks r = std::isfinite(rho) ? to_ticks(rho) : kUnreachable;
  const Lattice& lat = *cf.graph->lattice;
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < cf.node_count(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (lat.node_class(id) == NodeClass::free && cf.clr(id) < r) out.push_back(id);
  }
  return out;
}

std::size_t EnvelopeMap::count(EnvelopeCategory c) const {
  return static_cast<std::size_t>(std::count(category.begin(), category.end(), c));
}

double default_kappa(const ControlSystem& system, const Lattice& lattice) {
  const SampledBounds b = sample_bounds(system, lattice);
  const double m_max = b.max_speed;
  const double psi_max = b.max_cost;
  Vec center(lattice.dim());
  for (std::size_t a = 0; a < lattice.dim(); ++a) {
    const auto& ax = lattice.axes()[a];
    center[a] = ax.topology.kind == AxisKind::circle ? 0.0 : 0.5 * (ax.lo + ax.hi);
  }
  const double h0 = best_direction(system, center, 64).second;
  // sin(pi) and friends leave round-off sized positive minima.
  const double ratio = h0 > 1e-9 * m_max ? m_max / h0 : 1.0;
  return 4.0 * lattice.max_spacing() * psi_max * ratio;
}

namespace {

struct Stencil {
  CostTicks rho_max = kUnreachable;
  CostTicks jump = 0;
  EnvelopeCategory category = EnvelopeCategory::none;
};

Stencil envelope_at(const ClearanceField& cf, CostTicks kappa, NodeId n) {
  const Lattice& lat = *cf.graph->lattice;
  Stencil s;
  const CostTicks c = cf.clr(n);
  s.rho_max = c;
  if (lat.node_class(n) != NodeClass::free || c == kUnreachable) return s;
  bool touches_boundary = false;
  lat.for_each_face_neighbor(n, [&](NodeId m) {
    const NodeClass k = lat.node_class(m);
    if (k == NodeClass::boundary) touches_boundary = true;
    if (k != NodeClass::free) return;
    s.rho_max = std::max(s.rho_max, cf.lower_bound(m));
  });
  s.jump = s.rho_max == kUnreachable ? kUnreachable : s.rho_max - c;
  if (s.jump > kappa) {
    if (!cf.certified(n))
      s.category = EnvelopeCategory::window_limited;
    else if (touches_boundary)
      s.category = EnvelopeCategory::boundary_adjacent;
    else
      s.category = EnvelopeCategory::envelope;
  }
  return s;
}

EnvelopeMap make_map(const ClearanceField& cf, double kappa) {
  if (!(kappa > 0.0)) throw ConfigurationError("envelope threshold kappa must be positive");
  EnvelopeMap em;
  em.kappa = kappa;
  const std::size_t n = cf.node_count();
  em.rho_min = cf.field.value;
  em.rho_max.assign(n, kUnreachable);
  em.jump.assign(n, 0);
  em.category.assign(n, EnvelopeCategory::none);
  em.envelope.assign(n, 0);
  return em;
}

void store(EnvelopeMap& em, std::size_t i, const Stencil& s) {
  em.rho_max[i] = s.rho_max;
  em.jump[i] = s.jump;
  em.category[i] = s.category;
  em.envelope[i] = s.category == EnvelopeCategory::envelope ? 1 : 0;
}

}  // namespace

EnvelopeMap envelope(const ClearanceField& cf, double kappa, const Execution& exec) {
  EnvelopeMap em = make_map(cf, kappa);
  const CostTicks k = to_ticks(kappa);
  const auto n = static_cast<std::int64_t>(cf.node_count());
#pragma omp parallel for schedule(static) num_threads(exec.workers)
  for (std::int64_t i = 0; i < n; ++i) store(em, static_cast<std::size_t>(i), envelope_at(cf, k, i));
  return em;
}

EnvelopeMap envelope_serial(const ClearanceField& cf, double kappa) {
  EnvelopeMap em = make_map(cf, kappa);
  const CostTicks k = to_ticks(kappa);
  for (std::size_t i = 0; i < cf.node_count(); ++i) store(em, i, envelope_at(cf, k, static_cast<NodeId>(i)));
  return em;
}

}  // namespace kinoclear
