#include "kinoclear/reach.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kinoclear/errors.hpp"

namespace kinoclear {

namespace {

struct NodePrimitives {
  std::vector<Edge> edges;
  bool leak = false;
};

// Boundary node closest to a contact point, searched among the nearest node
// and its Moore neighbours. Ties go to the smaller id.
NodeId contact_target(const Lattice& lattice, const Vec& p) {
  const NodeId center = lattice.nearest(p);
  if (center == kNoNode) return kNoNode;
  NodeId best = kNoNode;
  double best_d = std::numeric_limits<double>::infinity();
  auto consider = [&](NodeId m) {
    if (lattice.node_class(m) != NodeClass::boundary) return;
    const double d = lattice.distance(p, lattice.coords(m));
    if (d < best_d || (d == best_d && m < best)) {
      best_d = d;
      best = m;
    }
  };
  consider(center);
  lattice.for_each_moore_neighbor(center, consider);
  return best;
}

struct PrimitiveSettings {
  double tau = 0.0;
  int steps = 0;
  bool contact_edges = true;
};

NodePrimitives primitives_from(const ControlSystem& system, const Lattice& lattice, const PrimitiveSettings& ps,
                               NodeId node) {
  NodePrimitives out;
  if (!lattice.in_graph(node)) return out;
  const Scene& scene = lattice.scene();
  const Vec x0 = lattice.coords(node);
  const double dt = ps.tau / ps.steps;

  for (std::size_t ui = 0; ui < system.controls.size(); ++ui) {
    const Vec& u = system.controls[ui];
    Vec x = x0;
    double cost = 0.0;
    bool done = false;
    for (int i = 0; i < ps.steps && !done; ++i) {
      const Vec prev = x;
      const double prev_cost = cost;
      cost += rk4_step_with_cost(system, x, u, dt);
      if (scene.in_obstacle_interior(x)) {
        done = true;
        if (!ps.contact_edges) break;
        // Bisect for the last sub-step fraction that stays out of the interior.
        double lo = 0.0;
        double hi = 1.0;
        Vec contact = prev;
        double contact_cost = prev_cost;
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (lo + hi);
          Vec y = prev;
          const double c = rk4_step_with_cost(system, y, u, dt * mid);
          if (scene.in_obstacle_interior(y)) {
            hi = mid;
          } else {
            lo = mid;
            contact = y;
            contact_cost = prev_cost + c;
          }
        }
        const NodeId target = contact_target(lattice, contact);
        if (target == kNoNode || target == node) break;
        out.edges.push_back({target, std::max<CostTicks>(1, to_ticks(contact_cost)), static_cast<std::uint32_t>(ui),
                             dt * (i + lo), true});
      } else if (!lattice.in_box(x)) {
        out.leak = true;
        done = true;
      }
    }
    if (done) continue;
    const NodeId target = lattice.nearest(x);
    if (target == kNoNode) {
      out.leak = true;
      continue;
    }
    if (target == node || !lattice.in_graph(target)) continue;
    out.edges.push_back(
        {target, std::max<CostTicks>(1, to_ticks(cost)), static_cast<std::uint32_t>(ui), ps.tau, false});
  }

  // One edge per target: cheapest, then lowest control index.
  std::sort(out.edges.begin(), out.edges.end(), [](const Edge& a, const Edge& b) {
    if (a.target != b.target) return a.target < b.target;
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.control < b.control;
  });
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end(),
                              [](const Edge& a, const Edge& b) { return a.target == b.target; }),
                  out.edges.end());
  return out;
}

PrimitiveSettings settings_for(const ControlSystem& system, const Lattice& lattice, const GraphOptions& options) {
  if (system.state_dim != lattice.dim())
    throw ConfigurationError("system '" + system.name + "' has dimension " + std::to_string(system.state_dim) +
                             " but the lattice has dimension " + std::to_string(lattice.dim()));
  if (system.controls.empty()) throw ConfigurationError("system has no control samples");
  if (options.collision_substeps < 1) throw ConfigurationError("collision_substeps must be positive");
  if (!(options.integration_step > 0.0)) throw ConfigurationError("integration_step must be positive");

  PrimitiveSettings ps;
  ps.tau = options.tau > 0.0 ? options.tau : default_tau(system, lattice);
  ps.contact_edges = options.contact_edges;

  // A primitive has to be able to leave its own cell.
  double max_speed = 0.0;
  const Vec c = lattice.coords(static_cast<NodeId>(lattice.node_count() / 2));
  for (const Vec& u : system.controls) max_speed = std::max(max_speed, norm(system.velocity(c, u)));
  if (ps.tau * max_speed < lattice.max_spacing() * (1.0 - 1e-9))
    throw ConfigurationError("primitive duration " + std::to_string(ps.tau) +
                             " is too short to cross one lattice cell");

  const int subs = options.collision_substeps;
  int steps = static_cast<int>(std::ceil(ps.tau / options.integration_step - 1e-9));
  steps = std::max(steps, subs);
  steps = (steps + subs - 1) / subs * subs;
  ps.steps = steps;
  return ps;
}

PrimitiveGraph assemble(std::shared_ptr<const ControlSystem> system, std::shared_ptr<const Lattice> lattice,
                        const PrimitiveSettings& ps, int substeps, std::vector<NodePrimitives>& per_node) {
  PrimitiveGraph g;
  g.system = std::move(system);
  g.lattice = std::move(lattice);
  g.tau = ps.tau;
  g.collision_substeps = substeps;

  const std::size_t n = per_node.size();
  g.offsets.assign(n + 1, 0);
  g.leaks.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    g.offsets[i + 1] = g.offsets[i] + per_node[i].edges.size();
    g.leaks[i] = per_node[i].leak ? 1 : 0;
  }
  g.edges.reserve(g.offsets[n]);
  for (auto& p : per_node) {
    g.edges.insert(g.edges.end(), p.edges.begin(), p.edges.end());
    std::vector<Edge>().swap(p.edges);
  }
  if (g.edges.empty()) throw DegenerateGraphError("motion-primitive graph has no edges");

  // Reverse adjacency by counting sort; sources come out in increasing order.
  g.rev_offsets.assign(n + 1, 0);
  for (const Edge& e : g.edges) ++g.rev_offsets[static_cast<std::size_t>(e.target) + 1];
  for (std::size_t i = 0; i < n; ++i) g.rev_offsets[i + 1] += g.rev_offsets[i];
  g.rev_sources.resize(g.edges.size());
  g.rev_edge_index.resize(g.edges.size());
  std::vector<std::size_t> fill(g.rev_offsets.begin(), g.rev_offsets.end() - 1);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t k = g.offsets[s]; k < g.offsets[s + 1]; ++k) {
      const auto t = static_cast<std::size_t>(g.edges[k].target);
      g.rev_sources[fill[t]] = static_cast<NodeId>(s);
      g.rev_edge_index[fill[t]] = k;
      ++fill[t];
    }
  }
  return g;
}

void check_inputs(const std::shared_ptr<const ControlSystem>& system, const std::shared_ptr<const Lattice>& lattice) {
  if (!system || !lattice) throw ConfigurationError("graph needs a system and a lattice");
  if (lattice->node_count() == 0) throw DegenerateGraphError("lattice is empty");
}

}  // namespace

std::optional<Edge> PrimitiveGraph::find_edge(NodeId a, NodeId b) const {
  for (const Edge& e : out_edges(a))
    if (e.target == b) return e;
  return std::nullopt;
}

CostTicks PrimitiveGraph::min_edge_cost() const {
  CostTicks m = kUnreachable;
  for (const Edge& e : edges) m = std::min(m, e.cost);
  return m;
}

SampledBounds sample_bounds(const ControlSystem& system, const Lattice& lattice) {
  const std::size_t n = lattice.node_count();
  const std::size_t stride = std::max<std::size_t>(1, n / 2000);
  SampledBounds b;
  b.min_speed = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; i += stride) {
    const auto id = static_cast<NodeId>(i);
    if (!lattice.in_graph(id)) continue;
    const Vec x = lattice.coords(id);
    for (const Vec& u : system.controls) {
      const Vec v = system.velocity(x, u);
      const double s = norm(v);
      b.max_speed = std::max(b.max_speed, s);
      if (s > 1e-12) b.min_speed = std::min(b.min_speed, s);
      b.max_cost = std::max(b.max_cost, system.running_cost(x, v));
    }
  }
  if (!std::isfinite(b.min_speed)) b.min_speed = 0.0;
  return b;
}

double default_tau(const ControlSystem& system, const Lattice& lattice) {
  const SampledBounds b = sample_bounds(system, lattice);
  if (!(b.max_speed > 0.0) || !(b.min_speed > 0.0)) throw DegenerateGraphError("no nonzero velocity on the lattice");
  const double h = lattice.max_spacing();
  const double tau = h / (0.8 * b.min_speed);
  return std::clamp(tau, h / b.max_speed, 3.0 * h / b.max_speed);
}

PrimitiveGraph build_graph(std::shared_ptr<const ControlSystem> system, std::shared_ptr<const Lattice> lattice,
                           const GraphOptions& options, const Execution& exec) {
  check_inputs(system, lattice);
  const PrimitiveSettings ps = settings_for(*system, *lattice, options);
  const auto n = static_cast<std::int64_t>(lattice->node_count());
  std::vector<NodePrimitives> per_node(static_cast<std::size_t>(n));
  const ControlSystem& sys = *system;
  const Lattice& lat = *lattice;
#pragma omp parallel for schedule(dynamic, 256) num_threads(exec.workers)
  for (std::int64_t i = 0; i < n; ++i) per_node[static_cast<std::size_t>(i)] = primitives_from(sys, lat, ps, i);
  return assemble(std::move(system), std::move(lattice), ps, options.collision_substeps, per_node);
}

PrimitiveGraph build_graph_serial(std::shared_ptr<const ControlSystem> system, std::shared_ptr<const Lattice> lattice,
                                  const GraphOptions& options) {
  check_inputs(system, lattice);
  const PrimitiveSettings ps = settings_for(*system, *lattice, options);
  const std::size_t n = lattice->node_count();
  std::vector<NodePrimitives> per_node(n);
  for (std::size_t i = 0; i < n; ++i) per_node[i] = primitives_from(*system, *lattice, ps, static_cast<NodeId>(i));
  return assemble(std::move(system), std::move(lattice), ps, options.collision_substeps, per_node);
}

// ---------------------------------------------------------------------------
// Searches

namespace {

// Calls fn(other, cost, edge_index) for every edge leaving n in the search
// direction: successors for forward fields, predecessors for reverse ones.
template <typename Fn>
void for_each_relaxation(const PrimitiveGraph& g, FieldDirection dir, NodeId n, Fn&& fn) {
  const auto i = static_cast<std::size_t>(n);
  if (dir == FieldDirection::forward) {
    for (std::size_t k = g.offsets[i]; k < g.offsets[i + 1]; ++k) fn(g.edges[k].target, g.edges[k].cost, k);
  } else {
    for (std::size_t k = g.rev_offsets[i]; k < g.rev_offsets[i + 1]; ++k) {
      const std::size_t e = g.rev_edge_index[k];
      fn(g.rev_sources[k], g.edges[e].cost, e);
    }
  }
}

void dijkstra(const PrimitiveGraph& g, FieldDirection dir, std::vector<CostTicks>& value, CostTicks cap) {
  using Item = std::pair<CostTicks, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (std::size_t i = 0; i < value.size(); ++i)
    if (value[i] == 0) pq.emplace(0, static_cast<NodeId>(i));
  while (!pq.empty()) {
    const auto [d, n] = pq.top();
    pq.pop();
    if (d != value[static_cast<std::size_t>(n)]) continue;
    if (d >= cap) break;
    for_each_relaxation(g, dir, n, [&](NodeId m, CostTicks c, std::size_t) {
      const CostTicks nd = d + c;
      CostTicks& v = value[static_cast<std::size_t>(m)];
      if (nd < v) {
        v = nd;
        pq.emplace(nd, m);
      }
    });
  }
}

void label_correcting(const PrimitiveGraph& g, FieldDirection dir, std::vector<CostTicks>& value, CostTicks cap,
                      const Execution& exec) {
  std::vector<NodeId> frontier;
  for (std::size_t i = 0; i < value.size(); ++i)
    if (value[i] == 0) frontier.push_back(static_cast<NodeId>(i));
  std::vector<std::uint8_t> queued(value.size(), 0);

  while (!frontier.empty()) {
    std::vector<NodeId> next;
    const auto count = static_cast<std::int64_t>(frontier.size());
#pragma omp parallel num_threads(exec.workers)
    {
      std::vector<NodeId> local;
#pragma omp for schedule(dynamic, 64)
      for (std::int64_t k = 0; k < count; ++k) {
        const NodeId n = frontier[static_cast<std::size_t>(k)];
        const CostTicks d = std::atomic_ref<CostTicks>(value[static_cast<std::size_t>(n)]).load();
        for_each_relaxation(g, dir, n, [&](NodeId m, CostTicks c, std::size_t) {
          const CostTicks nd = d + c;
          if (nd >= cap) return;
          std::atomic_ref<CostTicks> slot(value[static_cast<std::size_t>(m)]);
          CostTicks cur = slot.load();
          while (nd < cur) {
            if (slot.compare_exchange_weak(cur, nd)) {
              std::atomic_ref<std::uint8_t> flag(queued[static_cast<std::size_t>(m)]);
              if (flag.exchange(1) == 0) local.push_back(m);
              break;
            }
          }
        });
      }
#pragma omp critical
      next.insert(next.end(), local.begin(), local.end());
    }
    std::sort(next.begin(), next.end());
    for (NodeId m : next) queued[static_cast<std::size_t>(m)] = 0;
    frontier = std::move(next);
  }
}

// Canonical tight-edge backpointers, independent of the search order.
std::vector<std::int64_t> canonical_backpointers(const PrimitiveGraph& g, FieldDirection dir,
                                                 const std::vector<CostTicks>& value, const Execution& exec) {
  const auto n = static_cast<std::int64_t>(value.size());
  std::vector<std::int64_t> bp(value.size(), kNoEdge);
#pragma omp parallel for schedule(static) num_threads(exec.workers)
  for (std::int64_t i = 0; i < n; ++i) {
    const CostTicks v = value[static_cast<std::size_t>(i)];
    if (v == kUnreachable || v == 0) continue;
    NodeId best_other = kNoNode;
    std::int64_t best_edge = kNoEdge;
    // Walk edges in the opposite direction of the search.
    const FieldDirection back = dir == FieldDirection::forward ? FieldDirection::reverse : FieldDirection::forward;
    for_each_relaxation(g, back, i, [&](NodeId m, CostTicks c, std::size_t e) {
      const CostTicks vm = value[static_cast<std::size_t>(m)];
      if (vm == kUnreachable || vm + c != v) return;
      const auto ei = static_cast<std::int64_t>(e);
      if (best_edge == kNoEdge || m < best_other || (m == best_other && ei < best_edge)) {
        best_other = m;
        best_edge = ei;
      }
    });
    bp[static_cast<std::size_t>(i)] = best_edge;
  }
  return bp;
}

CostField run_search(const PrimitiveGraph& g, FieldDirection dir, std::vector<NodeId> sources,
                     const SearchOptions& options) {
  CostField f;
  f.direction = dir;
  std::sort(sources.begin(), sources.end());
  sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
  f.value.assign(g.node_count(), kUnreachable);
  for (NodeId s : sources) f.value[static_cast<std::size_t>(s)] = 0;
  f.sources = std::move(sources);
  if (options.cap <= 0) {
    for (CostTicks& v : f.value) v = kUnreachable;
  } else if (options.mode == SearchMode::dijkstra) {
    dijkstra(g, dir, f.value, options.cap);
  } else {
    label_correcting(g, dir, f.value, options.cap, options.exec);
  }
  if (options.cap != kUnreachable)
    for (CostTicks& v : f.value)
      if (v >= options.cap) v = kUnreachable;
  f.backpointer = canonical_backpointers(g, dir, f.value, options.exec);
  return f;
}

void check_node_list(const PrimitiveGraph& g, std::span<const NodeId> nodes, bool as_source) {
  for (NodeId n : nodes) {
    if (n < 0 || static_cast<std::size_t>(n) >= g.node_count()) {
      const std::string msg = "node id " + std::to_string(n) + " is outside the lattice";
      if (as_source) throw InvalidSourceError(msg);
      throw InvalidTargetError(msg);
    }
    if (!g.lattice->in_graph(n)) {
      const std::string msg = "node " + std::to_string(n) + " lies in the obstacle interior";
      if (as_source) throw InvalidSourceError(msg);
      throw InvalidTargetError(msg);
    }
  }
}

}  // namespace

NodeId edge_source(const PrimitiveGraph& graph, std::size_t edge_index) {
  const auto it = std::upper_bound(graph.offsets.begin(), graph.offsets.end(), edge_index);
  return static_cast<NodeId>(std::distance(graph.offsets.begin(), it) - 1);
}

NodeId backpointer_node(const PrimitiveGraph& graph, const CostField& field, NodeId n) {
  const std::int64_t e = field.backpointer[static_cast<std::size_t>(n)];
  if (e == kNoEdge) return kNoNode;
  if (field.direction == FieldDirection::forward) return edge_source(graph, static_cast<std::size_t>(e));
  return graph.edges[static_cast<std::size_t>(e)].target;
}

CostField cost_from(const PrimitiveGraph& graph, const Vec& x, const SearchOptions& options) {
  if (x.size() != graph.lattice->dim()) throw InvalidSourceError("source has the wrong dimension");
  const NodeId n = graph.lattice->nearest(x);
  if (n == kNoNode) throw InvalidSourceError("source lies outside the lattice box");
  if (!graph.lattice->in_graph(n)) throw InvalidSourceError("source snaps to an obstacle-interior node");
  return run_search(graph, FieldDirection::forward, {n}, options);
}

CostField cost_from_nodes(const PrimitiveGraph& graph, std::span<const NodeId> sources, const SearchOptions& options) {
  if (sources.empty()) throw InvalidSourceError("empty source set");
  check_node_list(graph, sources, true);
  return run_search(graph, FieldDirection::forward, {sources.begin(), sources.end()}, options);
}

CostField cost_to(const PrimitiveGraph& graph, std::span<const NodeId> targets, const SearchOptions& options) {
  if (targets.empty()) throw InvalidTargetError("empty target set");
  check_node_list(graph, targets, false);
  return run_search(graph, FieldDirection::reverse, {targets.begin(), targets.end()}, options);
}

std::vector<NodeId> reachable_set(const CostField& field, double rho) {
  std::vector<NodeId> out;
  if (!(rho > 0.0)) return out;
  const CostTicks r = std::isfinite(rho) ? to_ticks(rho) : kUnreachable;
  for (std::size_t i = 0; i < field.value.size(); ++i)
    if (field.value[i] < r) out.push_back(static_cast<NodeId>(i));
  return out;
}

GraphPath extract_path(const PrimitiveGraph& graph, const CostField& field, NodeId endpoint) {
  if (endpoint < 0 || static_cast<std::size_t>(endpoint) >= field.value.size())
    throw NoPathError("endpoint is outside the lattice");
  if (!field.reachable(endpoint)) throw NoPathError("endpoint " + std::to_string(endpoint) + " is unreachable");

  GraphPath p;
  NodeId n = endpoint;
  p.nodes.push_back(n);
  while (field.backpointer[static_cast<std::size_t>(n)] != kNoEdge) {
    const auto e = static_cast<std::size_t>(field.backpointer[static_cast<std::size_t>(n)]);
    p.edge_indices.push_back(e);
    n = backpointer_node(graph, field, n);
    p.nodes.push_back(n);
  }
  if (field.direction == FieldDirection::forward) {
    std::reverse(p.nodes.begin(), p.nodes.end());
    std::reverse(p.edge_indices.begin(), p.edge_indices.end());
  }

  p.prefix_cost.push_back(0);
  for (std::size_t e : p.edge_indices) p.prefix_cost.push_back(p.prefix_cost.back() + graph.edges[e].cost);
  p.cost_ticks = p.prefix_cost.back();
  p.trajectory = path_trajectory(graph, p.nodes, p.edge_indices);
  return p;
}

Trajectory path_trajectory(const PrimitiveGraph& graph, const std::vector<NodeId>& nodes,
                           const std::vector<std::size_t>& edge_indices) {
  const ControlSystem& sys = *graph.system;
  Trajectory traj;
  double t = 0.0;
  CostTicks total = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    TrajectorySample s;
    s.time = t;
    s.state = graph.lattice->coords(nodes[i]);
    if (i < edge_indices.size()) {
      const Edge& e = graph.edges[edge_indices[i]];
      s.control = sys.controls[e.control];
      t += e.duration;
      total += e.cost;
    } else if (!edge_indices.empty()) {
      s.control = sys.controls[graph.edges[edge_indices.back()].control];
    } else {
      s.control = Vec(sys.controls.front().size());
    }
    traj.samples.push_back(std::move(s));
  }
  traj.total_cost = to_cost(total);
  traj.duration = t;
  return traj;
}

Trajectory extract_trajectory(const PrimitiveGraph& graph, const CostField& field, NodeId endpoint) {
  return extract_path(graph, field, endpoint).trajectory;
}

double hausdorff_distance(const Lattice& lattice, std::span<const NodeId> a, std::span<const NodeId> b,
                          const Execution& exec) {
  if (a.empty() || b.empty()) throw UndefinedDistanceError("Hausdorff distance of an empty node set");
  std::vector<Vec> pa;
  std::vector<Vec> pb;
  pa.reserve(a.size());
  pb.reserve(b.size());
  for (NodeId n : a) pa.push_back(lattice.coords(n));
  for (NodeId n : b) pb.push_back(lattice.coords(n));

  auto directed = [&](const std::vector<Vec>& from, const std::vector<Vec>& to) {
    double worst = 0.0;
    const auto count = static_cast<std::int64_t>(from.size());
#pragma omp parallel for schedule(dynamic, 64) reduction(max : worst) num_threads(exec.workers)
    for (std::int64_t i = 0; i < count; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec& q : to) {
        best = std::min(best, lattice.distance(from[static_cast<std::size_t>(i)], q));
        if (best == 0.0) break;
      }
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(pa, pb), directed(pb, pa));
}

}  // namespace kinoclear
