#include "kinoclear/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kinoclear/errors.hpp"

namespace kinoclear {

namespace {

NodeId pick_node(const std::vector<NodeId>& pool, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return pool[pick(rng)];
}

std::vector<NodeId> free_nodes_with_edges(const PrimitiveGraph& graph) {
  std::vector<NodeId> out;
  const Lattice& lat = *graph.lattice;
  for (std::size_t i = 0; i < lat.node_count(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (lat.node_class(id) == NodeClass::free && !graph.out_edges(id).empty()) out.push_back(id);
  }
  return out;
}

CostTicks saturating_ticks(double rho) { return std::isfinite(rho) ? to_ticks(rho) : kUnreachable; }

}  // namespace

// ---------------------------------------------------------------------------
// Clearance along trajectories

ClearanceAlongReport check_clearance_along(const ClearanceField& cf, const Trajectory& traj, double threshold) {
  const Lattice& lat = *cf.graph->lattice;
  std::vector<NodeId> nodes;
  for (const TrajectorySample& s : traj.samples) {
    const NodeId n = lat.nearest(s.state);
    if (n == kNoNode) throw InadmissibleTrajectoryError("trajectory sample leaves the lattice box");
    if (!lat.in_graph(n)) throw InadmissibleTrajectoryError("trajectory sample snaps into the obstacle interior");
    if (nodes.empty() || nodes.back() != n) nodes.push_back(n);
  }
  return check_clearance_along_nodes(cf, nodes, threshold);
}

ClearanceAlongReport check_clearance_along_nodes(const ClearanceField& cf, const std::vector<NodeId>& nodes,
                                                 double threshold) {
  const PrimitiveGraph& g = *cf.graph;
  ClearanceAlongReport r;
  r.threshold = threshold;
  r.nodes = nodes;
  const CostTicks thr = saturating_ticks(threshold);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    ClearanceStep s;
    s.from = nodes[i];
    s.to = nodes[i + 1];
    if (!g.lattice->in_graph(s.from) || !g.lattice->in_graph(s.to))
      throw InadmissibleTrajectoryError("trajectory node lies in the obstacle interior");
    s.clr_from = cf.clr(s.from);
    s.clr_to = cf.clr(s.to);

    if (const auto e = g.find_edge(s.from, s.to)) {
      s.step_bound = e->cost;
    } else {
      // No direct edge: the bound is the graph distance. Only its relation to
      // the clearance drop matters, so search no further than the drop.
      CostTicks drop = kUnreachable;
      if (s.clr_from != kUnreachable && s.clr_to != kUnreachable) drop = s.clr_from - s.clr_to;
      if (s.clr_to == kUnreachable || drop <= 0) {
        s.step_bound = kUnreachable;
      } else {
        SearchOptions so;
        so.cap = drop;
        const NodeId src[] = {s.from};
        s.step_bound = cost_from_nodes(g, src, so).at(s.to);
      }
    }

    const bool from_inf = s.clr_from == kUnreachable;
    const bool to_inf = s.clr_to == kUnreachable;
    if (!from_inf && (to_inf || s.clr_to - s.clr_from > thr)) r.upward_jumps.push_back(i);
    if (!to_inf && (from_inf || s.clr_from - s.clr_to > thr)) r.downward_jumps.push_back(i);
    if (!to_inf && s.step_bound != kUnreachable) {
      if (from_inf || s.clr_from - s.clr_to > s.step_bound) r.violations.push_back(i);
    }
    r.steps.push_back(s);
  }
  return r;
}

GraphPath random_graph_walk(const PrimitiveGraph& graph, NodeId start, std::size_t steps, std::mt19937_64& rng) {
  GraphPath p;
  p.nodes.push_back(start);
  p.prefix_cost.push_back(0);
  NodeId n = start;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto edges = graph.out_edges(n);
    if (edges.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
    const std::size_t j = pick(rng);
    const std::size_t e = graph.offsets[static_cast<std::size_t>(n)] + j;
    p.edge_indices.push_back(e);
    p.prefix_cost.push_back(p.prefix_cost.back() + graph.edges[e].cost);
    n = graph.edges[e].target;
    p.nodes.push_back(n);
  }
  p.cost_ticks = p.prefix_cost.back();
  p.trajectory = path_trajectory(graph, p.nodes, p.edge_indices);
  return p;
}

// ---------------------------------------------------------------------------
// Optimality and propagation

OptimalityReport check_optimality_principle(const ClearanceField& cf, NodeId x) {
  OptimalityReport r;
  if (cf.clr(x) == kUnreachable) return r;
  r.applicable = true;
  const GraphPath p = extract_path(*cf.graph, cf.field, x);
  r.chain = p.nodes;
  r.prefix_cost = p.prefix_cost;
  const CostTicks cx = cf.clr(x);
  for (std::size_t i = 0; i < p.nodes.size(); ++i)
    if (cx - cf.clr(p.nodes[i]) != p.prefix_cost[i]) r.mismatches.push_back(i);
  return r;
}

PropagationReport check_envelope_propagation(const ClearanceField& cf, const EnvelopeMap& em, NodeId x) {
  PropagationReport r;
  if (cf.clr(x) == kUnreachable) {
    r.reason = "infinite clearance";
    return r;
  }
  if (!em.flagged(x)) {
    r.reason = "node is not on the envelope";
    return r;
  }
  r.applicable = true;
  r.chain = extract_path(*cf.graph, cf.field, x).nodes;
  for (std::size_t i = 1; i + 1 < r.chain.size(); ++i) {
    ++r.interior_nodes;
    const EnvelopeCategory c = em.category_of(r.chain[i]);
    if (c == EnvelopeCategory::envelope || c == EnvelopeCategory::boundary_adjacent) ++r.flagged_nodes;
  }
  r.fraction = r.interior_nodes == 0 ? 1.0
                                     : static_cast<double>(r.flagged_nodes) / static_cast<double>(r.interior_nodes);
  return r;
}

// ---------------------------------------------------------------------------
// Shelf / cliff

std::size_t BoundaryClassification::count(BoundaryLabel l) const {
  return static_cast<std::size_t>(std::count(label.begin(), label.end(), l));
}

double default_probe_radius(const PrimitiveGraph& graph) {
  const SampledBounds b = sample_bounds(*graph.system, *graph.lattice);
  return 10.0 * graph.lattice->max_spacing() * b.max_cost;
}

BoundaryClassification classify_boundary(const PrimitiveGraph& graph, double rho_probe, const SearchOptions& options) {
  if (!(rho_probe > 0.0)) throw ConfigurationError("probe radius must be positive");
  const Lattice& lat = *graph.lattice;
  BoundaryClassification bc;
  bc.rho_probe = rho_probe;
  const std::size_t n = lat.node_count();
  bc.label.assign(n, BoundaryLabel::not_boundary);
  bc.inflow_cost.assign(n, kUnreachable);

  std::vector<NodeId> sources;
  for (std::size_t i = 0; i < n; ++i)
    if (lat.node_class(static_cast<NodeId>(i)) == NodeClass::free) sources.push_back(static_cast<NodeId>(i));
  std::vector<CostTicks> inflow(n, kUnreachable);
  if (!sources.empty()) {
    SearchOptions so = options;
    so.cap = to_ticks(rho_probe);
    inflow = cost_from_nodes(graph, sources, so).value;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (lat.node_class(static_cast<NodeId>(i)) != NodeClass::boundary) continue;
    bc.inflow_cost[i] = inflow[i];
    bc.label[i] = inflow[i] == kUnreachable ? BoundaryLabel::shelf : BoundaryLabel::cliff;
  }
  return bc;
}

// ---------------------------------------------------------------------------
// Hypotheses

H1Result check_H1(const ControlSystem& system, const Lattice& lattice, const BoundaryClassification& bc, NodeId y0,
                  const Vec& xi, double r_star, std::size_t fan_size) {
  if (lattice.node_class(y0) != NodeClass::boundary) throw ConfigurationError("H1 needs a BOUNDARY node");
  if (!(r_star > 0.0)) throw ConfigurationError("r* must be positive");
  H1Result r;
  r.r_star = r_star;
  const Vec y = lattice.coords(y0);
  if (xi.size() == 0) {
    r.direction = best_direction(system, y, fan_size).first;
    r.auto_direction = true;
  } else {
    if (xi.size() != lattice.dim() || norm(xi) == 0.0) throw ConfigurationError("xi must be a nonzero state vector");
    r.direction = xi;
  }
  const double xi_norm = norm(r.direction);
  r.hamiltonian = min_hamiltonian(system, y, r.direction);
  // Round-off from trigonometric velocities is not a positive minimum.
  r.h1a = r.hamiltonian > 1e-9 * xi_norm;

  r.star_point = system.wrap(y + (r_star / xi_norm) * r.direction);
  // Points on the sphere itself are outside the open ball.
  lattice.for_each_in_ball(r.star_point, r_star * (1.0 - 1e-9), [&](NodeId n) {
    if (lattice.node_class(n) != NodeClass::boundary) return;
    ++r.boundary_in_ball;
    if (bc.label_of(n) == BoundaryLabel::cliff) r.cliff_in_ball.push_back(n);
  });
  r.h1b = r.cliff_in_ball.empty();

  if (r.h1a) {
    try {
      r.certificate = compute_certificate(system, y, r.direction, r_star);
    } catch (const CertificateInfeasibleError& e) {
      r.certificate_error = e.what();
    }
  }
  return r;
}

bool H2Result::holds() const {
  return !component_counts.empty() &&
         std::all_of(component_counts.begin(), component_counts.end(), [](int c) { return c == 1; });
}

H2Result check_H2(const Lattice& lattice, NodeId y0, const std::vector<double>& radii) {
  if (radii.empty()) throw ConfigurationError("H2 needs at least one radius");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw ConfigurationError("H2 radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw ConfigurationError("H2 radii must be decreasing");
  }
  H2Result r;
  r.radii = radii;
  const Vec c = lattice.coords(y0);
  for (double rad : radii) {
    const int k = free_component_count(lattice, c, rad);
    r.component_counts.push_back(k);
    if (k == 0) r.isolated = true;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Envelope generators

std::vector<double> default_generator_levels(double kappa) { return {8.0 * kappa, 4.0 * kappa, 2.0 * kappa}; }

EnvGenReport detect_envelope_generator(const ClearanceField& cf, const EnvelopeMap& em, NodeId y0,
                                       const std::vector<double>& radii, const std::vector<double>& thresholds) {
  const Lattice& lat = *cf.graph->lattice;
  if (lat.node_class(y0) != NodeClass::boundary) throw ConfigurationError("candidate must be a BOUNDARY node");
  if (radii.empty() || radii.size() != thresholds.size())
    throw ConfigurationError("radii and thresholds must be nonempty lists of equal length");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] < radii[i - 1]) || !(thresholds[i] < thresholds[i - 1]))
      throw ConfigurationError("radii and thresholds must be decreasing");
  }
  const double min_radius = 3.0 * lat.max_spacing();
  if (radii.back() < min_radius)
    throw ResolutionError("smallest radius " + std::to_string(radii.back()) + " is below three lattice spacings (" +
                          std::to_string(min_radius) + ")");

  EnvGenReport r;
  r.candidate = y0;
  r.radii = radii;
  r.thresholds = thresholds;
  const Vec c = lat.coords(y0);
  r.verdict = true;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const CostTicks limit = to_ticks(thresholds[k]);
    NodeId best = kNoNode;
    lat.for_each_in_ball(c, radii[k], [&](NodeId n) {
      if (!em.flagged(n) || cf.clr(n) >= limit) return;
      if (best == kNoNode || cf.clr(n) < cf.clr(best)) best = n;
    });
    r.hits.push_back(best);
    if (best == kNoNode) r.verdict = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Persistent boundary

bool on_discrete_boundary(const Lattice& lattice, const std::vector<std::uint8_t>& member, NodeId z) {
  const bool self = member[static_cast<std::size_t>(z)] != 0;
  bool in = self;
  bool out = !self;
  lattice.for_each_moore_neighbor(z, [&](NodeId m) {
    if (member[static_cast<std::size_t>(m)])
      in = true;
    else
      out = true;
  });
  return in && out;
}

namespace {

PersistenceSide persistent_side(const Lattice& lat, const CostField& field, NodeId x, double r,
                                const std::vector<double>& rho_list) {
  std::vector<NodeId> candidates;
  lat.for_each_in_ball(lat.coords(x), r, [&](NodeId z) {
    if (z != x && lat.in_graph(z)) candidates.push_back(z);
  });
  std::vector<std::uint8_t> member(lat.node_count(), 0);
  for (double rho : rho_list) {
    const CostTicks lim = to_ticks(rho);
    for (std::size_t i = 0; i < member.size(); ++i) member[i] = field.value[i] < lim ? 1 : 0;
    std::erase_if(candidates, [&](NodeId z) { return !on_discrete_boundary(lat, member, z); });
  }
  return {candidates};
}

}  // namespace

PersistentBoundaryReport check_persistent_boundary(const PrimitiveGraph& graph, NodeId x, double r,
                                                   const std::vector<double>& rho_list, const Vec& xi) {
  const Lattice& lat = *graph.lattice;
  PersistentBoundaryReport rep;
  rep.rho_list = rho_list;
  rep.radius = r;
  if (!(r > 0.0)) throw ConfigurationError("radius must be positive");
  if (rho_list.empty()) throw ConfigurationError("rho list must be nonempty");
  for (std::size_t i = 0; i < rho_list.size(); ++i) {
    if (!(rho_list[i] > 0.0)) throw ConfigurationError("rho values must be positive");
    if (i > 0 && !(rho_list[i] > rho_list[i - 1])) throw ConfigurationError("rho list must be increasing");
  }
  if (lat.node_class(x) != NodeClass::free) {
    rep.reason = "base node is not FREE";
    return rep;
  }
  const Vec base = lat.coords(x);
  const Vec dir = xi.size() == 0 ? best_direction(*graph.system, base, 64).first : xi;
  try {
    rep.certificate = compute_certificate(*graph.system, base, dir, r);
  } catch (const CertificateInfeasibleError& e) {
    rep.reason = e.what();
    return rep;
  }
  rep.applicable = true;
  rep.degenerate = to_ticks(rho_list.front()) < graph.min_edge_cost();

  SearchOptions so;
  so.cap = to_ticks(rho_list.back());
  const NodeId src[] = {x};
  rep.reverse = persistent_side(lat, cost_to(graph, src, so), x, r, rho_list);
  rep.forward = persistent_side(lat, cost_from_nodes(graph, src, so), x, r, rho_list);
  return rep;
}

// ---------------------------------------------------------------------------
// Uniform penetration

PenetrationReport check_uniform_penetration(const ControlSystem& system, const DirectionalityCertificate& cert,
                                            std::size_t n_samples, std::uint64_t seed, double step) {
  PenetrationReport rep;
  if (!(cert.hamiltonian_value > 0.0) || !(cert.horizon > 0.0)) return rep;
  rep.applicable = true;
  rep.samples = n_samples;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  const double t_star = cert.horizon;
  const double r_star = cert.target_radius;
  const double h = std::min(step, t_star / 20.0);
  const double monotone_tol = 10.0 * h * cert.velocity_bound;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> segments(1, 6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, system.controls.size() - 1);

  for (std::size_t s = 0; s < n_samples; ++s) {
    const int k = segments(rng);
    std::vector<double> cuts{0.0, t_star};
    for (int i = 1; i < k; ++i) cuts.push_back(unit(rng) * t_star);
    std::sort(cuts.begin(), cuts.end());
    std::vector<ScheduleSegment> schedule;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double d = cuts[i + 1] - cuts[i];
      if (d > 0.0) schedule.push_back({system.controls[pick(rng)], d});
    }
    const Trajectory traj = integrate_trajectory(system, cert.anchor, schedule, h);

    double prev = system.distance(cert.anchor, cert.target_point);
    bool contained = true;
    bool monotone = true;
    for (const TrajectorySample& smp : traj.samples) {
      if (smp.time <= 0.0) continue;
      const double d = system.distance(smp.state, cert.target_point);
      if (!(d < cert.shrink_factor(std::min(smp.time, t_star)) * r_star)) contained = false;
      if (d > prev + monotone_tol) monotone = false;
      prev = std::min(prev, d);
    }
    const Vec& end = traj.samples.back().state;
    rep.worst_margin =
        std::min(rep.worst_margin, cert.shrink_factor(t_star) * r_star - system.distance(end, cert.target_point));
    if (!contained) ++rep.containment_failures;
    if (!monotone) ++rep.monotone_failures;

    const double rho = traj.total_cost;
    const double tau = cert.cost_bound > 0.0 ? std::min(t_star, rho / cert.cost_bound) : t_star;
    const double r_rho = r_star - cert.shrink_factor(tau) * r_star;
    if (system.distance(end, cert.anchor) < r_rho) ++rep.stlnr_failures;
  }
  if (n_samples == 0) rep.worst_margin = 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Property suite

bool PropertySuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed(); });
}

bool check_nesting(const PrimitiveGraph& graph, const CostField& field, double rho, double mu) {
  const CostTicks r = to_ticks(rho);
  const CostTicks m = to_ticks(mu);
  const Lattice& lat = *graph.lattice;
  for (std::size_t i = 0; i < field.value.size(); ++i) {
    if (field.value[i] >= r) continue;
    const auto n = static_cast<NodeId>(i);
    bool ok = true;
    lat.for_each_face_neighbor(n, [&](NodeId nb) {
      const bool joined = field.direction == FieldDirection::forward ? graph.find_edge(n, nb).has_value()
                                                                      : graph.find_edge(nb, n).has_value();
      if (joined && field.at(nb) >= m) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

PropertySuiteReport run_property_suite(const ClearanceField& cf, const EnvelopeMap& em,
                                       const PropertySuiteOptions& options) {
  const PrimitiveGraph& g = *cf.graph;
  const Lattice& lat = *g.lattice;
  PropertySuiteReport rep;
  std::mt19937_64 rng(options.seed);
  const std::vector<NodeId> pool = free_nodes_with_edges(g);
  std::uniform_int_distribution<std::size_t> walk_len(1, std::max<std::size_t>(1, options.walk_length));

  // Quasi-metric axioms on triples chained by random walks, so that every
  // distance involved is finite and the searches stay local.
  PropertyCheck qm{"quasi_metric", 0, 0};
  if (!pool.empty()) {
    for (std::size_t t = 0; t < options.triples; ++t) {
      const NodeId a = pick_node(pool, rng);
      const GraphPath ab = random_graph_walk(g, a, walk_len(rng), rng);
      const NodeId b = ab.nodes.back();
      const GraphPath bc = random_graph_walk(g, b, walk_len(rng), rng);
      const NodeId c = bc.nodes.back();
      SearchOptions so;
      so.cap = ab.cost_ticks + bc.cost_ticks + 1;
      const NodeId sa[] = {a};
      const NodeId sb[] = {b};
      const CostField fa = cost_from_nodes(g, sa, so);
      so.cap = bc.cost_ticks + 1;
      const CostField fb = cost_from_nodes(g, sb, so);
      ++qm.cases;
      const bool identity = fa.at(a) == 0 && fb.at(b) == 0;
      const bool nonneg = std::all_of(fa.value.begin(), fa.value.end(), [](CostTicks v) { return v >= 0; });
      const bool triangle = fa.reachable(c) && fb.reachable(c) && fa.reachable(b) &&
                            fa.at(c) <= fa.at(b) + fb.at(c);
      if (!(identity && nonneg && triangle)) ++qm.failures;
    }
  }
  rep.checks.push_back(qm);

  // Bellman prefix optimality along witness chains.
  PropertyCheck bell{"bellman_prefix", 0, 0};
  std::vector<NodeId> finite;
  for (NodeId n : pool)
    if (cf.clr(n) != kUnreachable) finite.push_back(n);
  if (!finite.empty()) {
    for (std::size_t t = 0; t < options.chains; ++t) {
      ++bell.cases;
      if (!check_optimality_principle(cf, pick_node(finite, rng)).passed()) ++bell.failures;
    }
  }
  rep.checks.push_back(bell);

  // rho_min is clr on FREE nodes.
  PropertyCheck rmin{"rho_min_equals_clr", 0, 0};
  for (std::size_t i = 0; i < lat.node_count(); ++i) {
    if (lat.node_class(static_cast<NodeId>(i)) != NodeClass::free) continue;
    ++rmin.cases;
    if (em.rho_min[i] != cf.field.value[i]) ++rmin.failures;
  }
  rep.checks.push_back(rmin);

  // Wave nesting and wave / clearance duality.
  PropertyCheck nest{"wave_nesting", 0, 0};
  CostTicks max_clr = 0;
  for (NodeId n : finite) max_clr = std::max(max_clr, cf.clr(n));
  if (max_clr > 0) {
    std::uniform_real_distribution<double> level(0.0, to_cost(max_clr));
    for (std::size_t t = 0; t < options.nesting_pairs; ++t) {
      double r1 = level(rng);
      double r2 = level(rng);
      if (r1 > r2) std::swap(r1, r2);
      r1 = std::max(r1, kCostQuantum);
      r2 = std::max(r2, r1 + kCostQuantum);
      const auto w1 = wave(cf, r1);
      const auto w2 = wave(cf, r2);
      ++nest.cases;
      bool ok = std::includes(w2.begin(), w2.end(), w1.begin(), w1.end());
      const CostTicks lim = to_ticks(r1);
      std::size_t expected = 0;
      for (std::size_t i = 0; i < lat.node_count(); ++i)
        if (lat.node_class(static_cast<NodeId>(i)) == NodeClass::free && cf.field.value[i] < lim) ++expected;
      ok = ok && expected == w1.size();
      if (!ok) ++nest.failures;
    }
  }
  rep.checks.push_back(nest);

  // Reachable-set nesting with closure.
  PropertyCheck rnest{"reach_nesting", 0, 0};
  if (!pool.empty()) {
    for (std::size_t t = 0; t < options.nesting_pairs; ++t) {
      const NodeId s[] = {pick_node(pool, rng)};
      SearchOptions so;
      so.cap = to_ticks(0.4) + g.min_edge_cost();
      ++rnest.cases;
      if (!check_nesting(g, cost_from_nodes(g, s, so), 0.2, 0.4)) ++rnest.failures;
    }
  }
  rep.checks.push_back(rnest);

  // No downward clearance drop beyond the step cost along random walks.
  PropertyCheck down{"no_downward_jump", 0, 0};
  if (!pool.empty()) {
    for (std::size_t t = 0; t < options.walks; ++t) {
      const GraphPath w = random_graph_walk(g, pick_node(pool, rng), options.walk_length, rng);
      ++down.cases;
      if (!check_clearance_along_nodes(cf, w.nodes, em.kappa).passed()) ++down.failures;
    }
  }
  rep.checks.push_back(down);
  return rep;
}

// ---------------------------------------------------------------------------
// Sublevel sets

SublevelLipschitzReport check_sublevel_lipschitz(const PrimitiveGraph& graph, NodeId x, double rho) {
  const Lattice& lat = *graph.lattice;
  SublevelLipschitzReport rep;
  rep.rho = rho;
  SearchOptions so;
  so.cap = to_ticks(rho);
  auto sublevel = [&](NodeId n) {
    const NodeId s[] = {n};
    return reachable_set(cost_from_nodes(graph, s, so), rho);
  };
  const auto base = sublevel(x);
  lat.for_each_face_neighbor(x, [&](NodeId m) {
    if (!lat.in_graph(m)) return;
    rep.bases.push_back(m);
    const double ratio = hausdorff_distance(lat, base, sublevel(m)) / lat.node_distance(x, m);
    rep.ratios.push_back(ratio);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  });
  return rep;
}

}  // namespace kinoclear
