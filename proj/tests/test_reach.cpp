#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "kinoclear/errors.hpp"
#include "kinoclear/reach.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

using namespace kinoclear;

namespace {

bool same_graph(const PrimitiveGraph& a, const PrimitiveGraph& b) {
  if (a.offsets != b.offsets || a.edges.size() != b.edges.size() || a.leaks != b.leaks) return false;
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    const Edge& x = a.edges[i];
    const Edge& y = b.edges[i];
    if (x.target != y.target || x.cost != y.cost || x.control != y.control || x.contact != y.contact) return false;
  }
  return a.rev_sources == b.rev_sources && a.rev_edge_index == b.rev_edge_index;
}

std::vector<NodeId> boundary_nodes(const Lattice& lat) {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < lat.node_count(); ++i)
    if (lat.node_class(static_cast<NodeId>(i)) == NodeClass::boundary) out.push_back(static_cast<NodeId>(i));
  return out;
}

}  // namespace

TEST_CASE("parallel graph construction matches the serial reference") {
  const auto& w = test::galaga_coarse();
  GraphOptions go;
  go.tau = 0.1;
  const PrimitiveGraph serial = build_graph_serial(w.system, w.lattice, go);
  for (int workers : {1, 3, 4}) CHECK(same_graph(serial, build_graph(w.system, w.lattice, go, Execution{workers})));
}

TEST_CASE("edges are sorted, deduplicated and positive") {
  const auto& g = *test::galaga_corner().graph;
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const auto edges = g.out_edges(static_cast<NodeId>(n));
    for (std::size_t i = 0; i < edges.size(); ++i) {
      CHECK(edges[i].cost > 0);
      CHECK(edges[i].target != static_cast<NodeId>(n));
      CHECK(g.lattice->in_graph(edges[i].target));
      if (i > 0) CHECK(edges[i - 1].target < edges[i].target);
    }
    if (g.lattice->node_class(static_cast<NodeId>(n)) == NodeClass::obstacle_interior) CHECK(edges.empty());
  }
  CHECK(g.min_edge_cost() == to_ticks(0.05));
}

TEST_CASE("non-contact primitives avoid the obstacle interior") {
  const auto& w = test::galaga_corner();
  const auto& g = *w.graph;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, g.node_count() - 1);
  std::size_t checked = 0;
  while (checked < 400) {
    const auto n = static_cast<NodeId>(pick(rng));
    if (!w.lattice->in_graph(n)) continue;
    for (const Edge& e : g.out_edges(n)) {
      if (e.contact) continue;
      CHECK(oracle::avoids_interior(*w.system, w.lattice->scene(), w.lattice->coords(n), w.system->controls[e.control],
                                    e.duration, 0.001));
      ++checked;
    }
  }
}

TEST_CASE("Dijkstra and label-correcting searches agree bit for bit") {
  const auto& g = *test::galaga_corner().graph;
  const auto targets = boundary_nodes(*g.lattice);
  SearchOptions dj;
  SearchOptions lc{SearchMode::parallel_label_correcting, kUnreachable, Execution{4}};
  const CostField a = cost_to(g, targets, dj);
  const CostField b = cost_to(g, targets, lc);
  CHECK(a.value == b.value);
  CHECK(a.backpointer == b.backpointer);

  const Vec x{-0.5, -1.0};
  const CostField fa = cost_from(g, x, dj);
  const CostField fb = cost_from(g, x, lc);
  CHECK(fa.value == fb.value);
  CHECK(fa.backpointer == fb.backpointer);

  dj.cap = lc.cap = to_ticks(0.7);
  CHECK(cost_from(g, x, dj).value == cost_from(g, x, lc).value);
}

TEST_CASE("search results match Bellman-Ford exactly") {
  const auto& g = *test::galaga_coarse().graph;
  const auto targets = boundary_nodes(*g.lattice);
  CHECK(cost_to(g, targets).value == oracle::bellman_ford_to(g, targets));
  const NodeId s = g.lattice->nearest(Vec{-0.5, -1.0});
  CHECK(cost_from_nodes(g, std::vector<NodeId>{s}).value == oracle::bellman_ford_from(g, s));
}

TEST_CASE("Galaga distance along the passage") {
  const auto& g = *test::galaga_corner().graph;
  const CostField f = cost_from(g, Vec{-0.5, -1.0});
  const NodeId z = g.lattice->nearest(Vec{-0.5, 0.0});
  CHECK(f.cost(z) == doctest::Approx(1.0).epsilon(1e-12));
  const GraphPath p = extract_path(g, f, z);
  CHECK(p.nodes.front() == f.sources.front());
  CHECK(p.nodes.back() == z);
  CHECK(p.cost_ticks == f.at(z));
  CostTicks sum = 0;
  for (std::size_t e : p.edge_indices) sum += g.edges[e].cost;
  CHECK(sum == f.at(z));
  CHECK(p.trajectory.samples.back().state[1] == doctest::Approx(0.0));
}

TEST_CASE("forward reachable set matches the Galaga cone") {
  const auto& w = test::galaga_corner();
  const auto& lat = *w.lattice;
  const Vec x{0.5, -2.0};
  const double rho = 0.5;
  const CostField f = cost_from(*w.graph, x);
  const auto set = reachable_set(f, rho);
  // Closed-form cone sampled at the nodes, and the endpoints of bang-bang
  // schedules; both must agree with the graph's set to within two cells.
  std::vector<NodeId> cone;
  for (std::size_t i = 0; i < lat.node_count(); ++i) {
    const auto n = static_cast<NodeId>(i);
    if (oracle::galaga_forward_cone(x, lat.coords(n), rho)) cone.push_back(n);
  }
  CHECK(hausdorff_distance(lat, set, cone) <= 2.0 * 0.05 + 1e-12);

  const auto ends =
      oracle::schedule_endpoints(*w.system, x, {Vec{-1.0}, Vec{1.0}, Vec{0.0}}, 0.05, 9);  // total time 0.45 < rho
  std::vector<NodeId> sampled;
  for (const Vec& y : ends) sampled.push_back(lat.nearest(y));
  std::sort(sampled.begin(), sampled.end());
  sampled.erase(std::unique(sampled.begin(), sampled.end()), sampled.end());
  for (NodeId n : sampled) CHECK(f.cost(n) < rho + 0.1);
}

TEST_CASE("searches validate their endpoints") {
  const auto& g = *test::galaga_corner().graph;
  CHECK_THROWS_AS(cost_from(g, Vec{-3.0, -2.0}), InvalidSourceError);
  CHECK_THROWS_AS(cost_from(g, Vec{40.0, 0.0}), InvalidSourceError);
  CHECK_THROWS_AS(cost_to(g, std::vector<NodeId>{}), InvalidTargetError);
  const CostField f = cost_from(g, Vec{-0.5, 1.0});
  CHECK_THROWS_AS(extract_path(g, f, g.lattice->nearest(Vec{-0.5, -1.0})), NoPathError);
  CHECK(reachable_set(f, 0.0).empty());
  CHECK_THROWS_AS(hausdorff_distance(*g.lattice, std::vector<NodeId>{}, std::vector<NodeId>{1}),
                  UndefinedDistanceError);
}

TEST_CASE("quasi-metric triangle inequality on random triples") {
  const auto& g = *test::galaga_coarse().graph;
  std::mt19937_64 rng(11);
  std::vector<NodeId> free;
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if (g.lattice->node_class(static_cast<NodeId>(i)) == NodeClass::free) free.push_back(static_cast<NodeId>(i));
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  for (int k = 0; k < 20; ++k) {
    const NodeId a = free[pick(rng)];
    const NodeId b = free[pick(rng)];
    const auto da = oracle::bellman_ford_from(g, a);
    const auto db = oracle::bellman_ford_from(g, b);
    for (NodeId c : free) {
      const auto ab = da[static_cast<std::size_t>(b)];
      const auto bc = db[static_cast<std::size_t>(c)];
      if (ab == kUnreachable || bc == kUnreachable) continue;
      CHECK(da[static_cast<std::size_t>(c)] <= ab + bc);
    }
  }
}

TEST_CASE("tau must cover a cell at the top speed") {
  const auto& w = test::galaga_coarse();
  GraphOptions go;
  go.tau = 0.01;
  CHECK_THROWS_AS(build_graph(w.system, w.lattice, go), ConfigurationError);
  CHECK(default_tau(*w.system, *w.lattice) > 0.0);
}
