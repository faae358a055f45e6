#include "kinoclear/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <new>

#include "kinoclear/errors.hpp"
#include "kinoclear/output.hpp"

#ifndef KINOCLEAR_VERSION
#define KINOCLEAR_VERSION "dev"
#endif

namespace kinoclear {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kListLimit = 20;  // nodes listed per report field

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json vec_json(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

json cost_json(CostTicks t) { return t == kUnreachable ? json(nullptr) : json(to_cost(t)); }

json node_json(const Lattice& lat, NodeId n) {
  if (n == kNoNode) return nullptr;
  return {{"id", n}, {"x", vec_json(lat.coords(n))}};
}

json nodes_json(const Lattice& lat, const std::vector<NodeId>& nodes) {
  json a = json::array();
  for (std::size_t i = 0; i < nodes.size() && i < kListLimit; ++i) a.push_back(node_json(lat, nodes[i]));
  return a;
}

const char* category_name(EnvelopeCategory c) {
  switch (c) {
    case EnvelopeCategory::none: return "none";
    case EnvelopeCategory::envelope: return "envelope";
    case EnvelopeCategory::boundary_adjacent: return "boundary_adjacent";
    case EnvelopeCategory::window_limited: return "window_limited";
  }
  return "none";
}

const char* label_name(BoundaryLabel l) {
  switch (l) {
    case BoundaryLabel::shelf: return "shelf";
    case BoundaryLabel::cliff: return "cliff";
    case BoundaryLabel::not_boundary: break;
  }
  return "not_boundary";
}

json certificate_json(const DirectionalityCertificate& c) {
  return {{"anchor", vec_json(c.anchor)},
          {"direction", vec_json(c.direction)},
          {"target_radius", c.target_radius},
          {"target_point", vec_json(c.target_point)},
          {"hamiltonian_value", c.hamiltonian_value},
          {"velocity_bound", c.velocity_bound},
          {"lipschitz_bound", c.lipschitz_bound},
          {"neighborhood_radius", c.neighborhood_radius},
          {"horizon", c.horizon},
          {"cost_bound", c.cost_bound}};
}

json h1_json(const Lattice& lat, const H1Result& r) {
  json j{{"direction", vec_json(r.direction)},
         {"auto_direction", r.auto_direction},
         {"hamiltonian", r.hamiltonian},
         {"h1a", r.h1a},
         {"r_star", r.r_star},
         {"star_point", vec_json(r.star_point)},
         {"boundary_in_ball", r.boundary_in_ball},
         {"cliff_in_ball", r.cliff_in_ball.size()},
         {"cliff_examples", nodes_json(lat, r.cliff_in_ball)},
         {"h1b", r.h1b},
         {"holds", r.holds()}};
  if (r.certificate) j["certificate"] = certificate_json(*r.certificate);
  if (!r.certificate_error.empty()) j["certificate_error"] = r.certificate_error;
  return j;
}

json h2_json(const H2Result& r) {
  return {{"radii", r.radii}, {"component_counts", r.component_counts}, {"isolated", r.isolated}, {"holds", r.holds()}};
}

// Parameter access for one check.
class Params {
 public:
  Params(const Pipeline& p, const json& j) : p_(p), j_(j) {}

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& at(const char* key) const {
    if (!j_.contains(key)) throw ConfigurationError(std::string("check needs '") + key + "'");
    return j_.at(key);
  }
  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    if (!j_.at(key).is_number()) throw ConfigurationError(std::string(key) + " must be a number");
    return j_.at(key).get<double>();
  }
  double number(const char* key) const {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigurationError(std::string(key) + " must be a number");
    return v.get<double>();
  }
  std::size_t count(const char* key, std::size_t fallback) const {
    return has(key) ? j_.at(key).get<std::size_t>() : fallback;
  }
  std::vector<double> list(const char* key) const { return at(key).get<std::vector<double>>(); }
  Vec point(const char* key) const { return parse_vec(at(key), p_.lattice->dim()); }
  Vec direction(const char* key) const { return has(key) ? parse_vec(j_.at(key), p_.lattice->dim()) : Vec{}; }

  NodeId node(const char* key) const {
    const NodeId n = p_.lattice->nearest(point(key));
    if (n == kNoNode) throw ConfigurationError(std::string(key) + " lies outside the lattice");
    return n;
  }

 private:
  const Pipeline& p_;
  const json& j_;
};

// Numeric expectation: "expect" is a number (with "tol") or null for +inf.
bool matches_expectation(const json& params, double value, json& rep) {
  if (!params.contains("expect")) return true;
  const json& e = params.at("expect");
  rep["expected"] = e;
  if (e.is_null()) return std::isinf(value);
  const double tol = params.value("tol", 0.0);
  rep["tolerance"] = tol;
  return std::isfinite(value) && std::abs(value - e.get<double>()) <= tol;
}

double segment_distance(const Vec& x, const Vec& a, const Vec& b) {
  const Vec ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(x - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(x - (a + t * ab));
}

std::vector<ScheduleSegment> parse_schedule(const json& doc, std::size_t control_dim) {
  if (!doc.is_array()) throw ConfigurationError("schedule must be a list");
  std::vector<ScheduleSegment> out;
  for (const json& s : doc) {
    ScheduleSegment seg;
    seg.control = parse_vec(s.at("control"), control_dim);
    seg.duration = s.at("duration").get<double>();
    if (!(seg.duration >= 0.0)) throw ConfigurationError("schedule durations must be non-negative");
    out.push_back(seg);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checks. Each fills rep and returns pass/fail.

using CheckFn = bool (*)(Pipeline&, const json&, json&);

bool check_distance(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const CostField f = cost_from(*p.graph, in.point("from"), p.search());
  const NodeId t = p.lattice->nearest(in.point("to"));
  if (t == kNoNode || !p.lattice->in_graph(t)) throw InvalidTargetError("target is not a graph node");
  rep["from"] = node_json(*p.lattice, f.sources.front());
  rep["to"] = node_json(*p.lattice, t);
  rep["value"] = cost_json(f.at(t));
  if (f.reachable(t)) rep["path_nodes"] = extract_path(*p.graph, f, t).nodes.size();
  return matches_expectation(j, f.cost(t), rep);
}

bool check_clearance(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const ClearanceField& cf = *p.clearance;
  const NodeId n = in.node("at");
  rep["node"] = node_json(*p.lattice, n);
  rep["value"] = cost_json(cf.clr(n));
  rep["certified"] = cf.certified(n);
  rep["lower_bound"] = cost_json(cf.lower_bound(n));
  const NodeId w = cf.witness[static_cast<std::size_t>(n)];
  rep["witness"] = node_json(*p.lattice, w);
  bool ok = matches_expectation(j, cf.clr_cost(n), rep);
  if (in.has("witness")) {
    const double d = w == kNoNode ? kInf : p.lattice->distance(p.lattice->coords(w), in.point("witness"));
    const double tol = in.number("witness_tol", 0.0);
    rep["witness_distance"] = std::isfinite(d) ? json(d) : json(nullptr);
    rep["witness_tolerance"] = tol;
    ok = ok && d <= tol;
  }
  return ok;
}

bool check_clearance_along(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const auto schedule = parse_schedule(in.at("schedule"), p.system->controls.front().size());
  const Trajectory traj =
      integrate_trajectory(*p.system, in.point("start"), schedule, in.number("step", 0.01), p.lattice->scene().box);
  const double threshold = in.number("threshold", p.kappa);
  const auto r = check_clearance_along(*p.clearance, traj, threshold);
  const Lattice& lat = *p.lattice;
  rep["threshold"] = threshold;
  rep["nodes"] = r.nodes.size();
  if (!r.nodes.empty()) {
    rep["clr_start"] = cost_json(p.clearance->clr(r.nodes.front()));
    rep["clr_end"] = cost_json(p.clearance->clr(r.nodes.back()));
  }
  auto steps_json = [&](const std::vector<std::size_t>& idx) {
    json a = json::array();
    for (std::size_t i : idx) {
      const ClearanceStep& s = r.steps[i];
      a.push_back({{"step", i},
                   {"from", node_json(lat, s.from)},
                   {"to", node_json(lat, s.to)},
                   {"clr_from", cost_json(s.clr_from)},
                   {"clr_to", cost_json(s.clr_to)}});
    }
    return a;
  };
  rep["upward_jumps"] = steps_json(r.upward_jumps);
  rep["downward_jumps"] = steps_json(r.downward_jumps);
  rep["violations"] = steps_json(r.violations);
  bool ok = r.passed() && r.downward_jumps.empty();
  const auto up = r.upward_jumps.size();
  if (in.has("min_upward")) ok = ok && up >= in.count("min_upward", 0);
  if (in.has("max_upward")) ok = ok && up <= in.count("max_upward", 0);
  return ok;
}

bool check_optimality(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const NodeId n = in.node("at");
  const auto r = check_optimality_principle(*p.clearance, n);
  rep["node"] = node_json(*p.lattice, n);
  rep["value"] = cost_json(p.clearance->clr(n));
  rep["applicable"] = r.applicable;
  rep["chain_length"] = r.chain.size();
  rep["mismatches"] = r.mismatches.size();
  if (!r.chain.empty()) rep["chain_end"] = node_json(*p.lattice, r.chain.back());
  return r.passed();
}

bool check_propagation(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const NodeId n = in.node("at");
  const auto r = check_envelope_propagation(*p.clearance, *p.envelope, n);
  rep["node"] = node_json(*p.lattice, n);
  rep["applicable"] = r.applicable;
  if (!r.reason.empty()) rep["reason"] = r.reason;
  rep["chain_length"] = r.chain.size();
  rep["interior_nodes"] = r.interior_nodes;
  rep["flagged_nodes"] = r.flagged_nodes;
  rep["fraction"] = r.fraction;
  rep["required_fraction"] = r.required_fraction;
  return r.passed();
}

bool check_envelope_flag(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const NodeId n = in.node("at");
  const EnvelopeMap& em = *p.envelope;
  rep["node"] = node_json(*p.lattice, n);
  rep["clr"] = cost_json(p.clearance->clr(n));
  rep["jump"] = cost_json(em.jump[static_cast<std::size_t>(n)]);
  rep["kappa"] = em.kappa;
  rep["category"] = category_name(em.category_of(n));
  rep["value"] = em.flagged(n);
  const bool expect = j.value("expect", true);
  rep["expected"] = expect;
  return em.flagged(n) == expect;
}

bool check_envelope_near_segment(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const Vec a = in.point("a");
  const Vec b = in.point("b");
  const double max_clr = in.number("max_clr", kInf);
  const double tol = in.number("tol", 2.0 * p.lattice->max_spacing());
  std::size_t count = 0;
  double worst = 0.0;
  NodeId worst_node = kNoNode;
  for (std::size_t i = 0; i < p.envelope->envelope.size(); ++i) {
    const auto n = static_cast<NodeId>(i);
    if (!p.envelope->flagged(n) || !(p.clearance->clr_cost(n) < max_clr)) continue;
    ++count;
    const double d = segment_distance(p.lattice->coords(n), a, b);
    if (worst_node == kNoNode || d > worst) {
      worst = d;
      worst_node = n;
    }
  }
  rep["count"] = count;
  rep["worst_distance"] = worst;
  rep["worst_node"] = node_json(*p.lattice, worst_node);
  rep["tolerance"] = tol;
  return count > 0 && worst <= tol;
}

std::vector<NodeId> free_nodes_in(const Pipeline& p, const Region& region) {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < p.lattice->node_count(); ++i) {
    const auto n = static_cast<NodeId>(i);
    if (p.lattice->node_class(n) == NodeClass::free && region.contains(p.lattice->coords(n))) out.push_back(n);
  }
  return out;
}

bool check_clearance_linear(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const Region region = parse_region(in.at("region"));
  const Vec c = in.point("coefficients");
  const double b = in.number("offset", 0.0);
  const double tol = in.number("tol");
  double worst = 0.0;
  NodeId worst_node = kNoNode;
  const auto nodes = free_nodes_in(p, region);
  for (NodeId n : nodes) {
    const double err = std::abs(p.clearance->clr_cost(n) - (dot(c, p.lattice->coords(n)) + b));
    if (!(err <= worst)) {
      worst = err;
      worst_node = n;
    }
  }
  rep["count"] = nodes.size();
  rep["max_error"] = std::isfinite(worst) ? json(worst) : json(nullptr);
  rep["worst_node"] = node_json(*p.lattice, worst_node);
  rep["tolerance"] = tol;
  return !nodes.empty() && worst <= tol;
}

bool check_clearance_infinite(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const auto nodes = free_nodes_in(p, parse_region(in.at("region")));
  std::vector<NodeId> finite;
  for (NodeId n : nodes)
    if (p.clearance->field.reachable(n)) finite.push_back(n);
  rep["count"] = nodes.size();
  rep["finite_count"] = finite.size();
  rep["finite_examples"] = nodes_json(*p.lattice, finite);
  return !nodes.empty() && finite.empty();
}

bool check_boundary_label(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const NodeId n = in.node("at");
  const auto& bc = p.boundary_classification();
  rep["node"] = node_json(*p.lattice, n);
  rep["rho_probe"] = bc.rho_probe;
  rep["value"] = label_name(bc.label_of(n));
  rep["inflow_cost"] = cost_json(bc.inflow_cost[static_cast<std::size_t>(n)]);
  if (!j.contains("expect")) return bc.label_of(n) != BoundaryLabel::not_boundary;
  rep["expected"] = j.at("expect");
  return j.at("expect").get<std::string>() == label_name(bc.label_of(n));
}

H1Result h1_for(Pipeline& p, NodeId n, const json& j) {
  const Params in(p, j);
  return check_H1(*p.system, *p.lattice, p.boundary_classification(), n, in.direction("xi"), in.number("r_star"),
                  in.count("fan", 64));
}

bool check_h1(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const NodeId n = in.node("at");
  const H1Result r = h1_for(p, n, j);
  rep["node"] = node_json(*p.lattice, n);
  rep["rho_probe"] = p.boundary_classification().rho_probe;
  rep["result"] = h1_json(*p.lattice, r);
  if (!j.contains("expect")) return r.holds();
  // "expect" may pin any of h1a, h1b, holds; an empty object records evidence only.
  const json& e = j.at("expect");
  rep["expected"] = e;
  bool ok = true;
  if (e.contains("h1a")) ok = ok && e.at("h1a").get<bool>() == r.h1a;
  if (e.contains("h1b")) ok = ok && e.at("h1b").get<bool>() == r.h1b;
  if (e.contains("holds")) ok = ok && e.at("holds").get<bool>() == r.holds();
  return ok;
}

bool check_h2(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const NodeId n = in.node("at");
  const H2Result r = check_H2(*p.lattice, n, in.list("radii"));
  rep["node"] = node_json(*p.lattice, n);
  rep["result"] = h2_json(r);
  const bool expect = j.value("expect", true);
  rep["expected"] = expect;
  return r.holds() == expect;
}

bool check_envelope_generator(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const NodeId n = in.node("at");
  const auto levels = default_generator_levels(p.kappa);
  const auto radii = in.has("radii") ? in.list("radii") : levels;
  const auto thresholds = in.has("thresholds") ? in.list("thresholds") : levels;
  EnvGenReport r = detect_envelope_generator(*p.clearance, *p.envelope, n, radii, thresholds);
  if (in.has("h1")) r.h1_result = h1_for(p, n, j.at("h1"));
  if (in.has("h2_radii")) r.h2_result = check_H2(*p.lattice, n, in.list("h2_radii"));

  const Lattice& lat = *p.lattice;
  rep["candidate"] = node_json(lat, r.candidate);
  rep["radii"] = r.radii;
  rep["thresholds"] = r.thresholds;
  json hits = json::array();
  for (NodeId h : r.hits) {
    json e = node_json(lat, h);
    if (h != kNoNode) e["clr"] = cost_json(p.clearance->clr(h));
    hits.push_back(e);
  }
  rep["hits"] = hits;
  rep["value"] = r.verdict;
  if (r.h1_result) rep["h1"] = h1_json(lat, *r.h1_result);
  if (r.h2_result) rep["h2"] = h2_json(*r.h2_result);
  if (!j.contains("expect")) return r.verdict;
  rep["expected"] = j.at("expect");
  return j.at("expect").get<bool>() == r.verdict;
}

bool check_persistent(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const NodeId n = in.node("at");
  const auto r = check_persistent_boundary(*p.graph, n, in.number("r"), in.list("rho_list"), in.direction("xi"));
  const Lattice& lat = *p.lattice;
  rep["node"] = node_json(lat, n);
  rep["applicable"] = r.applicable;
  if (!r.reason.empty()) rep["reason"] = r.reason;
  if (r.certificate) rep["certificate"] = certificate_json(*r.certificate);
  rep["rho_list"] = r.rho_list;
  rep["radius"] = r.radius;
  rep["degenerate"] = r.degenerate;
  rep["reverse"] = {{"count", r.reverse.persistent.size()}, {"nodes", nodes_json(lat, r.reverse.persistent)}};
  rep["forward"] = {{"count", r.forward.persistent.size()}, {"nodes", nodes_json(lat, r.forward.persistent)}};
  if (j.value("expect_degenerate", false)) return r.applicable && r.degenerate;
  return r.passed();
}

DirectionalityCertificate certificate_for(Pipeline& p, const json& j) {
  const Params in(p, j);
  return compute_certificate(*p.system, in.point("at"), in.point("xi"), in.number("r_star"),
                             in.count("certificate_samples", 10000), p.scenario.seed);
}

bool check_certificate(Pipeline& p, const json& j, json& rep) {
  const DirectionalityCertificate c = certificate_for(p, j);
  rep["certificate"] = certificate_json(c);
  if (!j.contains("expect")) return true;
  const json& e = j.at("expect");
  rep["expected"] = e;
  const double rel = j.value("rel_tol", 0.05);
  const double abs_tol = j.value("abs_tol", 1e-9);
  auto near = [&](double got, double want) { return std::abs(got - want) <= std::max(rel * std::abs(want), abs_tol); };
  bool ok = true;
  if (e.contains("velocity_bound")) ok = ok && near(c.velocity_bound, e.at("velocity_bound").get<double>());
  if (e.contains("lipschitz_bound")) ok = ok && near(c.lipschitz_bound, e.at("lipschitz_bound").get<double>());
  return ok;
}

bool check_penetration(Pipeline& p, const json& j, json& rep) {
  const DirectionalityCertificate c = certificate_for(p, j);
  const Params in(p, j);
  const auto r = check_uniform_penetration(*p.system, c, in.count("samples", 500), p.scenario.seed,
                                           in.number("step", 0.001));
  rep["certificate"] = certificate_json(c);
  rep["applicable"] = r.applicable;
  rep["samples"] = r.samples;
  rep["containment_failures"] = r.containment_failures;
  rep["stlnr_failures"] = r.stlnr_failures;
  rep["monotone_failures"] = r.monotone_failures;
  rep["worst_margin"] = r.worst_margin;
  return r.passed();
}

bool check_properties(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  PropertySuiteOptions o;
  o.triples = in.count("triples", o.triples);
  o.chains = in.count("chains", o.chains);
  o.nesting_pairs = in.count("nesting_pairs", o.nesting_pairs);
  o.walks = in.count("walks", o.walks);
  o.walk_length = in.count("walk_length", o.walk_length);
  o.seed = p.scenario.seed;
  const auto r = run_property_suite(*p.clearance, *p.envelope, o);
  json a = json::array();
  for (const auto& c : r.checks)
    a.push_back({{"name", c.name}, {"cases", c.cases}, {"failures", c.failures}, {"passed", c.passed()}});
  rep["properties"] = a;
  return r.passed();
}

bool check_sublevel(Pipeline& p, const json& j, json& rep) {
  const Params in(p, j);
  const NodeId n = in.node("at");
  const auto r = check_sublevel_lipschitz(*p.graph, n, in.number("rho"));
  rep["node"] = node_json(*p.lattice, n);
  rep["rho"] = r.rho;
  rep["bases"] = nodes_json(*p.lattice, r.bases);
  rep["ratios"] = r.ratios;
  rep["value"] = r.max_ratio;
  if (!in.has("max_ratio")) return true;
  rep["expected_max"] = in.number("max_ratio");
  return r.max_ratio <= in.number("max_ratio");
}

const std::map<std::string, CheckFn>& check_table() {
  static const std::map<std::string, CheckFn> table{
      {"distance", check_distance},
      {"clearance", check_clearance},
      {"clearance_along", check_clearance_along},
      {"optimality", check_optimality},
      {"envelope_propagation", check_propagation},
      {"envelope_flag", check_envelope_flag},
      {"envelope_near_segment", check_envelope_near_segment},
      {"clearance_linear", check_clearance_linear},
      {"clearance_infinite", check_clearance_infinite},
      {"boundary_label", check_boundary_label},
      {"h1", check_h1},
      {"h2", check_h2},
      {"envelope_generator", check_envelope_generator},
      {"persistent_boundary", check_persistent},
      {"certificate", check_certificate},
      {"uniform_penetration", check_penetration},
      {"properties", check_properties},
      {"sublevel_lipschitz", check_sublevel},
  };
  return table;
}

json summary_json(const Pipeline& p) {
  const Lattice& lat = *p.lattice;
  const ClearanceField& cf = *p.clearance;
  const EnvelopeMap& em = *p.envelope;
  CostTicks lo = kUnreachable;
  CostTicks hi = 0;
  std::size_t finite = 0;
  std::size_t certified = 0;
  for (std::size_t i = 0; i < cf.node_count(); ++i) {
    const auto n = static_cast<NodeId>(i);
    if (lat.node_class(n) != NodeClass::free) continue;
    if (cf.certified(n)) ++certified;
    const CostTicks v = cf.clr(n);
    if (v == kUnreachable) continue;
    ++finite;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::size_t leaks = 0;
  for (auto l : p.graph->leaks) leaks += l;
  json s{{"scenario", p.scenario.name},
         {"nodes",
          {{"total", lat.node_count()},
           {"free", lat.count_class(NodeClass::free)},
           {"boundary", lat.count_class(NodeClass::boundary)},
           {"interior", lat.count_class(NodeClass::obstacle_interior)}}},
         {"edges", p.graph->edge_count()},
         {"leak_nodes", leaks},
         {"clearance",
          {{"finite_free", finite},
           {"certified_free", certified},
           {"min_finite", finite ? cost_json(lo) : json(nullptr)},
           {"max_finite", finite ? cost_json(hi) : json(nullptr)}}},
         {"envelope",
          {{"kappa", em.kappa},
           {"envelope", em.count(EnvelopeCategory::envelope)},
           {"boundary_adjacent", em.count(EnvelopeCategory::boundary_adjacent)},
           {"window_limited", em.count(EnvelopeCategory::window_limited)}}}};
  if (p.boundary) {
    s["boundary"] = {{"rho_probe", p.boundary->rho_probe},
                     {"shelf", p.boundary->count(BoundaryLabel::shelf)},
                     {"cliff", p.boundary->count(BoundaryLabel::cliff)}};
  }
  return s;
}

json parameters_json(const Pipeline& p) {
  const Scenario& s = p.scenario;
  return {{"system", s.system_name},
          {"scene", s.scene.name},
          {"control_samples", s.control_samples},
          {"spacing", s.spacing},
          {"tau", p.graph->tau},
          {"collision_substeps", p.graph->collision_substeps},
          {"contact_edges", s.contact_edges},
          {"kappa", p.kappa},
          {"rho_probe", p.rho_probe},
          {"search", s.search == SearchMode::dijkstra ? "dijkstra" : "label_correcting"},
          {"seed", s.seed},
          {"workers", p.exec.workers}};
}

void write_json(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace

const BoundaryClassification& Pipeline::boundary_classification() {
  if (!boundary) {
    const Stopwatch sw;
    boundary = classify_boundary(*graph, rho_probe, search());
    timings["boundary"] = sw.seconds();
  }
  return *boundary;
}

Pipeline build_pipeline(const Scenario& scenario, const Execution& exec) {
  Pipeline p;
  p.scenario = scenario;
  p.exec = exec;
  p.system = std::make_shared<const ControlSystem>(builtin_system(scenario.system_name, scenario.control_samples));

  Stopwatch sw;
  p.lattice = std::make_shared<const Lattice>(build_lattice(scenario.scene, p.system->axes, scenario.spacing, exec));
  p.timings["lattice"] = sw.seconds();

  sw = {};
  GraphOptions go;
  go.tau = scenario.tau;
  go.contact_edges = scenario.contact_edges;
  p.graph = std::make_shared<const PrimitiveGraph>(build_graph(p.system, p.lattice, go, exec));
  p.timings["graph"] = sw.seconds();

  sw = {};
  p.clearance = clearance_field(p.graph, p.search());
  p.timings["clearance"] = sw.seconds();

  sw = {};
  p.kappa = scenario.kappa.value_or(default_kappa(*p.system, *p.lattice));
  p.envelope = envelope(*p.clearance, p.kappa, exec);
  p.timings["envelope"] = sw.seconds();

  p.rho_probe = scenario.rho_probe.value_or(default_probe_radius(*p.graph));
  return p;
}

json run_check(Pipeline& p, const CheckSpec& check) {
  json rep{{"id", check.id}, {"type", check.type}, {"scenario", p.scenario.name}, {"parameters", check.params}};
  const auto& table = check_table();
  const auto it = table.find(check.type);
  if (it == table.end()) throw ConfigurationError("unknown check type '" + check.type + "'");
  bool passed = false;
  try {
    passed = it->second(p, check.params, rep);
  } catch (const ConfigurationError&) {
    throw;
  } catch (const ResourceError&) {
    throw;
  } catch (const Error& e) {
    rep["error"] = e.what();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError("check '" + check.id + "': " + e.what());
  }
  rep["passed"] = passed;
  return rep;
}

void apply_overrides(Scenario& scenario, const RunOptions& options) {
  if (options.seed) scenario.seed = *options.seed;
  if (options.spacing) {
    if (!(*options.spacing > 0.0)) throw ConfigurationError("spacing must be positive");
    const ControlSystem sys = builtin_system(scenario.system_name, scenario.control_samples);
    for (std::size_t a = 0; a < scenario.spacing.size(); ++a)
      if (sys.axes[a].kind == AxisKind::line) scenario.spacing[a] = *options.spacing;
  }
}

int run_scenario(const Scenario& scenario, const fs::path& out_dir, const Execution& exec, std::ostream& log) {
  const Stopwatch total;
  fs::create_directories(out_dir);
  Pipeline p = build_pipeline(scenario, exec);
  log << "lattice " << p.lattice->node_count() << " nodes, graph " << p.graph->edge_count() << " edges ("
      << p.timings["lattice"] + p.timings["graph"] << " s)\n";

  // Checks first so that a boundary classification they need is also exported.
  const Stopwatch checks_sw;
  json checks = json::array();
  std::vector<std::string> files;
  bool all_passed = true;
  for (const CheckSpec& c : scenario.checks) {
    const Stopwatch sw;
    json rep = run_check(p, c);
    const double secs = sw.seconds();
    const bool ok = rep.at("passed").get<bool>();
    all_passed = all_passed && ok;
    const std::string rel = "reports/" + c.id + ".json";
    write_json(out_dir / rel, rep);
    files.push_back(rel);
    json entry{{"id", c.id}, {"type", c.type}, {"passed", ok}, {"report", rel}, {"seconds", secs}};
    if (rep.contains("value")) entry["value"] = rep.at("value");
    if (rep.contains("error")) entry["error"] = rep.at("error");
    checks.push_back(entry);
    log << (ok ? "PASS " : "FAIL ") << c.id << " (" << c.type << ")\n";
  }
  p.timings["checks"] = checks_sw.seconds();

  const Stopwatch out_sw;
  const auto& fields = scenario.fields;
  auto wants = [&](const char* f) { return std::find(fields.begin(), fields.end(), f) != fields.end(); };
  const bool image = p.lattice->dim() >= 2;
  if (wants("clearance")) {
    write_clearance_csv(out_dir / "clearance.csv", *p.clearance);
    files.emplace_back("clearance.csv");
    if (image) {
      write_pgm(out_dir / "clearance.pgm", cost_heatmap(*p.lattice, p.clearance->field.value, scenario.image_slice));
      files.emplace_back("clearance.pgm");
    }
  }
  if (wants("envelope")) {
    write_envelope_csv(out_dir / "envelope.csv", *p.clearance, *p.envelope);
    files.emplace_back("envelope.csv");
    if (image) {
      write_pgm(out_dir / "envelope.pgm", envelope_mask(*p.lattice, *p.envelope, scenario.image_slice));
      files.emplace_back("envelope.pgm");
    }
  }
  if (wants("boundary") || p.boundary) {
    write_boundary_csv(out_dir / "boundary.csv", *p.lattice, p.boundary_classification());
    files.emplace_back("boundary.csv");
  }
  write_json(out_dir / "summary.json", summary_json(p));
  files.emplace_back("summary.json");
  p.timings["output"] = out_sw.seconds();
  p.timings["total"] = total.seconds();

  std::sort(files.begin(), files.end());
  json file_list = json::array();
  for (const auto& f : files)
    file_list.push_back({{"path", f}, {"bytes", fs::file_size(out_dir / f)}, {"sha256", sha256_file(out_dir / f)}});

  const int status = all_passed ? kExitOk : kExitCheckFailed;
  json manifest{{"tool", "kinoclear"},
                {"version", KINOCLEAR_VERSION},
                {"scenario", scenario.name},
                {"source", scenario.source},
                {"parameters", parameters_json(p)},
                {"timings", p.timings},
                {"checks", checks},
                {"files", file_list},
                {"exit_status", status}};
  write_json(out_dir / "manifest.json", manifest);
  log << (all_passed ? "all checks passed" : "some checks failed") << " (" << p.timings["total"] << " s)\n";
  return status;
}

int run(const RunOptions& options, std::ostream& log) {
  try {
    Scenario s = load_scenario(options.scenario_file);
    apply_overrides(s, options);
    return run_scenario(s, options.out_dir, Execution{std::max(1, options.workers)}, log);
  } catch (const ResourceError& e) {
    log << "resource limit: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::bad_alloc&) {
    log << "resource limit: out of memory\n";
    return kExitResource;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfiguration;
  } catch (const nlohmann::json::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfiguration;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfiguration;
  }
}

}  // namespace kinoclear
