#include "kinoclear/scenario.hpp"

#include <fstream>
#include <limits>
#include <set>

#include "kinoclear/errors.hpp"
#include "kinoclear/systems.hpp"

namespace kinoclear {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double positive(const json& doc, const char* key) {
  if (!doc.is_number()) throw ConfigurationError(std::string(key) + " must be a number");
  const double v = doc.get<double>();
  if (!(v > 0.0)) throw ConfigurationError(std::string(key) + " must be positive");
  return v;
}

double bound(const json& v, double fallback) {
  if (v.is_null()) return fallback;
  if (!v.is_number()) throw ConfigurationError("box bounds must be numbers or null");
  return v.get<double>();
}

std::vector<std::pair<double, double>> parse_box(const json& doc) {
  if (!doc.is_array() || doc.empty()) throw ConfigurationError("box must be a list of [low, high] pairs");
  std::vector<std::pair<double, double>> out;
  for (const json& p : doc) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ConfigurationError("box entries must be [low, high] pairs");
    const double lo = p[0].get<double>();
    const double hi = p[1].get<double>();
    if (!(lo < hi)) throw ConfigurationError("box entries need low < high");
    out.emplace_back(lo, hi);
  }
  return out;
}

Scene parse_scene(const json& doc) {
  if (doc.is_string()) return builtin_scene(doc.get<std::string>());
  if (!doc.is_object()) throw ConfigurationError("scene must be a name or an object");
  Scene s;
  if (doc.contains("base")) {
    s = builtin_scene(doc.at("base").get<std::string>());
  } else {
    if (!doc.contains("box") || !doc.contains("obstacle"))
      throw ConfigurationError("custom scene needs 'box' and 'obstacle' (or a 'base' scene)");
    s.name = doc.value("name", std::string("custom"));
  }
  if (doc.contains("name")) s.name = doc.at("name").get<std::string>();
  if (doc.contains("box")) s.box.bounds = parse_box(doc.at("box"));
  if (doc.contains("obstacle")) s.obstacle = parse_region(doc.at("obstacle"));
  return s;
}

}  // namespace

Vec parse_vec(const json& doc, std::size_t expected_dim) {
  if (!doc.is_array() || doc.empty() || doc.size() > kMaxDim)
    throw ConfigurationError("expected a list of 1 to " + std::to_string(kMaxDim) + " numbers");
  Vec v(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_number()) throw ConfigurationError("vector entries must be numbers");
    v[i] = doc[i].get<double>();
  }
  if (expected_dim != 0 && v.size() != expected_dim)
    throw ConfigurationError("expected a vector of dimension " + std::to_string(expected_dim));
  return v;
}

Region parse_region(const json& doc) {
  if (!doc.is_object() || doc.size() != 1) throw ConfigurationError("a region is an object with exactly one key");
  const std::string key = doc.begin().key();
  const json& body = doc.begin().value();
  if (key == "half_space") {
    return Region::half_space(parse_vec(body.at("normal")), body.at("offset").get<double>());
  }
  if (key == "box") {
    const json& lo = body.at("lo");
    const json& hi = body.at("hi");
    if (!lo.is_array() || !hi.is_array() || lo.size() != hi.size() || lo.empty())
      throw ConfigurationError("region box needs 'lo' and 'hi' lists of equal length");
    Vec a(lo.size());
    Vec b(hi.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
      a[i] = bound(lo[i], -kInf);
      b[i] = bound(hi[i], kInf);
    }
    return Region::box(a, b);
  }
  if (key == "union" || key == "intersection") {
    if (!body.is_array()) throw ConfigurationError(key + " takes a list of regions");
    std::vector<Region> parts;
    for (const json& p : body) parts.push_back(parse_region(p));
    return key == "union" ? Region::unite(std::move(parts)) : Region::intersect(std::move(parts));
  }
  if (key == "complement") return Region::complement(parse_region(body));
  throw ConfigurationError("unknown region kind '" + key + "'");
}

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) throw ConfigurationError("scenario must be a JSON object");
  static const std::set<std::string> known{"name",      "system", "control_samples", "scene",  "spacing",
                                           "tau",       "kappa",  "rho_probe",       "seed",   "search",
                                           "contact_edges", "fields", "image_slice", "checks", "description"};
  for (const auto& [k, v] : doc.items())
    if (!known.contains(k)) throw ConfigurationError("unknown scenario key '" + k + "'");

  Scenario s;
  s.source = doc;
  try {
    s.name = doc.value("name", std::string("scenario"));
    s.system_name = doc.at("system").get<std::string>();
    if (doc.contains("control_samples")) {
      s.control_samples = doc.at("control_samples").get<int>();
      if (s.control_samples < 2) throw ConfigurationError("control_samples must be at least 2");
    }
    const ControlSystem sys = builtin_system(s.system_name, s.control_samples);
    s.scene = parse_scene(doc.at("scene"));

    const json& sp = doc.at("spacing");
    if (sp.is_number()) {
      const double h = positive(sp, "spacing");
      s.spacing.assign(sys.state_dim, h);
    } else {
      const Vec v = parse_vec(sp, sys.state_dim);
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) throw ConfigurationError("spacing must be positive");
        s.spacing.push_back(v[i]);
      }
    }
    if (s.scene.box.bounds.size() != sys.state_dim)
      throw ConfigurationError("scene box dimension does not match system '" + s.system_name + "'");

    if (doc.contains("tau")) s.tau = positive(doc.at("tau"), "tau");
    if (doc.contains("kappa") && !doc.at("kappa").is_null()) s.kappa = positive(doc.at("kappa"), "kappa");
    if (doc.contains("rho_probe") && !doc.at("rho_probe").is_null())
      s.rho_probe = positive(doc.at("rho_probe"), "rho_probe");
    if (doc.contains("seed")) s.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("search")) {
      const auto m = doc.at("search").get<std::string>();
      if (m == "dijkstra")
        s.search = SearchMode::dijkstra;
      else if (m == "label_correcting")
        s.search = SearchMode::parallel_label_correcting;
      else
        throw ConfigurationError("search must be 'dijkstra' or 'label_correcting'");
    }
    if (doc.contains("contact_edges")) s.contact_edges = doc.at("contact_edges").get<bool>();
    if (doc.contains("fields")) {
      s.fields = doc.at("fields").get<std::vector<std::string>>();
      for (const auto& f : s.fields)
        if (f != "clearance" && f != "envelope" && f != "boundary")
          throw ConfigurationError("unknown field '" + f + "'");
    }
    if (doc.contains("image_slice")) s.image_slice = doc.at("image_slice").get<double>();

    std::set<std::string> ids;
    if (doc.contains("checks")) {
      const json& checks = doc.at("checks");
      if (!checks.is_array()) throw ConfigurationError("checks must be a list");
      for (std::size_t i = 0; i < checks.size(); ++i) {
        const json& c = checks[i];
        if (!c.is_object() || !c.contains("type")) throw ConfigurationError("every check needs a 'type'");
        CheckSpec spec;
        spec.type = c.at("type").get<std::string>();
        spec.id = c.value("id", spec.type + "-" + std::to_string(i));
        if (!ids.insert(spec.id).second) throw ConfigurationError("duplicate check id '" + spec.id + "'");
        spec.params = c;
        s.checks.push_back(std::move(spec));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("scenario: ") + e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigurationError("cannot parse " + path.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

}  // namespace kinoclear
