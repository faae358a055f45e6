#include "kinoclear/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>
#include <variant>

#include "kinoclear/errors.hpp"

namespace kinoclear {

// ---------------------------------------------------------------------------
// Region

struct Region::Node {
  enum class Kind { half_space, box, unite, intersect, complement };
  Kind kind = Kind::unite;
  Vec a;  // normal, or box lo
  Vec b;  // box hi
  double offset = 0.0;
  std::vector<Region> children;
};

Region::Region() : node_(std::make_shared<Node>()) {}

Region Region::half_space(Vec normal, double offset) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::half_space;
  n->a = normal;
  n->offset = offset;
  return Region(std::move(n));
}

Region Region::box(Vec lo, Vec hi) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::box;
  n->a = lo;
  n->b = hi;
  return Region(std::move(n));
}

Region Region::unite(std::vector<Region> parts) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::unite;
  n->children = std::move(parts);
  return Region(std::move(n));
}

Region Region::intersect(std::vector<Region> parts) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::intersect;
  n->children = std::move(parts);
  return Region(std::move(n));
}

Region Region::complement(Region inner) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::complement;
  n->children.push_back(std::move(inner));
  return Region(std::move(n));
}

bool Region::eval(const Node& node, const Vec& x, bool interior) {
  switch (node.kind) {
    case Node::Kind::half_space: {
      const double v = dot(node.a, x);
      return interior ? v < node.offset : v <= node.offset;
    }
    case Node::Kind::box:
      for (std::size_t i = 0; i < node.a.size(); ++i) {
        if (interior ? !(x[i] > node.a[i] && x[i] < node.b[i]) : !(x[i] >= node.a[i] && x[i] <= node.b[i]))
          return false;
      }
      return true;
    case Node::Kind::unite:
      for (const Region& r : node.children)
        if (eval(*r.node_, x, interior)) return true;
      return false;
    case Node::Kind::intersect:
      for (const Region& r : node.children)
        if (!eval(*r.node_, x, interior)) return false;
      return true;
    case Node::Kind::complement:
      return !eval(*node.children.front().node_, x, !interior);
  }
  return false;
}

bool Region::contains(const Vec& x) const { return eval(*node_, x, false); }
bool Region::contains_interior(const Vec& x) const { return eval(*node_, x, true); }
bool Region::is_empty_region() const { return node_->kind == Node::Kind::unite && node_->children.empty(); }

// ---------------------------------------------------------------------------
// Built-in scenes

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<std::string> builtin_scene_names() {
  return {"galaga-corner", "galaga-slant", "gen-galaga", "dubins-corner", "horiz-corner"};
}

Scene builtin_scene(std::string_view name) {
  Scene s;
  s.name = std::string(name);
  if (name == "galaga-corner") {
    // Free: (-1,2) x (-inf,0]  U  (-5,2) x (0,inf)
    s.box.bounds = {{-6.0, 3.0}, {-3.0, 4.0}};
    s.obstacle = Region::unite({
        Region::half_space(Vec{1.0, 0.0}, -5.0),
        Region::half_space(Vec{-1.0, 0.0}, -2.0),
        Region::box(Vec{-kInf, -kInf}, Vec{-1.0, 0.0}),
    });
  } else if (name == "galaga-slant") {
    // Free: (-1,inf) x (-inf,0]  U  {x2 > -2 x1 - 2, x2 > 0}
    s.box.bounds = {{-5.0, 3.0}, {-3.0, 6.0}};
    s.obstacle = Region::intersect({
        Region::half_space(Vec{1.0, 0.0}, -1.0),
        Region::half_space(Vec{2.0, 1.0}, -2.0),
    });
  } else if (name == "gen-galaga") {
    s.box.bounds = {{-6.0, 3.0}, {-3.0, 4.0}, {-2.0, 2.0}};
    s.obstacle = Region::unite({
        Region::half_space(Vec{1.0, 0.0, 0.0}, -5.0),
        Region::half_space(Vec{-1.0, 0.0, 0.0}, -2.0),
        Region::box(Vec{-kInf, -kInf, -kInf}, Vec{-1.0, 0.0, kInf}),
    });
  } else if (name == "dubins-corner") {
    s.box.bounds = {{-1.5, 1.5}, {-1.5, 1.5}, {-std::numbers::pi, std::numbers::pi}};
    s.obstacle = Region::box(Vec{-kInf, -kInf, -kInf}, Vec{0.0, 0.0, kInf});
  } else if (name == "horiz-corner") {
    s.box.bounds = {{-1.0, 2.5}, {-1.0, 1.0}};
    s.obstacle = Region::box(Vec{-kInf, -kInf}, Vec{0.0, 0.0});
  } else {
    throw ConfigurationError("unknown scene '" + std::string(name) + "'");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Lattice

double LatticeAxis::coordinate(std::int64_t i) const {
  if (exact_grid) return static_cast<double>(exact_offset + i) / exact_inverse;
  if (topology.kind == AxisKind::line && i == count - 1) return hi;
  return lo + spacing * static_cast<double>(i);
}

std::size_t max_node_count() {
  if (const char* env = std::getenv("KINOCLEAR_MAX_NODES")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 50'000'000;
}

Lattice::Lattice(std::vector<LatticeAxis> axes, std::vector<NodeClass> classes, Scene scene)
    : axes_(std::move(axes)), classes_(std::move(classes)), scene_(std::move(scene)) {
  strides_.assign(axes_.size(), 1);
  for (std::size_t a = axes_.size(); a-- > 1;) strides_[a - 1] = strides_[a] * axes_[a].count;
}

bool Lattice::in_box(const Vec& x) const {
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    if (axes_[a].topology.kind == AxisKind::circle) continue;
    if (x[a] < axes_[a].lo || x[a] > axes_[a].hi) return false;
  }
  return true;
}

std::vector<AxisTopology> Lattice::topology() const {
  std::vector<AxisTopology> t;
  for (const auto& a : axes_) t.push_back(a.topology);
  return t;
}

double Lattice::max_spacing() const {
  double h = 0.0;
  for (const auto& a : axes_) h = std::max(h, a.spacing);
  return h;
}

MultiIndex Lattice::multi_index(NodeId id) const {
  MultiIndex idx{};
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    idx[a] = id / strides_[a];
    id %= strides_[a];
  }
  return idx;
}

NodeId Lattice::id_of(const MultiIndex& idx) const {
  NodeId id = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) id += idx[a] * strides_[a];
  return id;
}

Vec Lattice::coords(NodeId id) const {
  const MultiIndex idx = multi_index(id);
  Vec x(axes_.size());
  for (std::size_t a = 0; a < axes_.size(); ++a) x[a] = axes_[a].coordinate(idx[a]);
  return x;
}

NodeId Lattice::nearest(const Vec& x) const {
  MultiIndex idx{};
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const auto& ax = axes_[a];
    if (ax.topology.kind == AxisKind::circle) {
      double rel = std::fmod(x[a] - ax.lo, ax.topology.period);
      if (rel < 0.0) rel += ax.topology.period;
      auto i = static_cast<std::int64_t>(std::floor(rel / ax.spacing + 0.5));
      i %= ax.count;
      if (i < 0) i += ax.count;
      idx[a] = i;
    } else {
      const auto i = static_cast<std::int64_t>(std::floor((x[a] - ax.lo) / ax.spacing + 0.5));
      if (i < 0 || i >= ax.count) return kNoNode;
      idx[a] = i;
    }
  }
  return id_of(idx);
}

double Lattice::distance(const Vec& a, const Vec& b) const {
  double s = 0.0;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    double d = b[i] - a[i];
    if (axes_[i].topology.kind == AxisKind::circle) d = wrap_angle(d, axes_[i].topology.period);
    s += d * d;
  }
  return std::sqrt(s);
}

bool Lattice::step_axis(MultiIndex& idx, std::size_t axis, int step) const {
  const auto& ax = axes_[axis];
  std::int64_t v = idx[axis] + step;
  if (ax.topology.kind == AxisKind::circle) {
    v %= ax.count;
    if (v < 0) v += ax.count;
  } else if (v < 0 || v >= ax.count) {
    return false;
  }
  idx[axis] = v;
  return true;
}

void Lattice::for_each_in_ball(const Vec& center, double radius, const std::function<void(NodeId)>& fn) const {
  const std::size_t d = axes_.size();
  std::vector<std::vector<std::int64_t>> ranges(d);
  for (std::size_t a = 0; a < d; ++a) {
    const auto& ax = axes_[a];
    if (ax.topology.kind == AxisKind::circle) {
      double rel = std::fmod(center[a] - ax.lo, ax.topology.period);
      if (rel < 0.0) rel += ax.topology.period;
      const auto c = static_cast<std::int64_t>(std::floor(rel / ax.spacing + 0.5));
      const auto reach = std::min<std::int64_t>(static_cast<std::int64_t>(std::ceil(radius / ax.spacing)) + 1,
                                                ax.count / 2);
      for (std::int64_t k = -reach; k <= reach; ++k) {
        std::int64_t i = (c + k) % ax.count;
        if (i < 0) i += ax.count;
        ranges[a].push_back(i);
      }
      std::sort(ranges[a].begin(), ranges[a].end());
      ranges[a].erase(std::unique(ranges[a].begin(), ranges[a].end()), ranges[a].end());
    } else {
      const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((center[a] - radius - ax.lo) / ax.spacing)));
      const auto hi = std::min<std::int64_t>(ax.count - 1,
                                             static_cast<std::int64_t>(std::ceil((center[a] + radius - ax.lo) / ax.spacing)));
      for (std::int64_t i = lo; i <= hi; ++i) ranges[a].push_back(i);
    }
    if (ranges[a].empty()) return;
  }
  std::vector<std::size_t> pos(d, 0);
  while (true) {
    MultiIndex idx{};
    for (std::size_t a = 0; a < d; ++a) idx[a] = ranges[a][pos[a]];
    const NodeId id = id_of(idx);
    if (distance(coords(id), center) < radius) fn(id);
    std::size_t a = d;
    while (a > 0) {
      --a;
      if (++pos[a] < ranges[a].size()) break;
      pos[a] = 0;
      if (a == 0) return;
    }
  }
}

std::size_t Lattice::count_class(NodeClass c) const {
  return static_cast<std::size_t>(std::count(classes_.begin(), classes_.end(), c));
}

namespace {

std::vector<LatticeAxis> make_axes(const Scene& scene, std::span<const AxisTopology> topology,
                                   std::span<const double> spacing) {
  const std::size_t d = scene.box.bounds.size();
  if (d == 0 || d > kMaxDim) throw ConfigurationError("scene box dimension out of range");
  if (topology.size() != d) throw ConfigurationError("system dimension does not match scene box");
  if (spacing.size() != d) throw ConfigurationError("spacing must list one value per axis");

  std::vector<LatticeAxis> axes(d);
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) {
    auto& ax = axes[a];
    const double h = spacing[a];
    if (!(h > 0.0)) throw ConfigurationError("spacing must be positive");
    ax.spacing = h;
    ax.topology = topology[a];
    if (ax.topology.kind == AxisKind::circle) {
      const double period = ax.topology.period;
      const double cells = period / h;
      const auto n = static_cast<std::int64_t>(std::llround(cells));
      if (n < 3 || std::abs(cells - static_cast<double>(n)) > 1e-6) {
        throw ConfigurationError("circle period must be an integer multiple of the spacing");
      }
      ax.lo = -0.5 * period;
      ax.hi = 0.5 * period;
      ax.count = n;
    } else {
      ax.lo = scene.box.bounds[a].first;
      ax.hi = scene.box.bounds[a].second;
      if (!(ax.hi > ax.lo)) throw ConfigurationError("empty box axis");
      const double cells = (ax.hi - ax.lo) / h;
      const auto n = static_cast<std::int64_t>(std::llround(cells));
      if (std::abs(cells - static_cast<double>(n)) > 1e-6 * std::max(1.0, cells)) {
        throw ConfigurationError("box extent must be an integer multiple of the spacing");
      }
      ax.count = n + 1;
      const double inv = 1.0 / h;
      const double off = ax.lo / h;
      if (std::abs(inv - std::round(inv)) < 1e-9 * inv && std::abs(off - std::round(off)) < 1e-9 * std::max(1.0, std::abs(off))) {
        ax.exact_grid = true;
        ax.exact_inverse = std::round(inv);
        ax.exact_offset = static_cast<std::int64_t>(std::llround(off));
      }
    }
    total *= static_cast<std::size_t>(ax.count);
    if (total > max_node_count()) {
      throw ResourceError("lattice would have more than " + std::to_string(max_node_count()) + " nodes");
    }
  }
  return axes;
}

// Obstacle nodes with at least one FREE face neighbour become BOUNDARY.
void mark_boundary(const Lattice& shape, std::vector<NodeClass>& cls, const std::vector<std::uint8_t>& obstacle,
                   int workers) {
  const auto n = static_cast<std::int64_t>(obstacle.size());
#pragma omp parallel for schedule(static) num_threads(workers) if (workers > 1)
  for (std::int64_t id = 0; id < n; ++id) {
    if (!obstacle[id]) {
      cls[id] = NodeClass::free;
      continue;
    }
    bool touches_free = false;
    shape.for_each_face_neighbor(id, [&](NodeId m) { touches_free = touches_free || !obstacle[m]; });
    cls[id] = touches_free ? NodeClass::boundary : NodeClass::obstacle_interior;
  }
}

}  // namespace

Lattice build_lattice(const Scene& scene, std::span<const AxisTopology> topology, std::span<const double> spacing,
                      const Execution& exec) {
  auto axes = make_axes(scene, topology, spacing);
  std::size_t total = 1;
  for (const auto& ax : axes) total *= static_cast<std::size_t>(ax.count);

  // Shape-only lattice for index arithmetic during classification.
  Lattice shape(axes, std::vector<NodeClass>(total, NodeClass::free));
  std::vector<std::uint8_t> obstacle(total, 0);
  const auto n = static_cast<std::int64_t>(total);
  const int workers = std::max(1, exec.workers);
#pragma omp parallel for schedule(static) num_threads(workers) if (workers > 1)
  for (std::int64_t id = 0; id < n; ++id) obstacle[id] = scene.in_obstacle(shape.coords(id)) ? 1 : 0;

  std::vector<NodeClass> cls(total);
  mark_boundary(shape, cls, obstacle, workers);
  return Lattice(std::move(axes), std::move(cls), scene);
}

Lattice build_lattice_serial(const Scene& scene, std::span<const AxisTopology> topology,
                             std::span<const double> spacing) {
  auto axes = make_axes(scene, topology, spacing);
  std::size_t total = 1;
  for (const auto& ax : axes) total *= static_cast<std::size_t>(ax.count);
  Lattice shape(axes, std::vector<NodeClass>(total, NodeClass::free));
  std::vector<std::uint8_t> obstacle(total, 0);
  for (std::size_t id = 0; id < total; ++id) obstacle[id] = scene.in_obstacle(shape.coords(static_cast<NodeId>(id))) ? 1 : 0;
  std::vector<NodeClass> cls(total);
  for (std::size_t id = 0; id < total; ++id) {
    if (!obstacle[id]) {
      cls[id] = NodeClass::free;
      continue;
    }
    bool touches_free = false;
    shape.for_each_face_neighbor(static_cast<NodeId>(id), [&](NodeId m) { touches_free = touches_free || !obstacle[m]; });
    cls[id] = touches_free ? NodeClass::boundary : NodeClass::obstacle_interior;
  }
  return Lattice(std::move(axes), std::move(cls), scene);
}

int free_component_count(const Lattice& lattice, const Vec& center, double radius) {
  std::vector<NodeId> members;
  lattice.for_each_in_ball(center, radius, [&](NodeId id) {
    if (lattice.node_class(id) == NodeClass::free) members.push_back(id);
  });
  std::unordered_map<NodeId, bool> seen;
  seen.reserve(members.size() * 2);
  for (NodeId id : members) seen.emplace(id, false);

  int components = 0;
  std::deque<NodeId> queue;
  for (NodeId start : members) {
    if (seen[start]) continue;
    ++components;
    seen[start] = true;
    queue.push_back(start);
    while (!queue.empty()) {
      const NodeId cur = queue.front();
      queue.pop_front();
      lattice.for_each_face_neighbor(cur, [&](NodeId m) {
        auto it = seen.find(m);
        if (it != seen.end() && !it->second) {
          it->second = true;
          queue.push_back(m);
        }
      });
    }
  }
  return components;
}

}  // namespace kinoclear
