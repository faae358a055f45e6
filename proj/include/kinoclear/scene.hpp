#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kinoclear/parallel.hpp"
#include "kinoclear/systems.hpp"
#include "kinoclear/vec.hpp"

namespace kinoclear {

// Closed region built from half-spaces and boxes by union, intersection and
// complement. Each region answers two questions: closed membership and
// membership in its interior. Complement swaps them, so complement(A) is
// evaluated as the closure of the complement.
class Region {
 public:
  // Everything-free default: the empty region.
  Region();

  // {x : <normal, x> <= offset}
  static Region half_space(Vec normal, double offset);
  // Closed box; infinite bounds are allowed.
  static Region box(Vec lo, Vec hi);
  static Region unite(std::vector<Region> parts);
  static Region intersect(std::vector<Region> parts);
  static Region complement(Region inner);

  bool contains(const Vec& x) const;
  bool contains_interior(const Vec& x) const;
  bool is_empty_region() const;

 private:
  struct Node;
  explicit Region(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static bool eval(const Node& node, const Vec& x, bool interior);
  std::shared_ptr<const Node> node_;
};

struct Scene {
  std::string name;
  StateBox box;
  Region obstacle;

  bool in_obstacle(const Vec& x) const { return obstacle.contains(x); }
  bool in_obstacle_interior(const Vec& x) const { return obstacle.contains_interior(x); }
};

std::vector<std::string> builtin_scene_names();

// galaga-corner, galaga-slant, gen-galaga, dubins-corner, horiz-corner.
Scene builtin_scene(std::string_view name);

enum class NodeClass : std::uint8_t { free = 0, obstacle_interior = 1, boundary = 2 };

using NodeId = std::int64_t;
inline constexpr NodeId kNoNode = -1;

struct LatticeAxis {
  double lo = 0.0;
  double hi = 0.0;
  double spacing = 0.0;
  std::int64_t count = 0;
  AxisTopology topology;
  // When lo and 1/spacing are (near) integers in cell units, coordinates are
  // computed as (offset + i) / inverse so grid values like -0.5 are exact.
  bool exact_grid = false;
  std::int64_t exact_offset = 0;
  double exact_inverse = 0.0;

  double coordinate(std::int64_t i) const;
};

using MultiIndex = std::array<std::int64_t, kMaxDim>;

// Default cap on lattice size, overridable with KINOCLEAR_MAX_NODES.
std::size_t max_node_count();

class Lattice {
 public:
  Lattice() = default;
  Lattice(std::vector<LatticeAxis> axes, std::vector<NodeClass> classes, Scene scene = {});

  const Scene& scene() const { return scene_; }
  // Inside the lattice box on every line axis.
  bool in_box(const Vec& x) const;

  std::size_t dim() const { return axes_.size(); }
  std::size_t node_count() const { return classes_.size(); }
  const std::vector<LatticeAxis>& axes() const { return axes_; }
  std::vector<AxisTopology> topology() const;
  double max_spacing() const;

  NodeClass node_class(NodeId id) const { return classes_[static_cast<std::size_t>(id)]; }
  const std::vector<NodeClass>& classes() const { return classes_; }
  bool in_graph(NodeId id) const { return node_class(id) != NodeClass::obstacle_interior; }

  MultiIndex multi_index(NodeId id) const;
  NodeId id_of(const MultiIndex& idx) const;
  Vec coords(NodeId id) const;

  // Nearest node, or kNoNode when x lies outside the lattice box by more than
  // half a cell on some line axis.
  NodeId nearest(const Vec& x) const;

  double distance(const Vec& a, const Vec& b) const;
  double node_distance(NodeId a, NodeId b) const { return distance(coords(a), coords(b)); }

  // Face neighbours (2 per axis, wrapping on circle axes, clipped on lines).
  template <typename Fn>
  void for_each_face_neighbor(NodeId id, Fn&& fn) const {
    const MultiIndex idx = multi_index(id);
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      for (int s : {-1, 1}) {
        MultiIndex n = idx;
        if (!step_axis(n, a, s)) continue;
        fn(id_of(n));
      }
    }
  }

  // All 3^d - 1 neighbours of the Moore neighbourhood.
  template <typename Fn>
  void for_each_moore_neighbor(NodeId id, Fn&& fn) const {
    const MultiIndex base = multi_index(id);
    const std::size_t d = axes_.size();
    std::size_t total = 1;
    for (std::size_t a = 0; a < d; ++a) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      MultiIndex n = base;
      std::size_t c = code;
      bool ok = true;
      bool center = true;
      for (std::size_t a = 0; a < d && ok; ++a) {
        const int s = static_cast<int>(c % 3) - 1;
        c /= 3;
        if (s != 0) {
          center = false;
          ok = step_axis(n, a, s);
        }
      }
      if (ok && !center) fn(id_of(n));
    }
  }

  // Calls fn for every node whose coordinate lies strictly within radius of
  // center (lattice metric), in increasing id order.
  void for_each_in_ball(const Vec& center, double radius, const std::function<void(NodeId)>& fn) const;

  std::size_t count_class(NodeClass c) const;

 private:
  bool step_axis(MultiIndex& idx, std::size_t axis, int step) const;

  std::vector<LatticeAxis> axes_;
  std::vector<std::int64_t> strides_;
  std::vector<NodeClass> classes_;
  Scene scene_;
};

// Builds the lattice for scene.box with per-axis spacing. Circle axes take
// their range from the topology (one full period, no duplicate end node) and
// the period must be an integer multiple of the spacing.
Lattice build_lattice(const Scene& scene, std::span<const AxisTopology> topology, std::span<const double> spacing,
                      const Execution& exec = {});

// Serial reference implementation kept for testing the parallel kernel.
Lattice build_lattice_serial(const Scene& scene, std::span<const AxisTopology> topology,
                             std::span<const double> spacing);

// Face-connected components of FREE nodes inside the open ball.
int free_component_count(const Lattice& lattice, const Vec& center, double radius);

}  // namespace kinoclear
