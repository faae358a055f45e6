#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kinoclear/errors.hpp"
#include "kinoclear/vec.hpp"

namespace kinoclear {

enum class AxisKind { line, circle };

struct AxisTopology {
  AxisKind kind = AxisKind::line;
  double period = 0.0;  // only meaningful for circle axes

  static AxisTopology line() { return {}; }
  static AxisTopology circle(double period) { return {AxisKind::circle, period}; }
};

// Wraps circle coordinates into [-period/2, period/2).
double wrap_angle(double value, double period);

// Shortest displacement b - a, taking the short way around circle axes.
Vec displacement(std::span<const AxisTopology> axes, const Vec& a, const Vec& b);

// Euclidean distance in the product of lines and flat circles.
double state_distance(std::span<const AxisTopology> axes, const Vec& a, const Vec& b);

// Axis-aligned bounds on the non-circle axes. Circle axes are never "left".
struct StateBox {
  std::vector<std::pair<double, double>> bounds;

  bool contains(std::span<const AxisTopology> axes, const Vec& x) const;
  Vec center() const;
};

using VelocityFn = std::function<Vec(const Vec& state, const Vec& control)>;
using RunningCostFn = std::function<double(const Vec& state, const Vec& velocity)>;

// A control system sampled as a finite velocity multifunction.
struct ControlSystem {
  std::string name;
  std::size_t state_dim = 0;
  std::vector<AxisTopology> axes;
  VelocityFn velocity;
  std::vector<Vec> controls;
  RunningCostFn running_cost;
  // False for systems whose velocity sets are known to be nonconvex.
  bool convex_velocity_sets = true;

  Vec wrap(Vec x) const;
  double distance(const Vec& a, const Vec& b) const { return state_distance(axes, a, b); }
};

// Names accepted by builtin_system().
std::vector<std::string> builtin_system_names();

// galaga, gen-galaga, dubins, horizontal. Throws ConfigurationError otherwise.
ControlSystem builtin_system(std::string_view name, int samples_per_control_dim = 32);

// min over sampled controls u of <f(x,u), xi>.
double min_hamiltonian(const ControlSystem& system, const Vec& x, const Vec& xi);

// Deterministic set of unit directions: evenly spaced on the circle in 2D,
// a Fibonacci lattice on the sphere in 3D, seeded normals otherwise.
std::vector<Vec> direction_fan(std::size_t dim, std::size_t count);

// Best direction of a fan, i.e. the maximiser of min_hamiltonian at x. Ties
// keep the earliest fan entry.
std::pair<Vec, double> best_direction(const ControlSystem& system, const Vec& x, std::size_t fan_size = 64);

struct TrajectorySample {
  double time = 0.0;
  Vec state;
  Vec control;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double total_cost = 0.0;
  double duration = 0.0;
};

struct ScheduleSegment {
  Vec control;
  double duration = 0.0;
};

// Raised when integration leaves the state box; keeps what was integrated.
class DomainExitError : public Error {
 public:
  DomainExitError(const std::string& what, Trajectory partial)
      : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

// One classical RK4 step of xdot = f(x,u); circle axes are wrapped.
Vec rk4_step(const ControlSystem& system, const Vec& x, const Vec& u, double dt);

// RK4 step on the state augmented with the accumulated running cost.
// Returns the cost increment over the step.
double rk4_step_with_cost(const ControlSystem& system, Vec& x, const Vec& u, double dt);

// Fixed-step RK4 integration of a piecewise-constant control schedule. Each
// segment uses ceil(duration/step) equal steps so segments end exactly.
// Cost is integrated on the same nodes.
Trajectory integrate_trajectory(const ControlSystem& system, const Vec& x0,
                                std::span<const ScheduleSegment> schedule, double step = 0.01,
                                const std::optional<StateBox>& box = std::nullopt);

// Sampled regularity constants near a point.
struct RegularityEstimate {
  double velocity_bound = 0.0;   // M
  double lipschitz_bound = 0.0;  // K
  double cost_bound = 0.0;       // psi*
  double min_speed = 0.0;        // smallest nonzero sampled speed
};

RegularityEstimate estimate_regularity(const ControlSystem& system, const Vec& center, double radius,
                                       std::size_t samples, std::uint64_t seed);

struct DirectionalityCertificate {
  Vec anchor;
  Vec direction;
  double target_radius = 0.0;  // r*
  Vec target_point;            // x* = x + (r*/|xi|) xi
  double hamiltonian_value = 0.0;  // h0 = h_F(x, x* - x)
  double velocity_bound = 0.0;     // M
  double lipschitz_bound = 0.0;    // K
  double neighborhood_radius = 0.0;  // R
  double horizon = 0.0;              // t*
  double cost_bound = 0.0;           // psi*

  // Midpoint of (sqrt(1 - t h0 / r*^2), 1); valid for t in (0, t*].
  double shrink_factor(double t) const;
};

inline constexpr double kCertificateSafety = 0.9;

DirectionalityCertificate compute_certificate(const ControlSystem& system, const Vec& x, const Vec& xi,
                                              double r_star, std::size_t sample_count = 10000,
                                              std::uint64_t seed = 1);

}  // namespace kinoclear
