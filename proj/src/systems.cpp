#include "kinoclear/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace kinoclear {

double wrap_angle(double value, double period) {
  const double half = 0.5 * period;
  double w = std::fmod(value + half, period);
  if (w < 0.0) w += period;
  return w - half;
}

Vec displacement(std::span<const AxisTopology> axes, const Vec& a, const Vec& b) {
  Vec d = b - a;
  for (std::size_t i = 0; i < d.size() && i < axes.size(); ++i) {
    if (axes[i].kind == AxisKind::circle) d[i] = wrap_angle(d[i], axes[i].period);
  }
  return d;
}

double state_distance(std::span<const AxisTopology> axes, const Vec& a, const Vec& b) {
  return norm(displacement(axes, a, b));
}

bool StateBox::contains(std::span<const AxisTopology> axes, const Vec& x) const {
  for (std::size_t i = 0; i < bounds.size(); ++i) {
    if (i < axes.size() && axes[i].kind == AxisKind::circle) continue;
    if (x[i] < bounds[i].first || x[i] > bounds[i].second) return false;
  }
  return true;
}

Vec StateBox::center() const {
  Vec c(bounds.size());
  for (std::size_t i = 0; i < bounds.size(); ++i) c[i] = 0.5 * (bounds[i].first + bounds[i].second);
  return c;
}

Vec ControlSystem::wrap(Vec x) const {
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i].kind == AxisKind::circle) x[i] = wrap_angle(x[i], axes[i].period);
  }
  return x;
}

namespace {

std::vector<double> uniform_samples(double lo, double hi, int count) {
  std::vector<double> out;
  if (count <= 1) {
    out.push_back(0.5 * (lo + hi));
    return out;
  }
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(lo + (hi - lo) * k / (count - 1));
  return out;
}

double unit_cost(const Vec&, const Vec&) { return 1.0; }

}  // namespace

std::vector<std::string> builtin_system_names() { return {"galaga", "gen-galaga", "dubins", "horizontal"}; }

ControlSystem builtin_system(std::string_view name, int samples_per_control_dim) {
  if (samples_per_control_dim < 1) throw ConfigurationError("control sample count must be positive");
  ControlSystem sys;
  sys.name = std::string(name);
  sys.running_cost = unit_cost;

  if (name == "galaga") {
    sys.state_dim = 2;
    sys.axes = {AxisTopology::line(), AxisTopology::line()};
    sys.velocity = [](const Vec&, const Vec& u) { return Vec{u[0], 1.0}; };
    for (double u : uniform_samples(-1.0, 1.0, samples_per_control_dim)) sys.controls.push_back(Vec{u});
  } else if (name == "gen-galaga") {
    sys.state_dim = 3;
    sys.axes = {AxisTopology::line(), AxisTopology::line(), AxisTopology::line()};
    sys.velocity = [](const Vec& x, const Vec& u) { return Vec{u[0], x[2], u[1]}; };
    const auto s = uniform_samples(-1.0, 1.0, samples_per_control_dim);
    for (double u1 : s)
      for (double u2 : s) sys.controls.push_back(Vec{u1, u2});
  } else if (name == "dubins") {
    sys.state_dim = 3;
    sys.axes = {AxisTopology::line(), AxisTopology::line(), AxisTopology::circle(2.0 * std::numbers::pi)};
    sys.velocity = [](const Vec& x, const Vec& u) { return Vec{std::cos(x[2]), std::sin(x[2]), u[0]}; };
    for (double u : uniform_samples(-1.0, 1.0, samples_per_control_dim)) sys.controls.push_back(Vec{u});
  } else if (name == "horizontal") {
    sys.state_dim = 2;
    sys.axes = {AxisTopology::line(), AxisTopology::line()};
    sys.velocity = [](const Vec&, const Vec& u) { return Vec{std::cos(u[0]), std::sin(u[0])}; };
    for (double u : uniform_samples(0.0, std::numbers::pi, samples_per_control_dim)) sys.controls.push_back(Vec{u});
    // Velocity set is the upper unit semicircle, which is not convex.
    sys.convex_velocity_sets = false;
  } else {
    throw ConfigurationError("unknown system '" + std::string(name) + "'");
  }
  return sys;
}

double min_hamiltonian(const ControlSystem& system, const Vec& x, const Vec& xi) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& u : system.controls) best = std::min(best, dot(system.velocity(x, u), xi));
  return best;
}

std::vector<Vec> direction_fan(std::size_t dim, std::size_t count) {
  std::vector<Vec> fan;
  fan.reserve(count);
  if (dim == 1) {
    fan.push_back(Vec{1.0});
    fan.push_back(Vec{-1.0});
    return fan;
  }
  if (dim == 2) {
    for (std::size_t k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      fan.push_back(Vec{std::cos(a), std::sin(a)});
    }
    return fan;
  }
  if (dim == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(count);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * static_cast<double>(k);
      fan.push_back(Vec{r * std::cos(phi), r * std::sin(phi), z});
    }
    return fan;
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  for (std::size_t k = 0; k < count; ++k) {
    Vec v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = normal(rng);
    fan.push_back(v * (1.0 / norm(v)));
  }
  return fan;
}

std::pair<Vec, double> best_direction(const ControlSystem& system, const Vec& x, std::size_t fan_size) {
  const auto fan = direction_fan(system.state_dim, fan_size);
  Vec best = fan.front();
  double best_h = -std::numeric_limits<double>::infinity();
  for (const Vec& xi : fan) {
    const double h = min_hamiltonian(system, x, xi);
    if (h > best_h) {
      best_h = h;
      best = xi;
    }
  }
  return {best, best_h};
}

Vec rk4_step(const ControlSystem& system, const Vec& x, const Vec& u, double dt) {
  const Vec k1 = system.velocity(x, u);
  const Vec k2 = system.velocity(x + (0.5 * dt) * k1, u);
  const Vec k3 = system.velocity(x + (0.5 * dt) * k2, u);
  const Vec k4 = system.velocity(x + dt * k3, u);
  return system.wrap(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

double rk4_step_with_cost(const ControlSystem& system, Vec& x, const Vec& u, double dt) {
  const auto& f = system.velocity;
  const auto& psi = system.running_cost;
  const Vec x1 = x;
  const Vec k1 = f(x1, u);
  const double c1 = psi(x1, k1);
  const Vec x2 = x + (0.5 * dt) * k1;
  const Vec k2 = f(x2, u);
  const double c2 = psi(x2, k2);
  const Vec x3 = x + (0.5 * dt) * k2;
  const Vec k3 = f(x3, u);
  const double c3 = psi(x3, k3);
  const Vec x4 = x + dt * k3;
  const Vec k4 = f(x4, u);
  const double c4 = psi(x4, k4);
  x = system.wrap(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  return (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
}

Trajectory integrate_trajectory(const ControlSystem& system, const Vec& x0, std::span<const ScheduleSegment> schedule,
                                double step, const std::optional<StateBox>& box) {
  if (!(step > 0.0)) throw ConfigurationError("integration step must be positive");
  Trajectory traj;
  Vec x = system.wrap(x0);
  double t = 0.0;
  const Vec no_control = schedule.empty() ? Vec{} : Vec(schedule.front().control.size());
  traj.samples.push_back({0.0, x, schedule.empty() ? no_control : schedule.front().control});

  for (const auto& seg : schedule) {
    if (!(seg.duration > 0.0)) throw ConfigurationError("schedule durations must be positive");
    const auto n = static_cast<long>(std::ceil(seg.duration / step - 1e-9));
    const double dt = seg.duration / static_cast<double>(n);
    traj.samples.back().control = seg.control;
    double seg_cost = 0.0;
    const double seg_start = t;
    for (long i = 1; i <= n; ++i) {
      seg_cost += rk4_step_with_cost(system, x, seg.control, dt);
      t = (i == n) ? seg_start + seg.duration : seg_start + dt * static_cast<double>(i);
      traj.samples.push_back({t, x, seg.control});
      if (box && !box->contains(system.axes, x)) {
        traj.total_cost += seg_cost;
        traj.duration = t;
        throw DomainExitError("trajectory left the state box", std::move(traj));
      }
    }
    traj.total_cost += seg_cost;
  }
  traj.duration = t;
  return traj;
}

namespace {

Vec random_in_ball(const ControlSystem& system, const Vec& center, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec d(system.state_dim);
  double n2 = 0.0;
  while (n2 == 0.0) {
    for (std::size_t i = 0; i < system.state_dim; ++i) d[i] = normal(rng);
    n2 = dot(d, d);
  }
  const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(system.state_dim));
  return system.wrap(center + (r / std::sqrt(n2)) * d);
}

}  // namespace

RegularityEstimate estimate_regularity(const ControlSystem& system, const Vec& center, double radius,
                                       std::size_t samples, std::uint64_t seed) {
  RegularityEstimate est;
  est.min_speed = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  const auto consider = [&](const Vec& y) {
    for (const Vec& u : system.controls) {
      const Vec v = system.velocity(y, u);
      const double speed = norm(v);
      est.velocity_bound = std::max(est.velocity_bound, speed);
      if (speed > 1e-12) est.min_speed = std::min(est.min_speed, speed);
      est.cost_bound = std::max(est.cost_bound, system.running_cost(y, v));
    }
  };
  consider(center);
  for (std::size_t s = 0; s < samples; ++s) consider(random_in_ball(system, center, radius, rng));

  // Sampled Hausdorff excess of F(y) over F(z), relative to |y - z|.
  const std::size_t nu = system.controls.size();
  const std::size_t budget = 20'000'000;
  const std::size_t pairs = std::max<std::size_t>(1, std::min(samples, budget / std::max<std::size_t>(1, nu * nu)));
  std::vector<Vec> fy(nu), fz(nu);
  for (std::size_t p = 0; p < pairs; ++p) {
    const Vec y = random_in_ball(system, center, radius, rng);
    const Vec z = random_in_ball(system, center, radius, rng);
    const double dyz = system.distance(y, z);
    if (dyz < 1e-12) continue;
    for (std::size_t i = 0; i < nu; ++i) {
      fy[i] = system.velocity(y, system.controls[i]);
      fz[i] = system.velocity(z, system.controls[i]);
    }
    double excess = 0.0;
    for (const Vec& v : fy) {
      double closest = std::numeric_limits<double>::infinity();
      for (const Vec& w : fz) closest = std::min(closest, norm(v - w));
      excess = std::max(excess, closest);
    }
    est.lipschitz_bound = std::max(est.lipschitz_bound, excess / dyz);
  }
  if (!std::isfinite(est.min_speed)) est.min_speed = 0.0;
  return est;
}

double DirectionalityCertificate::shrink_factor(double t) const {
  const double lower_sq = 1.0 - t * hamiltonian_value / (target_radius * target_radius);
  const double lower = std::sqrt(std::max(0.0, lower_sq));
  return 0.5 * (lower + 1.0);
}

DirectionalityCertificate compute_certificate(const ControlSystem& system, const Vec& x, const Vec& xi, double r_star,
                                              std::size_t sample_count, std::uint64_t seed) {
  if (!(r_star > 0.0)) throw ConfigurationError("r* must be positive");
  const double xi_norm = norm(xi);
  if (xi_norm == 0.0) throw CertificateInfeasibleError("direction must be nonzero");

  DirectionalityCertificate cert;
  cert.anchor = x;
  cert.direction = xi;
  cert.target_radius = r_star;
  cert.target_point = x + (r_star / xi_norm) * xi;
  cert.hamiltonian_value = min_hamiltonian(system, x, cert.target_point - x);
  if (!(cert.hamiltonian_value > 0.0)) {
    throw CertificateInfeasibleError("minimal Hamiltonian is not positive in the requested direction");
  }

  const auto est = estimate_regularity(system, x, 2.0 * r_star, sample_count, seed);
  cert.velocity_bound = est.velocity_bound;
  cert.lipschitz_bound = est.lipschitz_bound;
  cert.cost_bound = est.cost_bound;
  cert.neighborhood_radius = kCertificateSafety * cert.hamiltonian_value /
                             (2.0 * (cert.velocity_bound + 3.0 * r_star * cert.lipschitz_bound));
  cert.horizon = kCertificateSafety * cert.neighborhood_radius / cert.velocity_bound;
  return cert;
}

}  // namespace kinoclear
