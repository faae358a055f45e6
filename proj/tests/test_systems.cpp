#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "kinoclear/errors.hpp"
#include "kinoclear/systems.hpp"

using namespace kinoclear;

TEST_CASE("builtin systems expose their sampled control sets") {
  const auto g = builtin_system("galaga");
  CHECK(g.state_dim == 2);
  CHECK(g.controls.size() == 32);
  CHECK(g.controls.front()[0] == -1.0);
  CHECK(g.controls.back()[0] == 1.0);
  CHECK(builtin_system("gen-galaga", 5).controls.size() == 25);
  const auto d = builtin_system("dubins");
  CHECK(d.axes[2].kind == AxisKind::circle);
  CHECK_FALSE(builtin_system("horizontal").convex_velocity_sets);
  CHECK_THROWS_AS(builtin_system("unicycle"), ConfigurationError);
  CHECK_THROWS_AS(builtin_system("galaga", 0), ConfigurationError);
}

TEST_CASE("angles wrap into the half-open period") {
  const double p = 2.0 * std::numbers::pi;
  CHECK(wrap_angle(std::numbers::pi, p) == doctest::Approx(-std::numbers::pi));
  CHECK(wrap_angle(3.0 * std::numbers::pi / 4.0 + p, p) == doctest::Approx(3.0 * std::numbers::pi / 4.0));
  const std::vector<AxisTopology> axes{AxisTopology::line(), AxisTopology::circle(p)};
  CHECK(state_distance(axes, Vec{0, 3.0}, Vec{0, -3.0}) == doctest::Approx(p - 6.0));
}

TEST_CASE("minimal Hamiltonian is positively homogeneous") {
  const auto g = builtin_system("galaga");
  const Vec x{0.3, -0.2};
  for (const Vec& xi : direction_fan(2, 16)) {
    const double h = min_hamiltonian(g, x, xi);
    CHECK(min_hamiltonian(g, x, 2.5 * xi) == doctest::Approx(2.5 * h));
    CHECK((h > 0.0) == (min_hamiltonian(g, x, 0.1 * xi) > 0.0));
  }
  // Closed form: min over u of <(u,1), (a,b)> = b - |a|.
  CHECK(min_hamiltonian(g, x, Vec{0.3, 1.0}) == doctest::Approx(0.7));
  const auto [dir, h] = best_direction(g, x);
  CHECK(h == doctest::Approx(1.0));
  CHECK(dir[1] == doctest::Approx(1.0));
}

TEST_CASE("RK4 reproduces the Dubins circle") {
  const auto d = builtin_system("dubins");
  const Vec u{1.0};
  Vec x{0.0, 0.0, 0.0};
  double cost = 0.0;
  for (int i = 0; i < 100; ++i) cost += rk4_step_with_cost(d, x, u, 0.01);
  // Unit-radius turn: (sin t, 1 - cos t, t).
  CHECK(x[0] == doctest::Approx(std::sin(1.0)).epsilon(1e-9));
  CHECK(x[1] == doctest::Approx(1.0 - std::cos(1.0)).epsilon(1e-9));
  CHECK(x[2] == doctest::Approx(1.0));
  CHECK(cost == doctest::Approx(1.0));
}

TEST_CASE("integration follows a schedule and reports domain exits") {
  const auto g = builtin_system("galaga");
  const std::vector<ScheduleSegment> sched{{Vec{1.0}, 0.5}, {Vec{-1.0}, 0.25}};
  const Trajectory t = integrate_trajectory(g, Vec{0.0, 0.0}, sched, 0.01);
  CHECK(t.samples.back().state[0] == doctest::Approx(0.25));
  CHECK(t.samples.back().state[1] == doctest::Approx(0.75));
  CHECK(t.total_cost == doctest::Approx(0.75));
  CHECK(t.duration == doctest::Approx(0.75));

  StateBox box;
  box.bounds = {{-1.0, 1.0}, {-1.0, 0.5}};
  try {
    (void)integrate_trajectory(g, Vec{0.0, 0.0}, sched, 0.01, box);
    FAIL("expected a domain exit");
  } catch (const DomainExitError& e) {
    CHECK(e.partial().samples.back().state[1] <= 0.5 + 1e-12);
  }
}

TEST_CASE("Galaga certificate constants match the closed form") {
  const auto g = builtin_system("galaga");
  const auto c = compute_certificate(g, Vec{-0.5, -1.0}, Vec{0.0, 1.0}, 0.3);
  CHECK(c.velocity_bound == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
  CHECK(c.lipschitz_bound == doctest::Approx(0.0));
  CHECK(c.hamiltonian_value == doctest::Approx(0.3));
  CHECK(c.horizon > 0.0);
  CHECK(c.target_point[1] == doctest::Approx(-0.7));
  for (double t : {c.horizon * 0.1, c.horizon}) {
    CHECK(c.shrink_factor(t) < 1.0);
    CHECK(c.shrink_factor(t) > 0.0);
  }
  CHECK_THROWS_AS(compute_certificate(g, Vec{0, 0}, Vec{1.0, 0.0}, 0.3), CertificateInfeasibleError);
  CHECK_THROWS_AS(compute_certificate(g, Vec{0, 0}, Vec{0.0, 0.0}, 0.3), CertificateInfeasibleError);
}

TEST_CASE("horizontal system has no strictly positive direction") {
  const auto h = builtin_system("horizontal");
  for (const Vec& xi : direction_fan(2, 64)) CHECK(min_hamiltonian(h, Vec{0, 0}, xi) <= 1e-9);
}
