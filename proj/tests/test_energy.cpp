#include <doctest.h>

#include <cmath>
#include <vector>

#include "risuav/energy.hpp"
#include "risuav/error.hpp"

using namespace risuav;

namespace {

// Independent arithmetic from the rotor constants, written out term by term.
double rotor_oracle(double v) {
  const double p0 = 79.86, pi_ = 88.63, v0 = 4.03, omega = 300.0, r = 0.4;
  const double d0 = 0.3, rho = 1.225, sol = 0.05, area = 0.503;
  return p0 * (1.0 + 3.0 * v * v / (omega * omega * r * r)) + pi_ * v0 / v + 0.5 * d0 * rho * sol * area * v * v * v;
}

}  // namespace

TEST_CASE("propulsion power at cruise speeds") {
  const EnergyParams e;
  CHECK(propulsion_power(10.0, e, 0.1) == doctest::Approx(rotor_oracle(10.0)).epsilon(1e-12));
  CHECK(propulsion_power(20.0, e, 0.1) == doctest::Approx(rotor_oracle(20.0)).epsilon(1e-12));
  CHECK(propulsion_power(10.0, e, 0.1) == doctest::Approx(121.86).epsilon(1e-4));
  CHECK(propulsion_power(20.0, e, 0.1) == doctest::Approx(141.35).epsilon(1e-4));
}

TEST_CASE("hover guard") {
  const EnergyParams e;
  CHECK_THROWS_AS(propulsion_power(0.05, e, 0.1), DomainError);
  CHECK_THROWS_AS(propulsion_power_slack(5.0, 0.05, e, 0.1), DomainError);
  CHECK(std::isfinite(propulsion_power_slack(0.1, 0.1, e, 0.1)));
}

TEST_CASE("speed slack") {
  const EnergyParams e;
  for (double v : {0.5, 3.0, 12.0, 19.0}) {
    CHECK(propulsion_power_slack(v, v, e, 0.1) == doctest::Approx(propulsion_power(v, e, 0.1)));
    CHECK(propulsion_power_slack(v, 0.8 * v, e, 0.1) >= propulsion_power(v, e, 0.1));
  }
}

TEST_CASE("trajectory energy") {
  const EnergyParams e;
  const std::vector<Vec2> line(50, Vec2(10.0 / std::sqrt(2.0), 10.0 / std::sqrt(2.0)));
  CHECK(trajectory_energy(line, 1.0, e, 0.1) == doctest::Approx(50 * rotor_oracle(10.0)).epsilon(1e-12));
  CHECK(trajectory_energy(line, 1.0, e, 0.1) == doctest::Approx(6093.0).epsilon(1e-3));

  const std::vector<Vec2> one{Vec2(3.0, 4.0)};
  const std::vector<Vec2> two{Vec2(3.0, 4.0), Vec2(3.0, 4.0)};
  CHECK(trajectory_energy(two, 1.0, e, 0.1) == 2.0 * trajectory_energy(one, 1.0, e, 0.1));
  CHECK(trajectory_energy(two, 2.0, e, 0.1) == 2.0 * trajectory_energy(two, 1.0, e, 0.1));
  CHECK_THROWS_AS(trajectory_energy({Vec2(0.0, 0.0)}, 1.0, e, 0.1), DomainError);
}

TEST_CASE("straight-line reference energy") {
  const EnergyParams e;
  ScenarioConfig s;
  const double speed = std::sqrt(2.0) * 500.0 / 50.0;
  CHECK(speed == doctest::Approx(14.14).epsilon(1e-3));
  CHECK(straight_line_min_energy(s, e) == doctest::Approx(50.0 * rotor_oracle(speed)).epsilon(1e-12));
  CHECK(straight_line_min_energy(s, e) == doctest::Approx(6076.0).epsilon(1e-3));

  s.uav_end = s.uav_start;
  CHECK_THROWS_AS(straight_line_min_energy(s, e), DomainError);
}

TEST_CASE("propulsion power is convex on the operating range") {
  const EnergyParams e;
  for (double a = 0.1; a <= 30.0; a += 0.37)
    for (double b = a + 0.29; b <= 30.0; b += 1.13) {
      const double mid = propulsion_power(0.5 * (a + b), e, 0.1);
      CHECK(mid <= 0.5 * (propulsion_power(a, e, 0.1) + propulsion_power(b, e, 0.1)) + 1e-12);
    }
}
