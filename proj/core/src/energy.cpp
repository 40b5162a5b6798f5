#include "risuav/energy.hpp"

#include <string>

#include "risuav/error.hpp"

namespace risuav {

PropulsionTerms propulsion_terms(const EnergyParams& e) {
  PropulsionTerms t;
  t.blade = e.blade_power;
  t.blade_quad = 3.0 * e.blade_power / (e.omega * e.omega * e.rotor_radius * e.rotor_radius);
  t.induced = e.induced_power * e.induced_velocity;
  t.parasite = 0.5 * e.fuselage_drag * e.air_density * e.rotor_solidity * e.rotor_disc_area;
  return t;
}

double propulsion_power_slack(double speed, double pi_slack, const EnergyParams& e, double floor) {
  if (!(pi_slack >= floor) || !(floor > 0.0))
    throw DomainError("speed slack " + std::to_string(pi_slack) + " m/s is below the hover guard " +
                      std::to_string(floor) + " m/s");
  const PropulsionTerms t = propulsion_terms(e);
  return t.blade + t.blade_quad * speed * speed + t.induced / pi_slack + t.parasite * speed * speed * speed;
}

double propulsion_power(double speed, const EnergyParams& e, double floor) {
  if (!(speed >= floor))
    throw DomainError("speed " + std::to_string(speed) + " m/s is below the hover guard " + std::to_string(floor) +
                      " m/s");
  return propulsion_power_slack(speed, speed, e, floor);
}

double trajectory_energy(const std::vector<Vec2>& velocities, double tau, const EnergyParams& e, double floor) {
  double sum = 0.0;
  for (const Vec2& v : velocities) sum += propulsion_power(v.norm(), e, floor) * tau;
  return sum;
}

double straight_line_min_energy(const ScenarioConfig& s, const EnergyParams& e) {
  const double duration = s.n_steps * s.tau;
  const double speed = (s.uav_end - s.uav_start).norm() / duration;
  if (speed < s.pi_min || speed > s.v_max)
    throw DomainError("straight-line speed " + std::to_string(speed) + " m/s lies outside [pi_min, v_max]");
  return propulsion_power(speed, e, s.pi_min) * duration;
}

}  // namespace risuav
