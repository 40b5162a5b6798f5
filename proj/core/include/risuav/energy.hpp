#pragma once

#include <vector>

#include "risuav/scenario.hpp"

namespace risuav {

/// Rotary-wing propulsion power in watts at forward speed `speed`. The
/// induced term diverges at hover, so speeds below `floor` are rejected.
double propulsion_power(double speed, const EnergyParams& e, double floor);

/// Same model with the induced term evaluated at the speed slack `pi_slack`
/// instead of the speed itself.
double propulsion_power_slack(double speed, double pi_slack, const EnergyParams& e, double floor);

/// Coefficients of P(v) = blade + blade_quad*v^2 + induced/v + parasite*v^3.
struct PropulsionTerms {
  double blade = 0.0;
  double blade_quad = 0.0;
  double induced = 0.0;
  double parasite = 0.0;
};

PropulsionTerms propulsion_terms(const EnergyParams& e);

/// Sum of propulsion_power(|v_n|) * tau over the velocity slots.
double trajectory_energy(const std::vector<Vec2>& velocities, double tau, const EnergyParams& e, double floor);

/// Energy of the constant-velocity straight path between the endpoints.
double straight_line_min_energy(const ScenarioConfig& s, const EnergyParams& e);

}  // namespace risuav
