#pragma once

#include <cstdint>
#include <string>

namespace risuav {

/// What the trajectory step minimizes once powers are frozen.
enum class TrajectoryObjective {
  power_sensitivity,  // squared-distance slacks weighted by d(P_total)/d(slack)
  slack_distance,     // squared-distance slacks with the fixed weights below
  propulsion,         // propulsion energy of the path
};

const char* to_string(TrajectoryObjective objective);
TrajectoryObjective trajectory_objective_from_string(const std::string& name);

/// Iteration limits, tolerances and safeguards shared by the optimizer and the
/// conic backend.
struct SimControls {
  int max_iterations = 30;         // outer alternating iterations (J_max)
  double convergence_tol = 1e-3;   // relative P_total change that ends the outer loop
  double solver_tol = 1e-6;        // feasibility tolerance for subproblem solutions
  std::uint64_t rng_seed = 1;

  int inner_max_iterations = 20;   // power-control SCA iterations per outer step
  double trust_radius = 50.0;      // metres, per-waypoint move limit of a trajectory step
  double trust_shrink = 0.5;
  int trust_retries = 3;
  double power_margin = 1.0;       // relative extra power the trajectory step may assume

  TrajectoryObjective trajectory_objective = TrajectoryObjective::power_sensitivity;
  double weight_direct = 1.0;      // weight of lambda_{k,1} (slack_distance only)
  double weight_ris = 1.0;         // weight of lambda_{k,2}
  double weight_bs = 1.0;          // weight of mu
};

}  // namespace risuav
