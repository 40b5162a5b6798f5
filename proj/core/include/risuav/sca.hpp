#pragma once

#include <string>
#include <vector>

#include "risuav/controls.hpp"
#include "risuav/geometry.hpp"
#include "risuav/link_budget.hpp"
#include "risuav/scenario.hpp"

namespace risuav {

/// Waypoints z[0..N] at the fixed UAV height and velocities v[1..N], stored
/// 0-based so that z[n + 1] = z[n] + tau * v[n]. Step n communicates from
/// z[n + 1].
struct Trajectory {
  std::vector<Vec2> z;
  std::vector<Vec2> v;
  double tau = 1.0;

  int steps() const { return static_cast<int>(v.size()); }
  const Vec2& position(int n) const { return z[static_cast<std::size_t>(n) + 1]; }
  double path_length() const;
  double max_deviation_from(const Vec2& a, const Vec2& b) const;  // distance to the segment ab
};

/// Transmit powers in watts, indexed [k][n] for the UAV links.
struct PowerSchedule {
  std::vector<double> p_bs;
  std::vector<std::vector<double>> p_direct;
  std::vector<std::vector<double>> p_ris;

  double total() const;
  double step_total(int n) const;
};

enum class RunStatus { converged, max_iter, infeasible, numerical_failure };

const char* to_string(RunStatus status);

/// Slack variables and bookkeeping of the alternating scheme.
struct SCAState {
  std::vector<std::vector<double>> lambda_direct;  // [k][n], m^2
  std::vector<std::vector<double>> lambda_ris;     // [k][n], m^2
  std::vector<double> mu;                          // [n], m^2
  std::vector<double> pi;                          // [n], m/s
  int iteration = 0;
  std::vector<double> p_total_history;
  RunStatus status = RunStatus::max_iter;
  std::string message;
  std::string violated_family;
};

struct IterationRecord {
  int iteration = 0;
  double p_total = 0.0;
  double max_violation = 0.0;
  double trust_radius = 0.0;
};

/// Constant-velocity straight path with tight slacks.
void init_straight_trajectory(const ScenarioConfig& s, Trajectory& traj, SCAState& state);

/// Squared 3-D distances from the UAV at every step; used for tight slacks.
void tighten_slacks(const ScenarioConfig& s, const Trajectory& traj, SCAState& state);

/// First-order under-estimator of log2(1 + hat/lambda) around lambda_j.
double rate_lower_bound(double hat_gamma, double lambda, double lambda_j);
double capacity_lower_bound(double hat_gamma, double mu, double mu_j);
/// First-order under-estimator of |v|^2 around v_j.
double velocity_lower_bound(const Vec2& v, const Vec2& v_j);
/// First-order over-estimator of log2(1 + p * kappa) around p_j.
double power_upper_bound(double p, double p_j, double kappa);

struct SubproblemResult {
  bool ok = false;
  bool infeasible = false;
  std::string violated_family;
  std::string diagnostics;
  double max_residual = 0.0;
};

/// Per-step power control with the trajectory frozen.
struct PowerStepInput {
  double kappa_bu = 0.0;
  std::vector<double> kappa_direct, kappa_ris;
  std::vector<double> r_min;
  bool tie_link_powers = false;
  double p_bs_max = 0.0;   // inf for none
  double p_uav_max = 0.0;  // inf for none
};

struct PowerStepOutput {
  SubproblemResult result;
  double p_bs = 0.0;
  std::vector<double> p_direct, p_ris;
  int inner_iterations = 0;
};

PowerStepOutput solve_power_step(const PowerStepInput& in, const SimControls& controls);

/// Smallest p_direct + p_ris meeting a rate target over two parallel links
/// (water-filling, or the common power when the links are tied).
struct LinkPair {
  double p_direct = 0.0;
  double p_ris = 0.0;
};
LinkPair min_power_pair(double kappa_direct, double kappa_ris, double rate_target, bool tied);

PowerStepInput power_step_input(const ScenarioConfig& s, const Vec2& uav_xy);

/// Solves every step's power control along the trajectory.
PowerSchedule solve_power_subproblem(const ScenarioConfig& s, const Trajectory& traj, const SimControls& controls,
                                     SubproblemResult& result);

/// One convexified trajectory step around (traj_j, state_j) with frozen
/// powers. `trust_radius` bounds every waypoint move.
SubproblemResult solve_trajectory_subproblem(const ScenarioConfig& s, const EnergyParams& e,
                                             const SimControls& controls, const PowerSchedule& powers,
                                             const Trajectory& traj_j, const SCAState& state_j, double trust_radius,
                                             Trajectory& traj_out, SCAState& state_out);

/// Exact (non-linearized) constraint check of a complete solution; values are
/// relative violations, 0 when satisfied.
struct FeasibilityReport {
  double rate = 0.0;          // per-UE minimum rate
  double backhaul = 0.0;      // capacity covers aggregate rate
  double energy = 0.0;        // flight energy budget
  double kinematics = 0.0;    // position update
  double speed = 0.0;
  double acceleration = 0.0;
  double endpoints = 0.0;
  double phase = 0.0;         // unit-modulus RIS elements
  double max() const;
  std::string worst() const;
};

FeasibilityReport check_feasibility(const ScenarioConfig& s, const EnergyParams& e, const Trajectory& traj,
                                    const PowerSchedule& powers);

RISPhaseProfile optimal_phase_profile(const ScenarioConfig& s, const Trajectory& traj);

struct OptimizationResult {
  Trajectory trajectory;
  PowerSchedule powers;
  RISPhaseProfile phases;
  SCAState state;
  std::vector<Trajectory> iterates;  // accepted trajectories, straight line first
  std::vector<IterationRecord> trace;
  double energy_budget = 0.0;
  double energy_used = 0.0;
};

OptimizationResult run_joint_optimization(const ScenarioConfig& s, const EnergyParams& e,
                                          const SimControls& controls);

}  // namespace risuav
