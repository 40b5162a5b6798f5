#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "risuav/controls.hpp"

namespace risuav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

struct Rect {
  double x_min = 0.0, y_min = 0.0, x_max = 500.0, y_max = 500.0;
  bool operator==(const Rect&) const = default;
};

/// Uniform planar array: element counts along x and y.
struct ArrayGrid {
  int x = 1, y = 1;
  int count() const { return x * y; }
  bool operator==(const ArrayGrid&) const = default;
};

struct Spacing {
  double x = 0.005, y = 0.005;
  bool operator==(const Spacing&) const = default;
};

/// Geometry, radio, kinematic and budget parameters of one deployment.
/// Lengths in metres, powers in watts; dB quantities are kept in dB and
/// converted through the accessors below.
struct ScenarioConfig {
  Rect area;
  std::vector<Vec2> ue_positions{{20.0, 450.0}, {250.0, 0.0}, {500.0, 200.0}};
  Vec2 bs_position{0.0, 0.0};
  double bs_height = 15.0;
  Vec2 ris_position{250.0, 250.0};
  double ris_height = 10.0;
  Vec2 uav_start{0.0, 0.0};
  Vec2 uav_end{500.0, 500.0};
  double uav_height = 20.0;

  int n_steps = 50;
  double tau = 1.0;
  double v_max = 20.0;
  double v_acc = 4.0;
  double pi_min = 0.1;

  std::vector<double> r_min{0.257, 0.257, 0.257};  // bits/s/Hz, one per UE
  double energy_budget_multiplier = 1.5;

  double alpha0_db = -61.0;
  double noise_dbm = -174.0;
  double carrier_wavelength = 0.01;

  ArrayGrid bs_grid{4, 4};
  ArrayGrid uav_grid{4, 4};
  ArrayGrid ris_grid{10, 10};
  Spacing bs_spacing, uav_spacing, ris_spacing;

  bool per_hop_path_loss = false;  // alpha0 on each hop of the RIS cascade
  bool tie_link_powers = false;    // force P_{k,1} = P_{k,2}
  double p_bs_max_w = std::numeric_limits<double>::infinity();
  double p_uav_max_w = std::numeric_limits<double>::infinity();  // per UE and link

  int num_ues() const { return static_cast<int>(ue_positions.size()); }
  double alpha0() const;   // amplitude gain at 1 m
  double noise_w() const;  // sigma^2 in watts

  Vec3 bs() const { return {bs_position.x(), bs_position.y(), bs_height}; }
  Vec3 ris() const { return {ris_position.x(), ris_position.y(), ris_height}; }
  Vec3 ue(int k) const;
  Vec3 uav(const Vec2& xy) const { return {xy.x(), xy.y(), uav_height}; }

  bool operator==(const ScenarioConfig&) const = default;
};

/// Rotary-wing propulsion parameters.
struct EnergyParams {
  double omega = 300.0;           // blade angular velocity, rad/s
  double rotor_radius = 0.4;      // m
  double air_density = 1.225;     // kg/m^3
  double rotor_solidity = 0.05;
  double rotor_disc_area = 0.503;
  double induced_velocity = 4.03; // mean rotor induced velocity in hover, m/s
  double fuselage_drag = 0.3;     // fuselage drag ratio
  double blade_power = 79.86;     // W
  double induced_power = 88.63;   // W

  bool operator==(const EnergyParams&) const = default;
};

/// Parameter grids for the batch experiments.
struct SweepPlan {
  std::vector<int> k_list{1, 2, 3, 4, 5, 6};
  std::vector<double> r_list{0.057, 0.257, 0.557, 0.757};
  std::vector<Vec2> ris_list{{250.0, 250.0}, {100.0, 400.0}, {400.0, 100.0}, {50.0, 50.0}, {1500.0, 1500.0}};
  std::vector<double> multipliers{1.0, 1.2, 1.5, 2.0};
  int draws = 50;
  double draw_min = 0.01;
  double draw_max = 0.757;

  bool operator==(const SweepPlan&) const = default;
};

struct Configuration {
  ScenarioConfig scenario;
  EnergyParams energy;
  SimControls controls;
  SweepPlan sweep;
};

/// Default deployment: three ground users, BS at the origin, UAV flying the
/// area diagonal, plus documented choices for array sizes, wavelength and
/// time grid.
Configuration baseline_scenario();

/// Throws ValidationError naming the first offending field.
void validate(const Configuration& config);

/// Reads an INI-style file with [scenario], [energy], [solver] and optional
/// [sweep] sections. Values are JSON literals (numbers, booleans, arrays,
/// quoted strings) or `inf`. Missing keys take the baseline defaults.
Configuration load_scenario(const std::filesystem::path& path);
Configuration parse_scenario(const std::string& text);

/// Emits every key, so the output loads back to an identical configuration.
std::string serialize(const Configuration& config);

}  // namespace risuav
