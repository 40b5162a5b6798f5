#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "risuav/scenario.hpp"
#include "risuav/sca.hpp"

namespace risuav {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  exit_ok = 0,
  exit_infeasible = 1,
  exit_input_error = 2,
  exit_solver_failure = 3,
};

int exit_code_for(RunStatus status);

/// A CSV table held as text cells so that what is rendered is exactly what
/// was written.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
  static CsvTable parse(const std::string& text);
  std::size_t column(const std::string& name) const;  // throws if absent
  double number(std::size_t row, const std::string& name) const;
};

/// Shortest decimal form that reads back to the same double; "" for NaN.
std::string format_number(double value);

/// Writes `content` through a temporary sibling and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Tables produced by one optimization run.
struct RunTables {
  CsvTable trajectory;  // n, x, y, vx, vy, speed, propulsion_W
  CsvTable power;       // n, p_bs, p_<k>_direct..., p_<k>_ris...
  CsvTable iterations;  // j, p_total, violation, trust_radius
  CsvTable summary;     // status, P_total, energy_J, iterations, energy_budget_J, message
  CsvTable iterates;    // j, n, x, y (every accepted trajectory, straight line first)
  CsvTable nodes;       // kind, index, x, y
};

RunTables tabulate(const ScenarioConfig& s, const EnergyParams& e, const OptimizationResult& r);

/// SVG overlay of all iterates, straight line lightest and the final path
/// darkest, with BS, RIS and UE markers. Depends only on the two tables.
std::string render_iterates_svg(const CsvTable& iterates, const CsvTable& nodes);

/// Overlays one final path per labelled run (label, n, x, y).
std::string render_paths_svg(const CsvTable& paths, const CsvTable& nodes);

/// Optimizes one configuration and writes its tables and trajectory.svg into
/// `out_dir`. The directory appears atomically once every file is complete.
struct RunOutcome {
  RunStatus status = RunStatus::max_iter;
  double p_total = 0.0;
  double avg_p_los = 0.0;
  double avg_p_ris = 0.0;
  double path_length = 0.0;
  double energy_used = 0.0;
  double energy_budget = 0.0;
  std::string message;
  CsvTable final_path;  // n, x, y
};

RunOutcome run_scenario(const Configuration& config, const std::filesystem::path& out_dir);

struct SweepOptions {
  int jobs = 1;
};

/// Runs every cell even when some are infeasible. Returns exit_solver_failure
/// if any cell hit a numerical failure and exit_ok otherwise.
int sweep_users_rates(const Configuration& base, const std::filesystem::path& out_dir, const SweepOptions& opt);
int sweep_ris_positions(const Configuration& base, const std::filesystem::path& out_dir, const SweepOptions& opt);
int sweep_energy_budget(const Configuration& base, const std::filesystem::path& out_dir, const SweepOptions& opt);

/// Seeded uniform UE placement inside the service area, used for every UE
/// count other than the three baseline users.
std::vector<Vec2> seeded_ue_positions(const Rect& area, int count, std::uint64_t seed);

/// Seeded i.i.d. uniform per-UE rate targets in [lo, hi].
std::vector<std::vector<double>> seeded_rate_draws(int draws, int num_ues, double lo, double hi, std::uint64_t seed);

}  // namespace risuav
