#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "risuav/error.hpp"
#include "risuav/experiments.hpp"

namespace fs = std::filesystem;
using namespace risuav;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iter;
  std::optional<double> tol;
  int jobs = 1;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_jobs) {
  cmd->add_option("--config", f.config, "INI configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "output directory")->required();
  cmd->add_option("--seed", f.seed, "override solver.rng_seed");
  cmd->add_option("--max-iter", f.max_iter, "override solver.max_iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "override solver.convergence_tol")->check(CLI::PositiveNumber);
  if (with_jobs) cmd->add_option("--jobs", f.jobs, "parallel sweep cells")->check(CLI::Range(1, 256));
}

Configuration load(const CommonFlags& f) {
  Configuration cfg = load_scenario(f.config);
  if (f.seed) cfg.controls.rng_seed = *f.seed;
  if (f.max_iter) cfg.controls.max_iterations = *f.max_iter;
  if (f.tol) cfg.controls.convergence_tol = *f.tol;
  validate(cfg);
  return cfg;
}

int run_command(const std::string& name, const CommonFlags& f) {
  const Configuration cfg = load(f);
  const SweepOptions opt{f.jobs};
  if (name == "run") {
    const RunOutcome o = run_scenario(cfg, f.out);
    std::cout << "status " << to_string(o.status) << ", P_total " << format_number(o.p_total) << " W, energy "
              << format_number(o.energy_used) << " J of " << format_number(o.energy_budget) << " J\n";
    const int code = exit_code_for(o.status);
    if (code != exit_ok) std::cerr << "error: " << to_string(o.status) << ": " << o.message << '\n';
    return code;
  }
  int code = exit_ok;
  if (name == "sweep-users") code = sweep_users_rates(cfg, f.out, opt);
  if (name == "sweep-ris") code = sweep_ris_positions(cfg, f.out, opt);
  if (name == "sweep-energy") code = sweep_energy_budget(cfg, f.out, opt);
  std::cout << "sweep written to " << f.out << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RIS-assisted UAV relay: joint trajectory and power optimization"};
  app.require_subcommand(1);

  CommonFlags flags;
  CLI::App* run = app.add_subcommand("run", "optimize one scenario and write its tables");
  CLI::App* users = app.add_subcommand("sweep-users", "UE count by rate target grid");
  CLI::App* ris = app.add_subcommand("sweep-ris", "RIS positions with randomized rate targets");
  CLI::App* energy = app.add_subcommand("sweep-energy", "energy-budget multipliers");
  add_common(run, flags, false);
  add_common(users, flags, true);
  add_common(ris, flags, true);
  add_common(energy, flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_input_error;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return run_command(name, flags);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_input_error;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_input_error;
  } catch (const DomainError& e) {
    std::cerr << "error: infeasible scenario: " << e.what() << '\n';
    return exit_infeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_solver_failure;
  }
}
