// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "risuav/energy.hpp"
#include "risuav/experiments.hpp"
#include "risuav/geometry.hpp"
#include "risuav/link_budget.hpp"
#include "risuav/sca.hpp"

using namespace risuav;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const std::string& title, double limit_s, const std::function<Verdict()>& body) {
  const auto t0 = Clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) {
    v.pass = false;
    v.detail += "; over the " + format_number(limit_s) + " s limit";
  }
  if (!v.pass) ++failures;
  std::printf("%s criterion %d: %s (%s) [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", xs[i]);
    out += (i ? ", " : "") + std::string(buf);
  }
  return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

ScenarioConfig random_geometry(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> xy(0.0, 500.0);
  ScenarioConfig s;
  for (Vec2& p : s.ue_positions) p = {xy(rng), xy(rng)};
  s.ris_position = {xy(rng), xy(rng)};
  s.bs_position = {xy(rng), xy(rng)};
  return s;
}

Verdict beamforming_identities() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> xy(0.0, 500.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const ScenarioConfig s = random_geometry(rng);
    const Vec2 uav(xy(rng), xy(rng));
    const ChannelSet ch = build_channels(s, uav);
    const LinkAngles la = link_angles(s, uav);
    const double mb = std::sqrt(static_cast<double>(s.bs_grid.count()));
    const double mu = std::sqrt(static_cast<double>(s.uav_grid.count()));
    const double mr = static_cast<double>(s.ris_grid.count());

    worst = std::max(worst, rel(std::abs(ch.h_bu.dot(mrt_beamformer(ch.h_bu))), mb * s.alpha0() / ch.d_bu));
    for (int k = 0; k < s.num_ues(); ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const CVector& h = ch.h_ug[kk];
      worst = std::max(worst, rel(std::abs(h.dot(mrt_beamformer(h))), mu * s.alpha0() / ch.d_ug[kk]));
      const CVector casc = cascade_channel(ch, ris_phase_matrix(optimal_ris_phase(la, s, k)), k).adjoint();
      const double closed = mu * mr * s.alpha0() / (ch.d_rg[kk] * ch.d_ur);
      worst = std::max(worst, rel(std::abs(casc.dot(mrt_beamformer(casc))), closed));
    }
  }
  return {worst <= 1e-9, "1000 geometries, worst relative error " + format_number(worst)};
}

Verdict phase_oracle() {
  constexpr int kGrid = 64;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> xy(0.0, 500.0);
  std::vector<std::complex<double>> turn(kGrid);
  for (int a = 0; a < kGrid; ++a) turn[static_cast<std::size_t>(a)] = std::polar(1.0, a * 2 * pi / kGrid);
  double min_margin = INFINITY;
  for (int t = 0; t < 100; ++t) {
    ScenarioConfig s = random_geometry(rng);
    s.ris_grid = {2, 2};
    const Vec2 uav(xy(rng), xy(rng));
    const ChannelSet ch = build_channels(s, uav);
    const int k = t % s.num_ues();
    const auto kk = static_cast<std::size_t>(k);
    // element contributions to the cascade gain, each phase rotating one term
    const CRowVector row = ch.h_rg[kk].adjoint();
    const CVector w = ch.h_ur * mrt_beamformer(ch.h_ur.row(0).adjoint());
    std::array<std::complex<double>, 4> c{};
    double total = 0.0;
    for (int m = 0; m < 4; ++m) {
      c[static_cast<std::size_t>(m)] = row(m) * w(m);
      total += std::abs(c[static_cast<std::size_t>(m)]);
    }
    double best = 0.0;
    // element 0 stays at phase zero since a common rotation leaves the modulus unchanged
    for (int a = 0; a < kGrid; ++a)
      for (int b = 0; b < kGrid; ++b)
        for (int d = 0; d < kGrid; ++d)
          best = std::max(best, std::abs(c[0] + c[1] * turn[static_cast<std::size_t>(a)] +
                                         c[2] * turn[static_cast<std::size_t>(b)] +
                                         c[3] * turn[static_cast<std::size_t>(d)]));
    const Eigen::VectorXd phi = optimal_ris_phase(link_angles(s, uav), s, k);
    std::complex<double> sum{};
    for (int m = 0; m < 4; ++m) sum += c[static_cast<std::size_t>(m)] * std::polar(1.0, phi(m));
    const double closed = std::abs(sum);
    const double resolution = total * (1.0 - std::cos(pi / kGrid));
    min_margin = std::min(min_margin, (closed - (best - resolution)) / best);
  }
  return {min_margin >= 0.0, "100 geometries, 64-point grid, min relative margin " + format_number(min_margin)};
}

Verdict bound_validity() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) { return std::pow(10.0, lo + (hi - lo) * u(rng)); };
  int violations = 0;
  double tight = 0.0;
  constexpr int kSamples = 10000;
  for (int t = 0; t < kSamples; ++t) {
    const double hat = log_uniform(-3, 8), lj = log_uniform(0, 5);
    const double lam = lj * log_uniform(-2, 2);
    const double exact = std::log2(1.0 + hat / lam);
    if (rate_lower_bound(hat, lam, lj) > exact + 1e-12 * (1 + exact)) ++violations;
    if (capacity_lower_bound(hat, lam, lj) > exact + 1e-12 * (1 + exact)) ++violations;
    const double at_r = std::log2(1.0 + hat / lj);
    tight = std::max(tight, rel(rate_lower_bound(hat, lj, lj), at_r));
    tight = std::max(tight, rel(capacity_lower_bound(hat, lj, lj), at_r));

    const Vec2 v(40 * u(rng) - 20, 40 * u(rng) - 20), vj(40 * u(rng) - 20, 40 * u(rng) - 20);
    if (velocity_lower_bound(v, vj) > v.squaredNorm() + 1e-12 * (1 + v.squaredNorm())) ++violations;
    tight = std::max(tight, std::abs(velocity_lower_bound(vj, vj) - vj.squaredNorm()) / (1 + vj.squaredNorm()));
  }
  for (int t = 0; t < kSamples; ++t) {
    const double kappa = log_uniform(6, 13), pj = log_uniform(-14, -6);
    const double p = pj * log_uniform(-3, 3);
    const double exact = std::log2(1.0 + p * kappa);
    if (power_upper_bound(p, pj, kappa) < exact - 1e-12 * (1 + exact)) ++violations;
    tight = std::max(tight, rel(power_upper_bound(pj, pj, kappa), std::log2(1.0 + pj * kappa)));
  }
  return {violations == 0 && tight <= 1e-9, std::to_string(violations) + " violations over " +
                                                 std::to_string(kSamples) + " points per family, worst gap at "
                                                 "the expansion point " + format_number(tight)};
}

double rotor_oracle(double v) {
  const double p0 = 79.86, pi_ = 88.63, v0 = 4.03, omega = 300.0, r = 0.4;
  const double d0 = 0.3, rho = 1.225, sol = 0.05, area = 0.503;
  return p0 * (1.0 + 3.0 * v * v / (omega * omega * r * r)) + pi_ * v0 / v + 0.5 * d0 * rho * sol * area * v * v * v;
}

Verdict energy_model() {
  const EnergyParams e;
  const double p10 = propulsion_power(10.0, e, 0.1), p20 = propulsion_power(20.0, e, 0.1);
  const double err = std::max(rel(p10, rotor_oracle(10.0)), rel(p20, rotor_oracle(20.0)));
  bool near = std::abs(p10 - 121.86) < 0.01 && std::abs(p20 - 141.35) < 0.01;
  int convexity = 0;
  for (double a = 0.1; a <= 30.0; a += 0.1)
    for (double b = a + 0.1; b <= 30.0; b += 0.1)
      if (propulsion_power(0.5 * (a + b), e, 0.1) >
          0.5 * (propulsion_power(a, e, 0.1) + propulsion_power(b, e, 0.1)) + 1e-12)
        ++convexity;
  char buf[160];
  std::snprintf(buf, sizeof buf, "P(10) = %.2f W, P(20) = %.2f W, oracle error %.1e, %d convexity breaks", p10, p20,
                err, convexity);
  return {err <= 1e-9 && near && convexity == 0, buf};
}

struct Baseline {
  OptimizationResult result;
  bool ran = false;
};

Baseline baseline;

Verdict baseline_run() {
  const ScenarioConfig s;
  const EnergyParams e;
  const SimControls c;
  baseline.result = run_joint_optimization(s, e, c);
  baseline.ran = true;
  const OptimizationResult& r = baseline.result;
  const auto& h = r.state.p_total_history;
  bool monotone = h.size() >= 2;
  for (std::size_t j = 1; j < h.size(); ++j) monotone = monotone && h[j] <= h[j - 1] * (1 + c.solver_tol);
  const FeasibilityReport f = check_feasibility(s, e, r.trajectory, r.powers);
  const bool ok = r.state.status == RunStatus::converged && r.state.iteration <= c.max_iterations && monotone &&
                  f.max() <= 1e-6;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s after %d iterations, P_total %.4g -> %.4g W, %s, worst constraint residual %.1e",
                to_string(r.state.status), r.state.iteration, h.front(), h.back(),
                monotone ? "monotone" : "not monotone", f.max());
  return {ok, buf};
}

double avg_link(const std::vector<std::vector<double>>& p) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& row : p)
    for (double x : row) {
      sum += x;
      ++n;
    }
  return n ? sum / static_cast<double>(n) : 0.0;
}

bool nondecreasing(const std::vector<double>& xs, double tol) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i] < xs[i - 1] * (1 - tol)) return false;
  return true;
}

void ordinal() {
  const ScenarioConfig base;
  const EnergyParams e;
  const SimControls c;
  if (!baseline.ran) baseline.result = run_joint_optimization(base, e, c);
  const OptimizationResult& b = baseline.result;

  report(6, "(a) RIS-link power below LoS-link power on the baseline", 0, [&] {
    const double los = avg_link(b.powers.p_direct), ris = avg_link(b.powers.p_ris);
    return Verdict{ris < los, "avg RIS " + join({ris}) + " W, avg LoS " + join({los}) + " W"};
  });

  const std::vector<double> rates{0.057, 0.257, 0.557, 0.757};
  std::vector<OptimizationResult> by_rate;
  for (double r : rates) {
    if (r == base.r_min.front()) {
      by_rate.push_back(b);
      continue;
    }
    ScenarioConfig s = base;
    s.r_min.assign(3, r);
    by_rate.push_back(run_joint_optimization(s, e, c));
  }
  report(6, "(b) total power nondecreasing in the rate target", 0, [&] {
    std::vector<double> p;
    bool ok = true;
    for (const auto& r : by_rate) {
      p.push_back(r.powers.total());
      ok = ok && r.state.status == RunStatus::converged;
    }
    return Verdict{ok && nondecreasing(p, 1e-6), "R_min 0.057..0.757 -> P_total " + join(p) + " W"};
  });

  const std::vector<double> mults{1.0, 1.2, 1.5, 2.0};
  std::vector<double> lengths;
  bool mult_ok = true;
  for (double m : mults) {
    if (m == base.energy_budget_multiplier) {
      lengths.push_back(b.trajectory.path_length());
      continue;
    }
    ScenarioConfig s = base;
    s.energy_budget_multiplier = m;
    const OptimizationResult r = run_joint_optimization(s, e, c);
    mult_ok = mult_ok && r.state.status == RunStatus::converged;
    lengths.push_back(r.trajectory.path_length());
  }
  report(6, "(c) path length nondecreasing in the energy-budget multiplier", 0, [&] {
    return Verdict{mult_ok && nondecreasing(lengths, 1e-6), "multiplier 1.0..2.0 -> path " + join(lengths) + " m"};
  });

  report(6, "(d) deviation from the straight line decreasing in the rate target", 0, [&] {
    std::vector<double> dev;
    for (const auto& r : by_rate) dev.push_back(r.trajectory.max_deviation_from(base.uav_start, base.uav_end));
    bool decreasing = true;
    for (std::size_t i = 1; i < dev.size(); ++i) decreasing = decreasing && dev[i] <= dev[i - 1] * (1 + 1e-6);
    decreasing = decreasing && dev.back() < dev.front();
    return Verdict{decreasing, "R_min 0.057..0.757 -> max deviation " + join(dev) + " m"};
  });
}

Verdict infeasibility() {
  PowerStepInput in;
  in.kappa_bu = 3e12;
  in.kappa_direct = {4e9};
  in.kappa_ris = {0.0};
  in.r_min = {0.4};
  in.p_bs_max = in.p_uav_max = INFINITY;
  const PowerStepOutput out = solve_power_step(in, SimControls{});
  const double closed = std::expm1(0.4 * std::log(2.0)) / 4e9;
  const double err = out.result.ok ? rel(out.p_direct[0], closed) : INFINITY;

  ScenarioConfig s;
  s.p_bs_max_w = 1.0;
  s.r_min.assign(3, 50.0);
  const OptimizationResult r = run_joint_optimization(s, EnergyParams{}, SimControls{});
  const bool flagged = r.state.status == RunStatus::infeasible;
  return {err <= 1e-6 && flagged, "K = 1 relative error " + format_number(err) + "; 150 bit/s/Hz over a 1 W " +
                                      "backhaul -> " + to_string(r.state.status) + " (" + r.state.violated_family +
                                      ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "risuav_acceptance";
  fs::remove_all(root);
  Configuration cfg = baseline_scenario();
  cfg.controls.max_iterations = 3;
  cfg.sweep.multipliers = {1.0, 1.3};
  for (const char* tag : {"a", "b"}) {
    run_scenario(cfg, root / tag / "run");
    sweep_energy_budget(cfg, root / tag / "sweep", SweepOptions{2});
  }
  int files = 0, differ = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    ++files;
    const fs::path twin = root / "b" / fs::relative(entry.path(), root / "a");
    if (slurp(entry.path()) != slurp(twin)) ++differ;
  }
  fs::remove_all(root);
  return {files > 0 && differ == 0, std::to_string(files) + " CSV files compared, " + std::to_string(differ) +
                                        " differ"};
}

}  // namespace

int main() {
  report(1, "beamforming identities", 10, beamforming_identities);
  report(2, "closed-form RIS phases against grid search", 60, phase_oracle);
  report(3, "surrogate bounds hold and are tight at the expansion point", 10, bound_validity);
  report(4, "propulsion energy model", 0, energy_model);
  report(5, "joint optimization on the baseline", 300, baseline_run);
  ordinal();
  report(7, "infeasibility detection", 0, infeasibility);
  report(8, "determinism", 0, determinism);
  std::printf("%d criterion line(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
