#include <doctest.h>

#include <cmath>
#include <random>

#include "risuav/energy.hpp"
#include "risuav/sca.hpp"

using namespace risuav;

namespace {

double true_rate(double hat, double lambda) { return std::log2(1.0 + hat / lambda); }

// Minimum of p1 + p2 subject to log2(1 + p1 k1) + log2(1 + p2 k2) >= r, by
// scanning the share of the rate carried on the first link.
double scanned_min_power(double k1, double k2, double r) {
  double best = INFINITY;
  constexpr int kSteps = 200000;
  for (int i = 0; i <= kSteps; ++i) {
    const double r1 = r * i / kSteps;
    best = std::min(best, std::expm1(r1 * std::log(2.0)) / k1 + std::expm1((r - r1) * std::log(2.0)) / k2);
  }
  return best;
}

}  // namespace

TEST_CASE("rate under-estimator") {
  CHECK(rate_lower_bound(10.0, 5.0, 4.0) == doctest::Approx(1.550).epsilon(1e-3));
  CHECK(true_rate(10.0, 5.0) == doctest::Approx(1.585).epsilon(1e-3));
  CHECK(rate_lower_bound(10.0, 4.0, 4.0) == doctest::Approx(true_rate(10.0, 4.0)).epsilon(1e-15));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> g(-3.0, 6.0), scale(0.1, 100.0);
  for (int t = 0; t < 2000; ++t) {
    const double hat = std::pow(10.0, g(rng)), lj = std::pow(10.0, g(rng));
    const double lam = scale(rng) * lj;
    CHECK(rate_lower_bound(hat, lam, lj) <= true_rate(hat, lam) + 1e-12);
    CHECK(capacity_lower_bound(hat, lam, lj) <= true_rate(hat, lam) + 1e-12);
  }
  CHECK(capacity_lower_bound(10.0, 6.0, 4.0) < capacity_lower_bound(10.0, 4.0, 4.0));
  CHECK_THROWS(rate_lower_bound(1.0, 0.0, 1.0));
  CHECK_THROWS(rate_lower_bound(1.0, 1.0, -1.0));
}

TEST_CASE("velocity under-estimator") {
  CHECK(velocity_lower_bound(Vec2(3, 4), Vec2(3, 4)) == 25.0);
  CHECK(velocity_lower_bound(Vec2(3, 4), Vec2(0, 0)) == 0.0);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int t = 0; t < 2000; ++t) {
    const Vec2 v(n(rng), n(rng)), vj(n(rng), n(rng));
    CHECK(velocity_lower_bound(v, vj) <= v.squaredNorm() + 1e-9);
  }
}

TEST_CASE("power over-estimator") {
  CHECK(power_upper_bound(3.0, 1.0, 1.0) == doctest::Approx(1.0 + 2.0 / (2.0 * std::log(2.0))));
  CHECK(power_upper_bound(3.0, 1.0, 1.0) == doctest::Approx(2.443).epsilon(1e-3));
  CHECK(power_upper_bound(2.5, 2.5, 0.7) == doctest::Approx(std::log2(1.0 + 2.5 * 0.7)).epsilon(1e-15));
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 2000; ++t) {
    const double pj = std::pow(10.0, -3 + 6 * u(rng)), kappa = std::pow(10.0, -3 + 6 * u(rng));
    const double p = 100.0 * pj * u(rng);
    CHECK(power_upper_bound(p, pj, kappa) >= std::log2(1.0 + p * kappa) - 1e-12);
  }
}

TEST_CASE("straight initial path with tight slacks") {
  const ScenarioConfig s;
  Trajectory tr;
  SCAState st;
  init_straight_trajectory(s, tr, st);
  REQUIRE(tr.steps() == 50);
  for (const Vec2& v : tr.v) CHECK((v - Vec2(10, 10)).norm() < 1e-12);
  CHECK(tr.z.front() == s.uav_start);
  CHECK(tr.z.back() == s.uav_end);
  const SlackCoefficients hat = slack_coefficients(s);
  for (int n : {0, 17, 49}) {
    const LinkCoefficients kap = kappa_coefficients(s, tr.position(n));
    CHECK(slack_snr(hat.bu, st.mu[n]) == doctest::Approx(kap.bu).epsilon(1e-12));
    CHECK(slack_snr(hat.direct[2], st.lambda_direct[2][n]) == doctest::Approx(kap.direct[2]).epsilon(1e-12));
    CHECK(slack_snr(hat.ris[1], st.lambda_ris[1][n]) == doctest::Approx(kap.ris[1]).epsilon(1e-12));
    CHECK(st.pi[n] == doctest::Approx(std::sqrt(200.0)));
  }

  ScenarioConfig same = s;
  same.uav_end = same.uav_start;
  CHECK_THROWS(init_straight_trajectory(same, tr, st));
}

TEST_CASE("two-link minimum power against a scan") {
  for (auto [k1, k2, r] : {std::tuple{1.0, 1.0, 1.0}, {2.0, 0.5, 0.3}, {1e3, 7.0, 2.5}, {0.3, 0.9, 0.757}}) {
    const LinkPair p = min_power_pair(k1, k2, r, false);
    CHECK(std::log2(1 + p.p_direct * k1) + std::log2(1 + p.p_ris * k2) == doctest::Approx(r).epsilon(1e-12));
    CHECK(p.p_direct + p.p_ris == doctest::Approx(scanned_min_power(k1, k2, r)).epsilon(1e-8));
  }
  const LinkPair tied = min_power_pair(2.0, 0.5, 1.3, true);
  CHECK(tied.p_direct == tied.p_ris);
  CHECK(std::log2(1 + tied.p_direct * 2.0) + std::log2(1 + tied.p_ris * 0.5) == doctest::Approx(1.3).epsilon(1e-12));
  const LinkPair none = min_power_pair(2.0, 0.5, 0.0, false);
  CHECK(none.p_direct == 0.0);
  CHECK(none.p_ris == 0.0);
}

TEST_CASE("single-link power control matches the closed form") {
  PowerStepInput in;
  in.kappa_bu = 3e12;
  in.kappa_direct = {4e9};
  in.kappa_ris = {0.0};
  in.r_min = {0.4};
  in.p_bs_max = in.p_uav_max = INFINITY;
  const PowerStepOutput out = solve_power_step(in, SimControls{});
  REQUIRE(out.result.ok);
  CHECK(out.p_direct[0] == doctest::Approx(std::expm1(0.4 * std::log(2.0)) / 4e9).epsilon(1e-6));
  CHECK(out.p_ris[0] == 0.0);
  CHECK(out.p_bs == doctest::Approx(std::expm1(0.4 * std::log(2.0)) / 3e12).epsilon(1e-6));
}

TEST_CASE("coupled power control reaches the per-UE water-filling optimum") {
  const ScenarioConfig s;
  const SimControls c;
  for (const Vec2& xy : {Vec2(100, 100), Vec2(250, 250), Vec2(420, 60)}) {
    const PowerStepInput in = power_step_input(s, xy);
    const PowerStepOutput out = solve_power_step(in, c);
    REQUIRE(out.result.ok);
    double expected = std::expm1(3 * 0.257 * std::log(2.0)) / in.kappa_bu;
    double got = out.p_bs;
    for (int k = 0; k < 3; ++k) {
      const LinkPair p = min_power_pair(in.kappa_direct[k], in.kappa_ris[k], 0.257, false);
      expected += p.p_direct + p.p_ris;
      got += out.p_direct[k] + out.p_ris[k];
      CHECK(std::log2(1 + out.p_direct[k] * in.kappa_direct[k]) + std::log2(1 + out.p_ris[k] * in.kappa_ris[k]) >=
            0.257 * (1 - 1e-9));
    }
    CHECK(got == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("strong cascade carries the rate") {
  PowerStepInput in;
  in.kappa_bu = 1e12;
  in.kappa_direct = {1e8};
  in.kappa_ris = {1e11};
  in.r_min = {0.5};
  in.p_bs_max = in.p_uav_max = INFINITY;
  const PowerStepOutput out = solve_power_step(in, SimControls{});
  REQUIRE(out.result.ok);
  CHECK(out.p_ris[0] > 0.0);
  CHECK(out.p_direct[0] < 1e-3 * out.p_ris[0]);
}

TEST_CASE("vanishing rate targets need vanishing power") {
  const ScenarioConfig base;
  double prev = INFINITY;
  for (double r : {0.5, 0.05, 0.005, 0.0005}) {
    PowerStepInput in = power_step_input(base, {200.0, 200.0});
    in.r_min.assign(3, r);
    const PowerStepOutput out = solve_power_step(in, SimControls{});
    REQUIRE(out.result.ok);
    double total = out.p_bs;
    for (int k = 0; k < 3; ++k) total += out.p_direct[k] + out.p_ris[k];
    CHECK(total < prev);
    prev = total;
  }
  CHECK(prev < 1e-12);
}

TEST_CASE("backhaul cap makes the step infeasible") {
  PowerStepInput in = power_step_input(ScenarioConfig{}, {200.0, 200.0});
  in.p_bs_max = 1e-15;
  const PowerStepOutput out = solve_power_step(in, SimControls{});
  CHECK_FALSE(out.result.ok);
  CHECK(out.result.infeasible);
  CHECK(out.result.violated_family == "backhaul capacity");
}

TEST_CASE("trajectory step with negligible rate demand stays near the straight path") {
  ScenarioConfig s;
  s.r_min.assign(3, 1e-6);
  const EnergyParams e;
  SimControls c;
  c.trajectory_objective = TrajectoryObjective::slack_distance;
  Trajectory tr, out;
  SCAState st, st_out;
  init_straight_trajectory(s, tr, st);
  SubproblemResult pr;
  const PowerSchedule ps = solve_power_subproblem(s, tr, c, pr);
  REQUIRE(pr.ok);
  const SubproblemResult r = solve_trajectory_subproblem(s, e, c, ps, tr, st, c.trust_radius, out, st_out);
  REQUIRE(r.ok);
  auto objective = [&](const SCAState& x) {
    double sum = 0.0;
    for (int n = 0; n < tr.steps(); ++n) {
      sum += x.mu[n];
      for (int k = 0; k < 3; ++k) sum += x.lambda_direct[k][n] + x.lambda_ris[k][n];
    }
    return sum;
  };
  CHECK(objective(st_out) <= objective(st) * (1 + 1e-9));
  SCAState tight;
  tighten_slacks(s, out, tight);
  CHECK(objective(tight) <= objective(st_out) * (1 + 1e-6));
}

TEST_CASE("tight energy budget keeps the straight line") {
  ScenarioConfig s;
  s.energy_budget_multiplier = 1.0;
  const OptimizationResult r = run_joint_optimization(s, EnergyParams{}, SimControls{});
  CHECK(r.state.status == RunStatus::converged);
  Trajectory line;
  SCAState st;
  init_straight_trajectory(s, line, st);
  for (std::size_t n = 0; n < line.z.size(); ++n) CHECK((r.trajectory.z[n] - line.z[n]).norm() <= 1e-6);
}

TEST_CASE("baseline run") {
  const ScenarioConfig s;
  const EnergyParams e;
  const SimControls c;
  const OptimizationResult r = run_joint_optimization(s, e, c);
  CHECK(r.state.status == RunStatus::converged);
  CHECK(static_cast<int>(r.trace.size()) <= c.max_iterations + 1);
  const auto& h = r.state.p_total_history;
  REQUIRE(h.size() >= 2);
  for (std::size_t j = 1; j < h.size(); ++j) CHECK(h[j] <= h[j - 1] * (1 + c.solver_tol));
  CHECK(h.back() < h.front());
  const FeasibilityReport f = check_feasibility(s, e, r.trajectory, r.powers);
  CHECK(f.max() <= 1e-6);
  CHECK(r.energy_used <= r.energy_budget * (1 + 1e-6));
  CHECK(r.powers.total() == doctest::Approx(h.back()));
  CHECK(r.trajectory.max_deviation_from(s.uav_start, s.uav_end) > 1.0);
  CHECK(r.iterates.front().max_deviation_from(s.uav_start, s.uav_end) < 1e-9);

  const OptimizationResult again = run_joint_optimization(s, e, c);
  CHECK(again.state.p_total_history == h);
  CHECK(again.trajectory.z == r.trajectory.z);
}

TEST_CASE("common scaling of noise and power leaves the path unchanged") {
  ScenarioConfig a;
  ScenarioConfig b = a;
  b.noise_dbm += 10.0;
  SimControls c;
  c.max_iterations = 3;
  const OptimizationResult ra = run_joint_optimization(a, EnergyParams{}, c);
  const OptimizationResult rb = run_joint_optimization(b, EnergyParams{}, c);
  REQUIRE(ra.trajectory.z.size() == rb.trajectory.z.size());
  for (std::size_t n = 0; n < ra.trajectory.z.size(); ++n) CHECK((ra.trajectory.z[n] - rb.trajectory.z[n]).norm() < 1e-4);
  CHECK(rb.powers.total() == doctest::Approx(10.0 * ra.powers.total()).epsilon(1e-6));
}

TEST_CASE("unreachable backhaul is reported as infeasible") {
  ScenarioConfig s;
  s.r_min.assign(3, 0.757);
  s.p_bs_max_w = 1e-14;
  const OptimizationResult r = run_joint_optimization(s, EnergyParams{}, SimControls{});
  CHECK(r.state.status == RunStatus::infeasible);
  CHECK(r.state.violated_family == "backhaul capacity");
}
