#include "risuav/sca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "risuav/convex/conic.hpp"
#include "risuav/energy.hpp"
#include "risuav/error.hpp"

namespace risuav {

using convex::Affine;
using convex::ConvexProgram;
using convex::SolveStatus;
using convex::Var;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;
}  // namespace

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iter: return "max_iter";
    case RunStatus::infeasible: return "infeasible";
    case RunStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

double Trajectory::path_length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < z.size(); ++i) len += (z[i] - z[i - 1]).norm();
  return len;
}

double Trajectory::max_deviation_from(const Vec2& a, const Vec2& b) const {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double worst = 0.0;
  for (const Vec2& p : z) {
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    worst = std::max(worst, (p - (a + t * ab)).norm());
  }
  return worst;
}

double PowerSchedule::step_total(int n) const {
  const auto i = static_cast<std::size_t>(n);
  double sum = p_bs[i];
  for (std::size_t k = 0; k < p_direct.size(); ++k) sum += p_direct[k][i] + p_ris[k][i];
  return sum;
}

double PowerSchedule::total() const {
  double sum = 0.0;
  for (std::size_t n = 0; n < p_bs.size(); ++n) sum += step_total(static_cast<int>(n));
  return sum;
}

void tighten_slacks(const ScenarioConfig& s, const Trajectory& traj, SCAState& state) {
  const int N = traj.steps();
  const int K = s.num_ues();
  state.lambda_direct.assign(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(N)));
  state.lambda_ris = state.lambda_direct;
  state.mu.assign(static_cast<std::size_t>(N), 0.0);
  state.pi.assign(static_cast<std::size_t>(N), 0.0);
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const Vec3 u = s.uav(traj.position(n));
    for (int k = 0; k < K; ++k) {
      state.lambda_direct[static_cast<std::size_t>(k)][i] = (u - s.ue(k)).squaredNorm();
      state.lambda_ris[static_cast<std::size_t>(k)][i] = (u - s.ris()).squaredNorm();
    }
    state.mu[i] = (u - s.bs()).squaredNorm();
    state.pi[i] = traj.v[i].norm();
  }
}

void init_straight_trajectory(const ScenarioConfig& s, Trajectory& traj, SCAState& state) {
  const int N = s.n_steps;
  const Vec2 step = (s.uav_end - s.uav_start) / static_cast<double>(N);
  const Vec2 v = step / s.tau;
  if (v.norm() < s.pi_min)
    throw DomainError("straight-line speed is below the hover guard pi_min; endpoints too close for n_steps");
  if (v.norm() > s.v_max) throw DomainError("straight-line speed exceeds v_max");
  traj.tau = s.tau;
  traj.z.resize(static_cast<std::size_t>(N) + 1);
  traj.v.assign(static_cast<std::size_t>(N), v);
  for (int n = 0; n <= N; ++n) traj.z[static_cast<std::size_t>(n)] = s.uav_start + step * n;
  traj.z.back() = s.uav_end;
  state = SCAState{};
  tighten_slacks(s, traj, state);
}

double rate_lower_bound(double hat_gamma, double lambda, double lambda_j) {
  if (!(lambda > 0.0) || !(lambda_j > 0.0)) throw DomainError("slack variables must be positive");
  return std::log2(1.0 + hat_gamma / lambda_j) -
         hat_gamma * (lambda - lambda_j) / (lambda_j * (lambda_j + hat_gamma) * kLn2);
}

double capacity_lower_bound(double hat_gamma, double mu, double mu_j) { return rate_lower_bound(hat_gamma, mu, mu_j); }

double velocity_lower_bound(const Vec2& v, const Vec2& v_j) { return v_j.squaredNorm() + 2.0 * v_j.dot(v - v_j); }

double power_upper_bound(double p, double p_j, double kappa) {
  const double g = 1.0 + p_j * kappa;
  return std::log2(g) + kappa * (p - p_j) / (g * kLn2);
}

LinkPair min_power_pair(double k1, double k2, double rate_target, bool tied) {
  const double need = std::exp2(rate_target) - 1.0;  // product target minus one
  LinkPair out;
  if (need <= 0.0) return out;
  if (!(k1 > 0.0) && !(k2 > 0.0)) throw DomainError("both links have zero gain");
  if (tied) {
    if (!(k2 > 0.0)) return {need / k1, need / k1};
    if (!(k1 > 0.0)) return {need / k2, need / k2};
    // k1 k2 p^2 + (k1 + k2) p - need = 0
    const double b = k1 + k2;
    const double p = 2.0 * need / (b + std::sqrt(b * b + 4.0 * k1 * k2 * need));
    return {p, p};
  }
  if (!(k2 > 0.0)) return {need / k1, 0.0};
  if (!(k1 > 0.0)) return {0.0, need / k2};
  const double nu = std::sqrt((1.0 + need) / (k1 * k2));
  out.p_direct = nu - 1.0 / k1;
  out.p_ris = nu - 1.0 / k2;
  if (out.p_direct <= 0.0) return {0.0, need / k2};
  if (out.p_ris <= 0.0) return {need / k1, 0.0};
  return out;
}

PowerStepInput power_step_input(const ScenarioConfig& s, const Vec2& uav_xy) {
  const LinkCoefficients c = kappa_coefficients(s, uav_xy);
  PowerStepInput in;
  in.kappa_bu = c.bu;
  in.kappa_direct = c.direct;
  in.kappa_ris = c.ris;
  in.r_min = s.r_min;
  in.tie_link_powers = s.tie_link_powers;
  in.p_bs_max = s.p_bs_max_w;
  in.p_uav_max = s.p_uav_max_w;
  return in;
}

namespace {

// Breakpoints of the concave envelope used for the capacity side of the
// backhaul constraint, in bits.
std::vector<double> capacity_breakpoints(double lo, double hi) {
  constexpr double kStep = 1.0 / 32.0;
  std::vector<double> t;
  for (double x = lo; x < hi; x += kStep) t.push_back(x);
  t.push_back(hi);
  return t;
}

// Rate of a pair of links in SNR-plus-one form, log2(a) + log2(b).
double pair_rate(double a, double b) { return std::log2(a) + std::log2(b); }

}  // namespace

PowerStepOutput solve_power_step(const PowerStepInput& in, const SimControls& controls) {
  const int K = static_cast<int>(in.r_min.size());
  PowerStepOutput out;
  out.p_direct.assign(static_cast<std::size_t>(K), 0.0);
  out.p_ris.assign(static_cast<std::size_t>(K), 0.0);
  if (!(in.kappa_bu > 0.0)) throw DomainError("backhaul gain must be positive");

  // Expansion point: the per-UE optimum without the backhaul coupling, which
  // is also the coupled optimum when no power cap binds.
  std::vector<double> a_j(static_cast<std::size_t>(K)), b_j(static_cast<std::size_t>(K));
  double rate_sum_min = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const LinkPair p = min_power_pair(in.kappa_direct[i], in.kappa_ris[i], in.r_min[i], in.tie_link_powers);
    a_j[i] = 1.0 + std::min(p.p_direct, in.p_uav_max) * in.kappa_direct[i];
    b_j[i] = 1.0 + std::min(p.p_ris, in.p_uav_max) * in.kappa_ris[i];
    rate_sum_min += in.r_min[i];
  }
  if (in.p_bs_max * in.kappa_bu < std::expm1(rate_sum_min * std::numbers::ln2)) {
    out.result.infeasible = true;
    out.result.violated_family = "backhaul capacity";
    out.result.diagnostics = "maximum BS power cannot carry the aggregate minimum rate";
    return out;
  }

  // Objective weights 1/kappa, normalised so the largest is one.
  double max_w = 1.0 / in.kappa_bu;
  for (int k = 0; k < K; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (in.kappa_direct[i] > 0.0) max_w = std::max(max_w, 1.0 / in.kappa_direct[i]);
    if (in.kappa_ris[i] > 0.0) max_w = std::max(max_w, 1.0 / in.kappa_ris[i]);
  }
  auto weight = [&](double kappa) { return 1.0 / (kappa * max_w); };

  const auto settings = convex::SolverSettings::from(controls);
  double prev_obj = kInf;
  std::vector<double> a(a_j), b(b_j);
  double s_bs = 0.0;
  bool have_solution = false;
  for (int it = 0; it < controls.inner_max_iterations; ++it) {
    out.inner_iterations = it + 1;
    ConvexProgram prog;
    std::vector<Var> va(static_cast<std::size_t>(K)), vb(static_cast<std::size_t>(K));
    std::vector<bool> has_b(static_cast<std::size_t>(K));
    Affine objective;
    Affine rate_ub;  // sum of over-estimated UE rates
    for (int k = 0; k < K; ++k) {
      const auto i = static_cast<std::size_t>(k);
      const double k1 = in.kappa_direct[i], k2 = in.kappa_ris[i];
      const std::string tag = "[" + std::to_string(k) + "]";
      va[i] = prog.add_variable("snr_direct" + tag, 1.0, 1.0 + in.p_uav_max * k1);
      has_b[i] = k2 > 0.0;
      objective += weight(k1) * (Affine(va[i]) - 1.0);
      rate_ub += Affine(std::log2(a_j[i]) - 1.0 / kLn2) + (1.0 / (a_j[i] * kLn2)) * Affine(va[i]);
      const double target = std::exp2(in.r_min[i]);
      if (has_b[i]) {
        vb[i] = prog.add_variable("snr_ris" + tag, 1.0, 1.0 + in.p_uav_max * k2);
        objective += weight(k2) * (Affine(vb[i]) - 1.0);
        rate_ub += Affine(std::log2(b_j[i]) - 1.0 / kLn2) + (1.0 / (b_j[i] * kLn2)) * Affine(vb[i]);
        prog.add_ratio_le(target, vb[i], va[i], 1.0, "minimum rate");
        if (in.tie_link_powers) prog.add_equal((k2 / k1) * (Affine(va[i]) - 1.0), Affine(vb[i]) - 1.0, "power tie");
      } else {
        prog.add_less_equal(target, va[i], "minimum rate");
      }
    }

    // capacity side: concave piecewise-linear under-estimator of log2(1 + s)
    double t_now = 0.0;
    for (int k = 0; k < K; ++k) {
      const auto i = static_cast<std::size_t>(k);
      t_now += pair_rate(a_j[i], b_j[i]);
    }
    const double t_lo = std::max(0.0, std::min(t_now, rate_sum_min) - 1.0);
    const double t_hi = std::max(t_now, rate_sum_min) + 2.0;
    const auto t = capacity_breakpoints(t_lo, t_hi);
    const double s_lo = std::exp2(t.front()) - 1.0;
    const double s_hi = std::min(std::exp2(t.back()) - 1.0, in.p_bs_max * in.kappa_bu);
    if (s_hi < s_lo) {
      out.result.infeasible = true;
      out.result.violated_family = "backhaul capacity";
      out.result.diagnostics = "maximum BS power cannot carry the aggregate minimum rate";
      return out;
    }
    const Var vs = prog.add_variable("snr_bs", s_lo, s_hi);
    objective += weight(in.kappa_bu) * Affine(vs);
    for (std::size_t c = 0; c + 1 < t.size(); ++c) {
      const double s0 = std::exp2(t[c]) - 1.0, s1 = std::exp2(t[c + 1]) - 1.0;
      const double slope = (t[c + 1] - t[c]) / (s1 - s0);
      prog.add_less_equal(rate_ub, Affine(t[c] - slope * s0) + slope * Affine(vs), "backhaul capacity");
    }
    prog.minimize(objective);

    const auto sol = convex::solve(prog, settings);
    if (sol.status != SolveStatus::optimal) {
      if (have_solution) break;
      out.result.infeasible = sol.status == SolveStatus::infeasible;
      out.result.violated_family = sol.violated_family;
      out.result.diagnostics = sol.diagnostics;
      return out;
    }
    have_solution = true;
    for (int k = 0; k < K; ++k) {
      const auto i = static_cast<std::size_t>(k);
      a[i] = sol[va[i]];
      b[i] = has_b[i] ? sol[vb[i]] : 1.0;
    }
    s_bs = sol[vs];
    const double obj = sol.objective;
    a_j = a;
    b_j = b;
    if (std::isfinite(prev_obj) && std::abs(prev_obj - obj) <= controls.convergence_tol * std::abs(obj)) break;
    prev_obj = obj;
  }
  (void)s_bs;

  // Exact polish: meet every rate target with the true rate expression, then
  // give the BS exactly the power the aggregate rate needs.
  double rate_sum = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double k1 = in.kappa_direct[i], k2 = in.kappa_ris[i];
    double p1 = std::max(0.0, (a[i] - 1.0) / k1);
    double p2 = k2 > 0.0 ? std::max(0.0, (b[i] - 1.0) / k2) : 0.0;
    if (in.tie_link_powers && k2 > 0.0) p2 = p1;
    auto pair_rate_at = [&](double scale) {
      return std::log2(1.0 + scale * p1 * k1) + (k2 > 0.0 ? std::log2(1.0 + scale * p2 * k2) : 0.0);
    };
    if (pair_rate_at(1.0) < in.r_min[i]) {
      double hi = 1.0;
      while (pair_rate_at(hi) < in.r_min[i] && hi < 1e6) hi *= 2.0;
      double lo = hi / 2.0;
      if (lo < 1.0) lo = 1.0;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (pair_rate_at(mid) < in.r_min[i] ? lo : hi) = mid;
      }
      p1 *= hi;
      p2 *= hi;
    }
    out.p_direct[i] = p1;
    out.p_ris[i] = p2;
    rate_sum += pair_rate_at(1.0);
  }
  out.p_bs = std::expm1(rate_sum * std::numbers::ln2) / in.kappa_bu;
  if (out.p_bs > in.p_bs_max * (1.0 + controls.solver_tol)) {
    out.result.infeasible = true;
    out.result.violated_family = "backhaul capacity";
    out.result.diagnostics = "BS power cap exceeded after exact polish";
    return out;
  }
  out.result.ok = true;
  return out;
}

PowerSchedule solve_power_subproblem(const ScenarioConfig& s, const Trajectory& traj, const SimControls& controls,
                                     SubproblemResult& result) {
  const int N = traj.steps();
  const int K = s.num_ues();
  PowerSchedule ps;
  ps.p_bs.assign(static_cast<std::size_t>(N), 0.0);
  ps.p_direct.assign(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(N), 0.0));
  ps.p_ris = ps.p_direct;
  result = SubproblemResult{};
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const PowerStepOutput step = solve_power_step(power_step_input(s, traj.position(n)), controls);
    if (!step.result.ok) {
      result = step.result;
      result.diagnostics = "step " + std::to_string(n) + ": " + result.diagnostics;
      return ps;
    }
    ps.p_bs[i] = step.p_bs;
    for (int k = 0; k < K; ++k) {
      ps.p_direct[static_cast<std::size_t>(k)][i] = step.p_direct[static_cast<std::size_t>(k)];
      ps.p_ris[static_cast<std::size_t>(k)][i] = step.p_ris[static_cast<std::size_t>(k)];
    }
  }
  result.ok = true;
  return ps;
}

namespace {

constexpr double kLength = 100.0;  // metres per model length unit

// Minimum UE power for one step as a function of the two slacks (m^2).
double ue_power(const SlackCoefficients& hat, std::size_t k, double r_min, bool tied, double lam1, double lam2) {
  const LinkPair p = min_power_pair(hat.direct[k] / lam1, hat.ris[k] / lam2, r_min, tied);
  return p.p_direct + p.p_ris;
}

struct SlackWeights {
  std::vector<std::vector<double>> direct, ris;  // [k][n]
  std::vector<double> bs;                        // [n]
};

// d(P_total)/d(slack) at the expansion point, per model area unit, scaled so
// the largest weight is one; a small floor keeps every slack bounded.
SlackWeights sensitivity_weights(const ScenarioConfig& s, const SCAState& st, const SimControls& c) {
  const int K = s.num_ues();
  const int N = static_cast<int>(st.mu.size());
  const SlackCoefficients hat = slack_coefficients(s);
  SlackWeights w;
  w.direct.assign(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(N), 0.0));
  w.ris = w.direct;
  w.bs.assign(static_cast<std::size_t>(N), 0.0);
  double rate_sum = 0.0;
  for (double r : s.r_min) rate_sum += r;
  double largest = 0.0;
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    if (c.trajectory_objective == TrajectoryObjective::slack_distance) {
      for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k) {
        w.direct[k][i] = c.weight_direct;
        w.ris[k][i] = c.weight_ris;
      }
      w.bs[i] = c.weight_bs;
    } else {
      for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k) {
        const double l1 = st.lambda_direct[k][i], l2 = st.lambda_ris[k][i];
        const double h1 = 1e-4 * l1, h2 = 1e-4 * l2;
        const double r = s.r_min[k];
        w.direct[k][i] = (ue_power(hat, k, r, s.tie_link_powers, l1 + h1, l2) -
                          ue_power(hat, k, r, s.tie_link_powers, l1 - h1, l2)) / (2.0 * h1);
        w.ris[k][i] = (ue_power(hat, k, r, s.tie_link_powers, l1, l2 + h2) -
                       ue_power(hat, k, r, s.tie_link_powers, l1, l2 - h2)) / (2.0 * h2);
      }
      w.bs[i] = std::expm1(rate_sum * std::numbers::ln2) / hat.bu;
    }
    for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k)
      largest = std::max({largest, w.direct[k][i], w.ris[k][i]});
    largest = std::max(largest, w.bs[i]);
  }
  if (!(largest > 0.0)) largest = 1.0;
  auto norm = [&](double& x) { x = std::max(x / largest, 1e-6); };
  for (auto& row : w.direct) std::for_each(row.begin(), row.end(), norm);
  for (auto& row : w.ris) std::for_each(row.begin(), row.end(), norm);
  std::for_each(w.bs.begin(), w.bs.end(), norm);
  return w;
}

// Coefficients of the affine rate under-estimator in model units:
// value(lambda) = offset - slope * lambda.
struct Tangent {
  double offset = 0.0;
  double slope = 0.0;
};

Tangent rate_tangent(double hat, double lambda_j) {
  const double slope = hat / (lambda_j * (lambda_j + hat) * kLn2);
  return {std::log2(1.0 + hat / lambda_j) + slope * lambda_j, slope};
}

}  // namespace

SubproblemResult solve_trajectory_subproblem(const ScenarioConfig& s, const EnergyParams& e,
                                             const SimControls& controls, const PowerSchedule& powers,
                                             const Trajectory& traj_j, const SCAState& st, double trust_radius,
                                             Trajectory& traj_out, SCAState& state_out) {
  const int N = traj_j.steps();
  const int K = s.num_ues();
  const double L = kLength, L2 = kLength * kLength;
  const double tau = s.tau;
  const SlackCoefficients hat = slack_coefficients(s);
  const SlackWeights weights = sensitivity_weights(s, st, controls);
  const PropulsionTerms pt = propulsion_terms(e);
  const double e_max = s.energy_budget_multiplier * straight_line_min_energy(s, e);
  const double margin = 1.0 + controls.power_margin;

  ConvexProgram prog;
  std::vector<Var> zx(static_cast<std::size_t>(N) + 1), zy(zx.size());
  std::vector<Var> vx(static_cast<std::size_t>(N)), vy(vx.size()), pi(vx.size()), ysq(vx.size()), uinv(vx.size()),
      wcub(vx.size()), mu(vx.size());
  std::vector<std::vector<Var>> lam1(static_cast<std::size_t>(K), std::vector<Var>(vx.size()));
  auto lam2 = lam1;

  for (int n = 0; n <= N; ++n) {
    zx[static_cast<std::size_t>(n)] = prog.add_variable("zx[" + std::to_string(n) + "]");
    zy[static_cast<std::size_t>(n)] = prog.add_variable("zy[" + std::to_string(n) + "]");
  }
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const std::string tag = "[" + std::to_string(n) + "]";
    vx[i] = prog.add_variable("vx" + tag);
    vy[i] = prog.add_variable("vy" + tag);
    pi[i] = prog.add_variable("pi" + tag);
    ysq[i] = prog.add_variable("speed_sq" + tag);
    uinv[i] = prog.add_variable("inv_pi" + tag);
    wcub[i] = prog.add_variable("speed_cube" + tag);
    mu[i] = prog.add_variable("mu" + tag);
    for (int k = 0; k < K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      lam1[kk][i] = prog.add_variable("lambda_direct[" + std::to_string(k) + "]" + tag);
      lam2[kk][i] = prog.add_variable("lambda_ris[" + std::to_string(k) + "]" + tag);
    }
  }

  // endpoints and kinematics
  prog.add_equal(zx.front(), s.uav_start.x() / L, "start point");
  prog.add_equal(zy.front(), s.uav_start.y() / L, "start point");
  prog.add_equal(zx.back(), s.uav_end.x() / L, "end point");
  prog.add_equal(zy.back(), s.uav_end.y() / L, "end point");
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    prog.add_equal(Affine(zx[i + 1]) - Affine(zx[i]) - (tau / L) * Affine(vx[i]), 0.0, "position update");
    prog.add_equal(Affine(zy[i + 1]) - Affine(zy[i]) - (tau / L) * Affine(vy[i]), 0.0, "position update");
    prog.add_norm_le({Affine(vx[i]), Affine(vy[i])}, s.v_max, "maximum speed");
    if (n + 1 < N)
      prog.add_norm_le({Affine(vx[i + 1]) - Affine(vx[i]), Affine(vy[i + 1]) - Affine(vy[i])}, s.v_acc * tau,
                       "maximum acceleration");
  }
  for (int n = 1; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const Vec2& zj = traj_j.z[i];
    prog.add_norm_le({Affine(zx[i]) - zj.x() / L, Affine(zy[i]) - zj.y() / L}, trust_radius / L, "trust region");
  }

  // slacks, rate and capacity under-estimators
  Affine objective;
  const Vec3 ris = s.ris(), bs = s.bs();
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const Var px = zx[i + 1], py = zy[i + 1];
    auto dist_sq = [&](const Vec3& node, Var slack, double slack_j, const char* family) {
      prog.add_squared_norm_le({Affine(px) - node.x() / L, Affine(py) - node.y() / L,
                                Affine((s.uav_height - node.z()) / L)},
                               slack, family, std::sqrt(slack_j / L2));
    };
    Affine aggregate;  // UE rate under-estimators at the frozen powers
    for (int k = 0; k < K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const double l1j = st.lambda_direct[kk][i], l2j = st.lambda_ris[kk][i];
      dist_sq(s.ue(k), lam1[kk][i], l1j, "UE distance slack");
      dist_sq(ris, lam2[kk][i], l2j, "RIS distance slack");
      const Tangent t1 = rate_tangent(margin * powers.p_direct[kk][i] * hat.direct[kk] / L2, l1j / L2);
      const Tangent t2 = rate_tangent(margin * powers.p_ris[kk][i] * hat.ris[kk] / L2, l2j / L2);
      const Affine ue_rate = Affine(t1.offset + t2.offset) - t1.slope * Affine(lam1[kk][i]) -
                             t2.slope * Affine(lam2[kk][i]);
      prog.add_less_equal(s.r_min[kk], ue_rate, "minimum rate (linearized)");
      const Tangent f1 = rate_tangent(powers.p_direct[kk][i] * hat.direct[kk] / L2, l1j / L2);
      const Tangent f2 = rate_tangent(powers.p_ris[kk][i] * hat.ris[kk] / L2, l2j / L2);
      aggregate += Affine(f1.offset + f2.offset) - f1.slope * Affine(lam1[kk][i]) - f2.slope * Affine(lam2[kk][i]);
      objective += weights.direct[kk][i] * Affine(lam1[kk][i]) + weights.ris[kk][i] * Affine(lam2[kk][i]);
    }
    dist_sq(bs, mu[i], st.mu[i], "BS distance slack");
    const Tangent tc = rate_tangent(margin * powers.p_bs[i] * hat.bu / L2, st.mu[i] / L2);
    prog.add_less_equal(aggregate, Affine(tc.offset) - tc.slope * Affine(mu[i]), "backhaul (linearized)");
    objective += weights.bs[i] * Affine(mu[i]);
  }

  // flight energy with the speed slack
  Affine energy;
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const Vec2& vj = traj_j.v[i];
    const double speed_j = std::max(vj.norm(), s.pi_min);
    prog.add_squared_norm_le({Affine(vx[i]), Affine(vy[i])}, ysq[i], "energy budget", speed_j);
    prog.add_cubic_norm_le({Affine(vx[i]), Affine(vy[i])}, wcub[i], "energy budget", speed_j);
    prog.add_ratio_le(1.0, pi[i], uinv[i], s.pi_min, "speed slack floor");
    const Affine lb = Affine(-vj.squaredNorm()) + 2.0 * vj.x() * Affine(vx[i]) + 2.0 * vj.y() * Affine(vy[i]);
    prog.add_squared_norm_le({Affine(pi[i])}, lb, "speed slack", speed_j);
    energy += Affine(pt.blade) + pt.blade_quad * Affine(ysq[i]) + pt.induced * Affine(uinv[i]) +
              pt.parasite * Affine(wcub[i]);
  }
  prog.add_less_equal((tau / e_max) * energy, 1.0, "energy budget");

  if (controls.trajectory_objective == TrajectoryObjective::propulsion) prog.minimize((tau / e_max) * energy);
  else prog.minimize(objective * (1.0 / N));

  const auto sol = convex::solve(prog, controls);
  SubproblemResult res;
  res.max_residual = sol.max_residual;
  res.diagnostics = sol.diagnostics;
  if (sol.status != SolveStatus::optimal) {
    res.infeasible = sol.status == SolveStatus::infeasible;
    res.violated_family = sol.violated_family;
    return res;
  }

  // Rebuild positions from the velocities so the update rule and the end
  // point hold exactly; the residual is spread evenly over all steps.
  traj_out.tau = tau;
  traj_out.v.resize(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    traj_out.v[i] = Vec2(sol[vx[i]], sol[vy[i]]);
  }
  Vec2 reach = s.uav_start;
  for (const Vec2& v : traj_out.v) reach += tau * v;
  const Vec2 fix = (s.uav_end - reach) / (tau * N);
  for (Vec2& v : traj_out.v) v += fix;
  traj_out.z.resize(static_cast<std::size_t>(N) + 1);
  traj_out.z[0] = s.uav_start;
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    traj_out.z[i + 1] = traj_out.z[i] + tau * traj_out.v[i];
  }
  traj_out.z.back() = s.uav_end;

  state_out = st;
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    for (int k = 0; k < K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      state_out.lambda_direct[kk][i] = sol[lam1[kk][i]] * L2;
      state_out.lambda_ris[kk][i] = sol[lam2[kk][i]] * L2;
    }
    state_out.mu[i] = sol[mu[i]] * L2;
    state_out.pi[i] = sol[pi[i]];
  }
  res.ok = true;
  return res;
}

double FeasibilityReport::max() const {
  return std::max({rate, backhaul, energy, kinematics, speed, acceleration, endpoints, phase});
}

std::string FeasibilityReport::worst() const {
  const std::pair<const char*, double> all[] = {{"minimum rate", rate},        {"backhaul capacity", backhaul},  {"energy budget", energy},
                                                {"position update", kinematics},  {"maximum speed", speed},     {"maximum acceleration", acceleration},
                                                {"endpoints", endpoints}, {"unit modulus", phase}};
  const auto* best = std::max_element(std::begin(all), std::end(all),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
  return best->second > 0.0 ? best->first : "";
}

FeasibilityReport check_feasibility(const ScenarioConfig& s, const EnergyParams& e, const Trajectory& traj,
                                    const PowerSchedule& powers) {
  FeasibilityReport r;
  const int N = traj.steps();
  const int K = s.num_ues();
  const double sigma2 = s.noise_w();
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const ChannelSet ch = build_channels(s, traj.position(n));
    const EffectiveGains g = mrt_effective_gains(ch, s);
    std::vector<double> p1(static_cast<std::size_t>(K)), p2(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      p1[static_cast<std::size_t>(k)] = powers.p_direct[static_cast<std::size_t>(k)][i];
      p2[static_cast<std::size_t>(k)] = powers.p_ris[static_cast<std::size_t>(k)][i];
    }
    const RateSet rs = rates(snr_set(g, powers.p_bs[i], p1, p2, sigma2));
    for (int k = 0; k < K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      r.rate = std::max(r.rate, (s.r_min[kk] - rs.total[kk]) / s.r_min[kk]);
    }
    const double agg = rs.aggregate();
    if (agg > 0.0) r.backhaul = std::max(r.backhaul, (agg - rs.capacity) / agg);
  }
  const double e_max = s.energy_budget_multiplier * straight_line_min_energy(s, e);
  double used = 0.0;
  for (const Vec2& v : traj.v) used += propulsion_power_slack(v.norm(), std::max(v.norm(), s.pi_min), e, s.pi_min) * s.tau;
  r.energy = std::max(0.0, (used - e_max) / e_max);
  const double scale = std::max(1.0, (s.uav_end - s.uav_start).norm());
  for (int n = 0; n < N; ++n) {
    const auto i = static_cast<std::size_t>(n);
    r.kinematics = std::max(r.kinematics, (traj.z[i + 1] - traj.z[i] - s.tau * traj.v[i]).norm() / scale);
    r.speed = std::max(r.speed, (traj.v[i].norm() - s.v_max) / s.v_max);
    if (n + 1 < N)
      r.acceleration = std::max(r.acceleration, ((traj.v[i + 1] - traj.v[i]).norm() - s.v_acc * s.tau) / (s.v_acc * s.tau));
  }
  r.endpoints = ((traj.z.front() - s.uav_start).norm() + (traj.z.back() - s.uav_end).norm()) / scale;
  r.rate = std::max(r.rate, 0.0);
  r.backhaul = std::max(r.backhaul, 0.0);
  r.speed = std::max(r.speed, 0.0);
  r.acceleration = std::max(r.acceleration, 0.0);
  const RISPhaseProfile profile = optimal_phase_profile(s, traj);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k) {
      const CDiagonal d = ris_phase_matrix(profile, k, n);
      for (Eigen::Index m = 0; m < d.diagonal().size(); ++m)
        r.phase = std::max(r.phase, std::abs(std::abs(d.diagonal()(m)) - 1.0));
    }
  return r;
}

RISPhaseProfile optimal_phase_profile(const ScenarioConfig& s, const Trajectory& traj) {
  const int N = traj.steps();
  RISPhaseProfile profile(s.ris_grid, s.num_ues(), N);
  for (int n = 0; n < N; ++n) {
    const LinkAngles la = link_angles(s, traj.position(n));
    for (int k = 0; k < s.num_ues(); ++k) profile.set(k, n, optimal_ris_phase(la, s, k));
  }
  return profile;
}

OptimizationResult run_joint_optimization(const ScenarioConfig& s, const EnergyParams& e, const SimControls& c) {
  OptimizationResult out;
  SCAState& st = out.state;
  init_straight_trajectory(s, out.trajectory, st);
  const double e_min = straight_line_min_energy(s, e);
  out.energy_budget = s.energy_budget_multiplier * e_min;
  out.iterates.push_back(out.trajectory);

  auto finish = [&] {
    out.phases = optimal_phase_profile(s, out.trajectory);
    out.energy_used = trajectory_energy(out.trajectory.v, s.tau, e, s.pi_min);
    return out;
  };

  SubproblemResult pres;
  out.powers = solve_power_subproblem(s, out.trajectory, c, pres);
  if (!pres.ok) {
    st.status = pres.infeasible ? RunStatus::infeasible : RunStatus::numerical_failure;
    st.violated_family = pres.violated_family;
    st.message = "initial power control failed: " + pres.diagnostics;
    return finish();
  }
  double p_total = out.powers.total();
  st.p_total_history.push_back(p_total);
  out.trace.push_back({0, p_total, check_feasibility(s, e, out.trajectory, out.powers).max(), 0.0});

  // With no energy slack the straight line is the only admissible path.
  if (out.energy_budget <= e_min * (1.0 + c.solver_tol)) {
    st.status = RunStatus::converged;
    st.message = "energy budget admits only the straight line";
    return finish();
  }

  st.status = RunStatus::max_iter;
  for (int j = 1; j <= c.max_iterations; ++j) {
    st.iteration = j;
    tighten_slacks(s, out.trajectory, st);
    double radius = c.trust_radius;
    bool accepted = false;
    Trajectory cand;
    SCAState cand_state;
    PowerSchedule cand_powers;
    std::string last_failure;
    for (int attempt = 0; attempt <= c.trust_retries; ++attempt, radius *= c.trust_shrink) {
      const SubproblemResult tr =
          solve_trajectory_subproblem(s, e, c, out.powers, out.trajectory, st, radius, cand, cand_state);
      if (!tr.ok) {
        last_failure = (tr.infeasible ? "trajectory step reported infeasible (" + tr.violated_family + "): "
                                      : "trajectory step failed: ") +
                       tr.diagnostics;
        continue;
      }
      SubproblemResult pr;
      cand_powers = solve_power_subproblem(s, cand, c, pr);
      if (!pr.ok) {
        last_failure = "power step failed: " + pr.diagnostics;
        continue;
      }
      if (cand_powers.total() <= p_total) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!last_failure.empty() && out.iterates.size() == 1) {
        // the previous iterate is feasible for the step, so a failure here is a solver problem
        st.status = RunStatus::numerical_failure;
        st.message = last_failure;
      } else {
        st.status = RunStatus::converged;
        st.message = "no trust-region step lowers the total power";
      }
      out.trace.push_back({j, p_total, check_feasibility(s, e, out.trajectory, out.powers).max(), radius});
      st.p_total_history.push_back(p_total);
      break;
    }
    const double gain = (p_total - cand_powers.total()) / cand_powers.total();
    out.trajectory = cand;
    out.powers = cand_powers;
    p_total = cand_powers.total();
    st.p_total_history.push_back(p_total);
    out.iterates.push_back(out.trajectory);
    out.trace.push_back({j, p_total, check_feasibility(s, e, out.trajectory, out.powers).max(), radius});
    if (gain <= c.convergence_tol) {
      st.status = RunStatus::converged;
      break;
    }
  }
  tighten_slacks(s, out.trajectory, st);
  return finish();
}

}  // namespace risuav
