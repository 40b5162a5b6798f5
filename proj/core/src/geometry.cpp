#include "risuav/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace risuav {

Angles link_angle(const Vec3& a, const Vec3& b, double vertical) {
  const double d = (a - b).norm();
  const double dx = std::abs(a.x() - b.x());
  const double dy = std::abs(a.y() - b.y());
  const double horizontal = std::hypot(dx, dy);
  Angles out;
  out.sin_theta = d > 0.0 ? std::clamp(std::abs(vertical) / d, 0.0, 1.0) : 1.0;
  if (horizontal > 0.0) {
    out.sin_xi = dx / horizontal;
    out.cos_xi = dy / horizontal;
  }
  return out;
}

LinkAngles link_angles(const ScenarioConfig& s, const Vec2& uav_xy) {
  const Vec3 u = s.uav(uav_xy);
  const Vec3 r = s.ris();
  LinkAngles la;
  la.bu = link_angle(s.bs(), u, s.bs_height);
  la.ur = link_angle(u, r, s.uav_height - s.ris_height);
  for (int k = 0; k < s.num_ues(); ++k) {
    la.ug.push_back(link_angle(u, s.ue(k), s.uav_height));
    la.rg.push_back(link_angle(r, s.ue(k), s.ris_height));
  }
  return la;
}

namespace {

CVector axis_progression(int count, double spacing, double wavelength, double u) {
  CVector v(count);
  const double step = 2.0 * std::numbers::pi * spacing / wavelength * u;
  for (int m = 0; m < count; ++m) v(m) = std::polar(1.0, -step * m);
  return v;
}

}  // namespace

CVector steering_vector(ArrayGrid grid, Spacing spacing, double wavelength, const Angles& a) {
  const CVector vx = axis_progression(grid.x, spacing.x, wavelength, a.ux());
  const CVector vy = axis_progression(grid.y, spacing.y, wavelength, a.uy());
  CVector out(grid.count());
  for (int mx = 0; mx < grid.x; ++mx)
    for (int my = 0; my < grid.y; ++my) out(mx * grid.y + my) = vx(mx) * vy(my);
  return out;
}

ChannelSet build_channels(const ScenarioConfig& s, const Vec2& uav_xy) {
  const LinkAngles la = link_angles(s, uav_xy);
  const Vec3 u = s.uav(uav_xy);
  const Vec3 r = s.ris();
  const double a0 = s.alpha0();
  const double lc = s.carrier_wavelength;

  ChannelSet ch;
  ch.d_bu = (s.bs() - u).norm();
  ch.d_ur = (u - r).norm();
  ch.h_bu = (a0 / ch.d_bu) * steering_vector(s.bs_grid, s.bs_spacing, lc, la.bu).conjugate();

  const CVector ris_side = steering_vector(s.ris_grid, s.ris_spacing, lc, la.ur);
  const CVector uav_side = steering_vector(s.uav_grid, s.uav_spacing, lc, la.ur);
  ch.h_ur = (a0 / ch.d_ur) * ris_side * uav_side.adjoint();

  const double rg_gain = s.per_hop_path_loss ? a0 : 1.0;
  for (int k = 0; k < s.num_ues(); ++k) {
    const double d_ug = (u - s.ue(k)).norm();
    const double d_rg = (r - s.ue(k)).norm();
    ch.d_ug.push_back(d_ug);
    ch.d_rg.push_back(d_rg);
    ch.h_ug.push_back((a0 / d_ug) *
                      steering_vector(s.uav_grid, s.uav_spacing, lc, la.ug[static_cast<std::size_t>(k)]).conjugate());
    ch.h_rg.push_back((rg_gain / d_rg) *
                      steering_vector(s.ris_grid, s.ris_spacing, lc, la.rg[static_cast<std::size_t>(k)]).conjugate());
  }
  return ch;
}

double wrap_phase(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(phi, two_pi);
  if (w < 0.0) w += two_pi;
  if (w >= two_pi) w = 0.0;
  return w;
}

RISPhaseProfile::RISPhaseProfile(ArrayGrid grid, int num_ues, int num_steps)
    : grid_(grid),
      num_ues_(num_ues),
      num_steps_(num_steps),
      phi_(static_cast<std::size_t>(grid.count()) * static_cast<std::size_t>(num_ues) *
               static_cast<std::size_t>(num_steps),
           0.0) {}

void RISPhaseProfile::set(int k, int n, const Eigen::VectorXd& phases) {
  if (phases.size() != grid_.count()) throw std::invalid_argument("phase vector length does not match the RIS grid");
  for (int m = 0; m < grid_.count(); ++m) at(m, k, n) = wrap_phase(phases(m));
}

Eigen::VectorXd RISPhaseProfile::phases(int k, int n) const {
  Eigen::VectorXd p(grid_.count());
  for (int m = 0; m < grid_.count(); ++m) p(m) = at(m, k, n);
  return p;
}

CDiagonal ris_phase_matrix(const Eigen::VectorXd& phases) {
  CVector d(phases.size());
  for (Eigen::Index m = 0; m < phases.size(); ++m) d(m) = std::polar(1.0, phases(m));
  return CDiagonal(d);
}

CDiagonal ris_phase_matrix(const RISPhaseProfile& profile, int k, int n) {
  return ris_phase_matrix(profile.phases(k, n));
}

CRowVector cascade_channel(const ChannelSet& channels, const CDiagonal& phase, int k) {
  const CVector& h_rg = channels.h_rg.at(static_cast<std::size_t>(k));
  if (h_rg.size() != phase.rows() || channels.h_ur.rows() != phase.rows())
    throw std::invalid_argument("cascade_channel: RIS dimensions disagree");
  return h_rg.adjoint() * phase * channels.h_ur;
}

Eigen::VectorXd optimal_ris_phase(const LinkAngles& angles, const ScenarioConfig& s, int k) {
  const Angles& rg = angles.rg.at(static_cast<std::size_t>(k));
  const ArrayGrid g = s.ris_grid;
  const double cx = 2.0 * std::numbers::pi * s.ris_spacing.x / s.carrier_wavelength;
  const double cy = 2.0 * std::numbers::pi * s.ris_spacing.y / s.carrier_wavelength;
  const double ux = angles.ur.ux() + rg.ux();
  const double uy = angles.ur.uy() + rg.uy();
  Eigen::VectorXd phi(g.count());
  for (int mx = 0; mx < g.x; ++mx)
    for (int my = 0; my < g.y; ++my) phi(mx * g.y + my) = wrap_phase(cx * mx * ux + cy * my * uy);
  return phi;
}

EffectiveGains mrt_effective_gains(const ChannelSet& channels, const ScenarioConfig& s) {
  const double a0 = s.alpha0();
  const double mb = std::sqrt(static_cast<double>(s.bs_grid.count()));
  const double mu = std::sqrt(static_cast<double>(s.uav_grid.count()));
  const double mr = static_cast<double>(s.ris_grid.count());
  const double hop = s.per_hop_path_loss ? a0 * a0 : a0;
  EffectiveGains g;
  g.bu = mb * a0 / channels.d_bu;
  for (std::size_t k = 0; k < channels.d_ug.size(); ++k) {
    g.ug.push_back(mu * a0 / channels.d_ug[k]);
    g.urg.push_back(mu * mr * hop / (channels.d_rg[k] * channels.d_ur));
  }
  return g;
}

CVector mrt_beamformer(const CVector& h) { return h / h.norm(); }

}  // namespace risuav
