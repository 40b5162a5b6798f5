#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "risuav/scenario.hpp"

namespace risuav {

using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;
using CMatrix = Eigen::MatrixXcd;
using CDiagonal = Eigen::DiagonalMatrix<std::complex<double>, Eigen::Dynamic>;

/// Elevation and azimuth of one link, stored as the sines/cosines the array
/// response needs.
struct Angles {
  double sin_theta = 0.0;
  double sin_xi = 0.0;
  double cos_xi = 1.0;

  double ux() const { return sin_theta * cos_xi; }  // x-axis direction cosine
  double uy() const { return sin_theta * sin_xi; }  // y-axis direction cosine
};

/// `vertical` is the height term of the elevation (a height difference or an
/// absolute height, depending on the link). When the horizontal separation is
/// zero the azimuth falls back to sin = 0, cos = 1.
Angles link_angle(const Vec3& a, const Vec3& b, double vertical);

struct LinkAngles {
  Angles bu;               // BS -> UAV
  std::vector<Angles> ug;  // UAV -> UE k
  Angles ur;               // UAV <-> RIS (shared by both ends)
  std::vector<Angles> rg;  // RIS -> UE k
};

LinkAngles link_angles(const ScenarioConfig& s, const Vec2& uav_xy);

/// Kronecker product of the x- and y-axis phase progressions
/// exp(-j 2 pi d/lambda (m-1) u), element (mx, my) at index mx * grid.y + my.
CVector steering_vector(ArrayGrid grid, Spacing spacing, double wavelength, const Angles& a);

struct ChannelSet {
  CVector h_bu;               // M_B
  std::vector<CVector> h_ug;  // M_U each
  CMatrix h_ur;               // M_R x M_U
  std::vector<CVector> h_rg;  // M_R each
  double d_bu = 0.0;
  std::vector<double> d_ug;
  double d_ur = 0.0;
  std::vector<double> d_rg;
};

/// Line-of-sight channels with amplitude alpha0/d per entry. The RIS -> UE
/// vectors carry amplitude 1/d unless `per_hop_path_loss` is set.
ChannelSet build_channels(const ScenarioConfig& s, const Vec2& uav_xy);

/// Per-element RIS phase shifts in [0, 2pi), indexed by element, UE and step.
class RISPhaseProfile {
 public:
  RISPhaseProfile() = default;
  RISPhaseProfile(ArrayGrid grid, int num_ues, int num_steps);

  ArrayGrid grid() const { return grid_; }
  int num_ues() const { return num_ues_; }
  int num_steps() const { return num_steps_; }

  double& at(int element, int k, int n) { return phi_[index(element, k, n)]; }
  double at(int element, int k, int n) const { return phi_[index(element, k, n)]; }
  double at(int mx, int my, int k, int n) const { return at(mx * grid_.y + my, k, n); }

  /// Stores `phases` (one per element) for UE k at step n, wrapped into [0, 2pi).
  void set(int k, int n, const Eigen::VectorXd& phases);
  Eigen::VectorXd phases(int k, int n) const;

 private:
  std::size_t index(int element, int k, int n) const {
    return (static_cast<std::size_t>(n) * static_cast<std::size_t>(num_ues_) + static_cast<std::size_t>(k)) *
               static_cast<std::size_t>(grid_.count()) +
           static_cast<std::size_t>(element);
  }

  ArrayGrid grid_;
  int num_ues_ = 0;
  int num_steps_ = 0;
  std::vector<double> phi_;
};

double wrap_phase(double phi);

CDiagonal ris_phase_matrix(const RISPhaseProfile& profile, int k, int n);
CDiagonal ris_phase_matrix(const Eigen::VectorXd& phases);

/// (h_RG_k)^H Phi H_UR, a 1 x M_U row.
CRowVector cascade_channel(const ChannelSet& channels, const CDiagonal& phase, int k);

/// Phase policy that co-phases every reflected path for UE k.
Eigen::VectorXd optimal_ris_phase(const LinkAngles& angles, const ScenarioConfig& s, int k);

/// Beamformed amplitude gains under maximum ratio transmission with the
/// aligned RIS phases.
struct EffectiveGains {
  double bu = 0.0;
  std::vector<double> ug;
  std::vector<double> urg;
};

EffectiveGains mrt_effective_gains(const ChannelSet& channels, const ScenarioConfig& s);

/// Unit-norm maximum ratio beamformer h / ||h||.
CVector mrt_beamformer(const CVector& h);

}  // namespace risuav
