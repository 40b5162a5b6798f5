#pragma once

#include <vector>

#include "risuav/geometry.hpp"
#include "risuav/scenario.hpp"

namespace risuav {

/// SNR per watt of transmit power for every link at one UAV position.
struct LinkCoefficients {
  double bu = 0.0;              // kappa
  std::vector<double> direct;   // kappa_{k,1}
  std::vector<double> ris;      // kappa_{k,2}
};

LinkCoefficients kappa_coefficients(const ScenarioConfig& s, const Vec2& uav_xy);

/// Position-independent part of kappa: SNR per watt times the squared
/// UAV-side distance, so that gamma = P * hat / lambda with lambda the
/// squared distance (d_BU^2, d_UG^2 or d_UR^2).
struct SlackCoefficients {
  double bu = 0.0;
  std::vector<double> direct;
  std::vector<double> ris;
};

SlackCoefficients slack_coefficients(const ScenarioConfig& s);

struct SnrSet {
  double bu = 0.0;
  std::vector<double> direct;
  std::vector<double> ris;
};

/// gamma = gain^2 * P / sigma^2 from amplitude gains.
SnrSet snr_set(const EffectiveGains& gains, double p_bs, const std::vector<double>& p_direct,
               const std::vector<double>& p_ris, double noise_w);

struct RateSet {
  double capacity = 0.0;
  std::vector<double> direct;
  std::vector<double> ris;
  std::vector<double> total;  // direct + ris per UE

  double aggregate() const;
};

RateSet rates(const SnrSet& snr);

double rate(double snr);  // log2(1 + snr)

/// SNR surrogate hat/lambda; throws DomainError for a non-positive slack.
double slack_snr(double hat_gamma, double slack);

}  // namespace risuav
