#include "risuav/link_budget.hpp"

#include <cmath>

#include "risuav/error.hpp"

namespace risuav {

SlackCoefficients slack_coefficients(const ScenarioConfig& s) {
  const double a0 = s.alpha0();
  const double sigma2 = s.noise_w();
  const double mr = static_cast<double>(s.ris_grid.count());
  const double hop = s.per_hop_path_loss ? a0 * a0 : a0;
  SlackCoefficients c;
  c.bu = s.bs_grid.count() * a0 * a0 / sigma2;
  const double direct = s.uav_grid.count() * a0 * a0 / sigma2;
  for (int k = 0; k < s.num_ues(); ++k) {
    const double d_rg2 = (s.ris() - s.ue(k)).squaredNorm();
    c.direct.push_back(direct);
    c.ris.push_back(s.uav_grid.count() * mr * mr * hop * hop / (d_rg2 * sigma2));
  }
  return c;
}

LinkCoefficients kappa_coefficients(const ScenarioConfig& s, const Vec2& uav_xy) {
  const ChannelSet ch = build_channels(s, uav_xy);
  const EffectiveGains g = mrt_effective_gains(ch, s);
  const double sigma2 = s.noise_w();
  LinkCoefficients c;
  c.bu = g.bu * g.bu / sigma2;
  for (std::size_t k = 0; k < g.ug.size(); ++k) {
    c.direct.push_back(g.ug[k] * g.ug[k] / sigma2);
    c.ris.push_back(g.urg[k] * g.urg[k] / sigma2);
  }
  return c;
}

SnrSet snr_set(const EffectiveGains& gains, double p_bs, const std::vector<double>& p_direct,
               const std::vector<double>& p_ris, double noise_w) {
  SnrSet out;
  out.bu = gains.bu * gains.bu * p_bs / noise_w;
  for (std::size_t k = 0; k < gains.ug.size(); ++k) {
    out.direct.push_back(gains.ug[k] * gains.ug[k] * p_direct.at(k) / noise_w);
    out.ris.push_back(gains.urg[k] * gains.urg[k] * p_ris.at(k) / noise_w);
  }
  return out;
}

double rate(double snr) { return std::log2(1.0 + snr); }

RateSet rates(const SnrSet& snr) {
  RateSet r;
  r.capacity = rate(snr.bu);
  for (std::size_t k = 0; k < snr.direct.size(); ++k) {
    r.direct.push_back(rate(snr.direct[k]));
    r.ris.push_back(rate(snr.ris[k]));
    r.total.push_back(r.direct.back() + r.ris.back());
  }
  return r;
}

double RateSet::aggregate() const {
  double sum = 0.0;
  for (double t : total) sum += t;
  return sum;
}

double slack_snr(double hat_gamma, double slack) {
  if (!(slack > 0.0)) throw DomainError("slack variables must be positive");
  return hat_gamma / slack;
}

}  // namespace risuav
