#include <doctest.h>

#include <cmath>
#include <random>

#include "risuav/error.hpp"
#include "risuav/link_budget.hpp"

using namespace risuav;

TEST_CASE("SNR from amplitude gains") {
  EffectiveGains g;
  g.bu = 2.0;
  g.ug = {1.0};
  g.urg = {0.5};
  SnrSet zero = snr_set(g, 0.0, {0.0}, {0.0}, 1.0);
  CHECK(zero.bu == 0.0);
  CHECK(zero.direct[0] == 0.0);
  const SnrSet unit = snr_set(g, 0.25, {1.0}, {4.0}, 1.0);
  CHECK(unit.bu == doctest::Approx(1.0));
  CHECK(unit.direct[0] == doctest::Approx(1.0));
  CHECK(unit.ris[0] == doctest::Approx(1.0));
}

TEST_CASE("sixteen-antenna BS at 100 m") {
  EffectiveGains g;
  g.bu = std::sqrt(16.0) * std::sqrt(std::pow(10.0, -6.1)) / 100.0;
  const SnrSet s = snr_set(g, 1.0, {}, {}, std::pow(10.0, -20.4));
  CHECK(s.bu == doctest::Approx(3.19e11).epsilon(2e-3));
  CHECK(s.bu == doctest::Approx(16.0 * std::pow(10.0, 10.3)).epsilon(1e-12));
}

TEST_CASE("spectral efficiency") {
  CHECK(rate(0.0) == 0.0);
  CHECK(rate(1.0) == doctest::Approx(1.0));
  SnrSet s;
  s.bu = 15.0;
  s.direct = {3.0, 0.0};
  s.ris = {1.0, 7.0};
  const RateSet r = rates(s);
  CHECK(r.capacity == doctest::Approx(4.0));
  CHECK(r.total[0] == doctest::Approx(3.0));
  CHECK(r.total[1] == doctest::Approx(3.0));
  CHECK(r.aggregate() == doctest::Approx(6.0));
}

TEST_CASE("kappa follows the inverse-square law") {
  ScenarioConfig near;
  near.ue_positions = {{100.0, 100.0}};
  near.r_min = {0.257};
  near.uav_height = 20.0;
  // UAV straight above, then at twice the 3-D distance by raising the UE offset
  const Vec2 above(100.0, 100.0);
  const double k1 = kappa_coefficients(near, above).direct[0];
  const Vec2 farther(100.0 + std::sqrt(4.0 * 400.0 - 400.0), 100.0);
  const double k2 = kappa_coefficients(near, farther).direct[0];
  CHECK(k2 == doctest::Approx(k1 / 4.0).epsilon(1e-12));
}

TEST_CASE("slack coefficients reproduce kappa at the true distances") {
  const ScenarioConfig s;
  const SlackCoefficients hat = slack_coefficients(s);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(0.0, 500.0);
  for (int t = 0; t < 50; ++t) {
    const Vec2 xy(d(rng), d(rng));
    const Vec3 u = s.uav(xy);
    const LinkCoefficients kap = kappa_coefficients(s, xy);
    CHECK(kap.bu == doctest::Approx(hat.bu / (u - s.bs()).squaredNorm()).epsilon(1e-12));
    for (int k = 0; k < s.num_ues(); ++k) {
      CHECK(kap.direct[k] == doctest::Approx(hat.direct[k] / (u - s.ue(k)).squaredNorm()).epsilon(1e-12));
      CHECK(kap.ris[k] == doctest::Approx(hat.ris[k] / (u - s.ris()).squaredNorm()).epsilon(1e-12));
    }
  }
}

TEST_CASE("slack SNR surrogate") {
  const ScenarioConfig s;
  const SlackCoefficients hat = slack_coefficients(s);
  const Vec2 xy(140.0, 90.0);
  const double lam = (s.uav(xy) - s.ue(0)).squaredNorm();
  const double p = 1e-9;
  const double exact = p * kappa_coefficients(s, xy).direct[0];
  CHECK(slack_snr(p * hat.direct[0], lam) == doctest::Approx(exact).epsilon(1e-12));
  CHECK(slack_snr(p * hat.direct[0], 2 * lam) == doctest::Approx(exact / 2).epsilon(1e-12));
  CHECK(slack_snr(p * hat.direct[0], 1.01 * lam) <= exact);
  CHECK_THROWS_AS(slack_snr(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(slack_snr(1.0, -3.0), DomainError);
}

TEST_CASE("per-hop path loss weakens only the cascade") {
  ScenarioConfig a;
  ScenarioConfig b = a;
  b.per_hop_path_loss = true;
  const LinkCoefficients ka = kappa_coefficients(a, {200.0, 300.0});
  const LinkCoefficients kb = kappa_coefficients(b, {200.0, 300.0});
  CHECK(kb.bu == ka.bu);
  CHECK(kb.direct[1] == ka.direct[1]);
  CHECK(kb.ris[1] == doctest::Approx(ka.ris[1] * a.alpha0() * a.alpha0()).epsilon(1e-12));
}
