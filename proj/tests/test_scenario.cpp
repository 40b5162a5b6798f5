#include <doctest.h>

#include <cmath>
#include <string>

#include "risuav/error.hpp"
#include "risuav/scenario.hpp"

using namespace risuav;

TEST_CASE("baseline deployment") {
  const Configuration cfg = baseline_scenario();
  const ScenarioConfig& s = cfg.scenario;
  REQUIRE(s.num_ues() == 3);
  CHECK(s.ue_positions[0] == Vec2(20, 450));
  CHECK(s.ue_positions[1] == Vec2(250, 0));
  CHECK(s.ue_positions[2] == Vec2(500, 200));
  CHECK(s.bs_position == Vec2(0, 0));
  CHECK(s.uav_height == 20.0);
  CHECK(s.bs_height == 15.0);
  CHECK(s.ris_height == 10.0);
  CHECK(s.v_max == 20.0);
  CHECK(s.v_acc == 4.0);
  CHECK(s.n_steps == 50);
  CHECK(s.ris_grid == ArrayGrid{10, 10});
  CHECK(s.ris_spacing.x == doctest::Approx(s.carrier_wavelength / 2));
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("reference gain, noise and rotor constants") {
  const Configuration cfg = baseline_scenario();
  CHECK(20 * std::log10(cfg.scenario.alpha0()) == doctest::Approx(-61.0));
  CHECK(10 * std::log10(cfg.scenario.noise_w()) + 30 == doctest::Approx(-174.0));
  CHECK(cfg.energy.blade_power == 79.86);
  CHECK(cfg.energy.induced_power == 88.63);
}

TEST_CASE("file without n_steps falls back to 50") {
  const Configuration cfg = parse_scenario("[scenario]\nv_max = 20\n");
  CHECK(cfg.scenario.n_steps == 50);
}

TEST_CASE("RIS above the UAV is rejected with the height field named") {
  Configuration cfg = baseline_scenario();
  cfg.scenario.ris_height = 30.0;
  try {
    validate(cfg);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "scenario.ris_height");
    CHECK(std::string(e.what()).find("height ordering") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario("[scenario]\nris_height = 30\n"), ValidationError);
}

TEST_CASE("scalar rate target is broadcast to every UE") {
  const Configuration cfg = parse_scenario("[scenario]\nr_min = 0.5\n");
  REQUIRE(cfg.scenario.r_min.size() == 3);
  for (double r : cfg.scenario.r_min) CHECK(r == 0.5);
}

TEST_CASE("serialize then parse is the identity") {
  Configuration cfg = baseline_scenario();
  cfg.scenario.r_min = {0.1, 0.2 / 3.0, 0.757};
  cfg.scenario.ue_positions[1] = Vec2(1.0 / 3.0, 250.125);
  cfg.scenario.p_uav_max_w = 0.25;
  cfg.controls.trajectory_objective = TrajectoryObjective::propulsion;
  cfg.controls.power_margin = 0.3;
  cfg.sweep.draws = 7;
  const Configuration back = parse_scenario(serialize(cfg));
  CHECK(back.scenario == cfg.scenario);
  CHECK(back.energy == cfg.energy);
  CHECK(back.sweep == cfg.sweep);
  CHECK(back.controls.trajectory_objective == TrajectoryObjective::propulsion);
  CHECK(back.controls.power_margin == 0.3);
  CHECK(serialize(back) == serialize(cfg));
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(parse_scenario("[scenario\nv_max = 1\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("[scenario]\nv_max = fast\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("[scenario]\nwingspan = 3\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("[payload]\nmass = 3\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("[scenario]\nris_grid = [10]\n"), ParseError);
  CHECK_THROWS_AS(parse_scenario("[solver]\ntrajectory_objective = \"fastest\"\n"), ValidationError);
  CHECK_THROWS_AS(load_scenario("/nonexistent/risuav.ini"), ParseError);
}

TEST_CASE("invariant violations name their field") {
  auto field_of = [](Configuration cfg) -> std::string {
    try {
      validate(cfg);
    } catch (const ValidationError& e) {
      return e.field();
    }
    return "";
  };
  Configuration c = baseline_scenario();
  c.scenario.r_min.pop_back();
  CHECK(field_of(c) == "scenario.r_min");
  c = baseline_scenario();
  c.scenario.energy_budget_multiplier = 0.9;
  CHECK(field_of(c) == "scenario.energy_budget_multiplier");
  c = baseline_scenario();
  c.scenario.uav_end = Vec2(5000, 5000);
  CHECK(field_of(c) == "scenario.uav_end");
  c = baseline_scenario();
  c.controls.trust_shrink = 1.0;
  CHECK(field_of(c) == "solver.trust_shrink");
}
