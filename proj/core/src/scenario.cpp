#include "risuav/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "risuav/error.hpp"

namespace risuav {

namespace pt = boost::property_tree;
using nlohmann::json;

const char* to_string(TrajectoryObjective objective) {
  switch (objective) {
    case TrajectoryObjective::power_sensitivity: return "power_sensitivity";
    case TrajectoryObjective::slack_distance: return "slack_distance";
    case TrajectoryObjective::propulsion: return "propulsion";
  }
  return "unknown";
}

TrajectoryObjective trajectory_objective_from_string(const std::string& name) {
  if (name == "power_sensitivity") return TrajectoryObjective::power_sensitivity;
  if (name == "slack_distance") return TrajectoryObjective::slack_distance;
  if (name == "propulsion") return TrajectoryObjective::propulsion;
  throw ValidationError("solver.trajectory_objective", "unknown objective '" + name + "'");
}

double ScenarioConfig::alpha0() const { return std::pow(10.0, alpha0_db / 20.0); }

double ScenarioConfig::noise_w() const { return std::pow(10.0, (noise_dbm - 30.0) / 10.0); }

Vec3 ScenarioConfig::ue(int k) const {
  const Vec2& p = ue_positions.at(static_cast<std::size_t>(k));
  return {p.x(), p.y(), 0.0};
}

Configuration baseline_scenario() { return Configuration{}; }

namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

bool finite_pos(double v) { return std::isfinite(v) && v > 0.0; }

bool finite_xy(const Vec2& p) { return std::isfinite(p.x()) && std::isfinite(p.y()); }

void validate_grid(const ArrayGrid& g, const char* field) {
  require(g.x >= 1 && g.y >= 1, field, "antenna counts must be at least 1");
}

void validate_spacing(const Spacing& s, const char* field) {
  require(finite_pos(s.x) && finite_pos(s.y), field, "element spacings must be positive");
}

}  // namespace

void validate(const Configuration& config) {
  const ScenarioConfig& s = config.scenario;
  require(s.area.x_max > s.area.x_min && s.area.y_max > s.area.y_min, "scenario.area",
          "expected [x_min, y_min, x_max, y_max] with positive extent");
  require(s.num_ues() >= 1, "scenario.ue_positions", "at least one UE is required");
  for (const auto& p : s.ue_positions) require(finite_xy(p), "scenario.ue_positions", "non-finite coordinate");
  require(finite_xy(s.bs_position), "scenario.bs_position", "non-finite coordinate");
  require(finite_xy(s.ris_position), "scenario.ris_position", "non-finite coordinate");
  require(finite_xy(s.uav_start), "scenario.uav_start", "non-finite coordinate");
  require(finite_xy(s.uav_end), "scenario.uav_end", "non-finite coordinate");
  require(finite_pos(s.bs_height), "scenario.bs_height", "must be positive");
  require(finite_pos(s.ris_height), "scenario.ris_height", "must be positive");
  require(finite_pos(s.uav_height), "scenario.uav_height", "must be positive");
  require(s.uav_height > s.ris_height, "scenario.ris_height",
          "height ordering violated: the RIS must sit below the UAV (ris_height < uav_height)");
  require(s.n_steps >= 2, "scenario.n_steps", "at least 2 timesteps are required");
  require(finite_pos(s.tau), "scenario.tau", "must be positive");
  require(finite_pos(s.v_max), "scenario.v_max", "must be positive");
  require(finite_pos(s.v_acc), "scenario.v_acc", "must be positive");
  require(finite_pos(s.pi_min) && s.pi_min <= s.v_max, "scenario.pi_min", "must lie in (0, v_max]");
  require(static_cast<int>(s.r_min.size()) == s.num_ues(), "scenario.r_min",
          "expected one value per UE or a scalar");
  for (double r : s.r_min) require(finite_pos(r), "scenario.r_min", "must be positive");
  require(std::isfinite(s.energy_budget_multiplier) && s.energy_budget_multiplier >= 1.0,
          "scenario.energy_budget_multiplier", "must be at least 1");
  require(std::isfinite(s.alpha0_db), "scenario.alpha0_db", "must be finite");
  require(std::isfinite(s.noise_dbm), "scenario.noise_dbm", "must be finite");
  require(finite_pos(s.carrier_wavelength), "scenario.carrier_wavelength", "must be positive");
  validate_grid(s.bs_grid, "scenario.bs_grid");
  validate_grid(s.uav_grid, "scenario.uav_grid");
  validate_grid(s.ris_grid, "scenario.ris_grid");
  validate_spacing(s.bs_spacing, "scenario.bs_spacing");
  validate_spacing(s.uav_spacing, "scenario.uav_spacing");
  validate_spacing(s.ris_spacing, "scenario.ris_spacing");
  require(s.p_bs_max_w > 0.0, "scenario.p_bs_max_w", "must be positive (inf for unlimited)");
  require(s.p_uav_max_w > 0.0, "scenario.p_uav_max_w", "must be positive (inf for unlimited)");
  const double reach = s.n_steps * s.tau * s.v_max;
  require((s.uav_end - s.uav_start).norm() <= reach, "scenario.uav_end",
          "endpoint unreachable within n_steps * tau * v_max");

  const EnergyParams& e = config.energy;
  require(finite_pos(e.omega), "energy.omega", "must be positive");
  require(finite_pos(e.rotor_radius), "energy.rotor_radius", "must be positive");
  require(finite_pos(e.air_density), "energy.air_density", "must be positive");
  require(finite_pos(e.rotor_solidity), "energy.rotor_solidity", "must be positive");
  require(finite_pos(e.rotor_disc_area), "energy.rotor_disc_area", "must be positive");
  require(finite_pos(e.induced_velocity), "energy.induced_velocity", "must be positive");
  require(finite_pos(e.fuselage_drag), "energy.fuselage_drag", "must be positive");
  require(finite_pos(e.blade_power), "energy.blade_power", "must be positive");
  require(finite_pos(e.induced_power), "energy.induced_power", "must be positive");

  const SimControls& c = config.controls;
  require(c.max_iterations >= 1, "solver.max_iterations", "must be at least 1");
  require(finite_pos(c.convergence_tol), "solver.convergence_tol", "must be positive");
  require(finite_pos(c.solver_tol), "solver.solver_tol", "must be positive");
  require(c.inner_max_iterations >= 1, "solver.inner_max_iterations", "must be at least 1");
  require(finite_pos(c.trust_radius), "solver.trust_radius", "must be positive");
  require(c.trust_shrink > 0.0 && c.trust_shrink < 1.0, "solver.trust_shrink", "must lie in (0, 1)");
  require(c.trust_retries >= 0, "solver.trust_retries", "must be non-negative");
  require(std::isfinite(c.power_margin) && c.power_margin >= 0.0, "solver.power_margin", "must be non-negative");
  require(c.weight_direct >= 0.0 && c.weight_ris >= 0.0 && c.weight_bs >= 0.0, "solver.weight_direct",
          "slack weights must be non-negative");

  const SweepPlan& w = config.sweep;
  for (int k : w.k_list) require(k >= 1, "sweep.k_list", "UE counts must be at least 1");
  for (double r : w.r_list) require(finite_pos(r), "sweep.r_list", "rates must be positive");
  for (double m : w.multipliers) require(std::isfinite(m) && m >= 1.0, "sweep.multipliers", "must be at least 1");
  require(w.draws >= 1, "sweep.draws", "must be at least 1");
  require(finite_pos(w.draw_min) && w.draw_max >= w.draw_min, "sweep.draw_max",
          "expected 0 < draw_min <= draw_max");
}

namespace {

// Typed access to one INI section; every key must be consumed.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool has(const std::string& key) const { return tree_ && tree_->find(key) != tree_->not_found(); }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    used_.insert(key);
    const std::string raw = tree_->get<std::string>(key);
    try {
      convert(parse_value(raw), out);
    } catch (const json::exception& e) {
      throw ParseError(name_ + "." + key + ": cannot interpret '" + raw + "' (" + e.what() + ")");
    }
  }

  // A scalar is shorthand for the same value repeated `count` times.
  void read_broadcast(const std::string& key, std::vector<double>& out, int count) {
    if (!has(key)) {
      if (static_cast<int>(out.size()) != count) out.assign(static_cast<std::size_t>(count), out.front());
      return;
    }
    used_.insert(key);
    const std::string raw = tree_->get<std::string>(key);
    try {
      const json j = parse_value(raw);
      if (j.is_array()) {
        convert(j, out);
      } else {
        double v = 0.0;
        convert(j, v);
        out.assign(static_cast<std::size_t>(count), v);
      }
    } catch (const json::exception& e) {
      throw ParseError(name_ + "." + key + ": cannot interpret '" + raw + "' (" + e.what() + ")");
    }
  }

  void check_unused() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!child.empty()) throw ParseError("nested key under [" + name_ + "]: " + key);
      if (!used_.count(key)) throw ParseError("unknown key [" + name_ + "] " + key);
    }
  }

 private:
  static json parse_value(const std::string& raw) {
    if (raw == "inf" || raw == "+inf") return json(std::numeric_limits<double>::infinity());
    return json::parse(raw);
  }

  static void convert(const json& j, double& out) {
    if (j.is_number_float() && std::isinf(j.get<double>())) {
      out = j.get<double>();
      return;
    }
    if (!j.is_number()) throw json::type_error::create(302, "expected a number", &j);
    out = j.get<double>();
  }
  static void convert(const json& j, int& out) {
    if (!j.is_number_integer()) throw json::type_error::create(302, "expected an integer", &j);
    out = j.get<int>();
  }
  static void convert(const json& j, std::uint64_t& out) {
    if (!j.is_number_unsigned()) throw json::type_error::create(302, "expected a non-negative integer", &j);
    out = j.get<std::uint64_t>();
  }
  static void convert(const json& j, bool& out) {
    if (!j.is_boolean()) throw json::type_error::create(302, "expected true or false", &j);
    out = j.get<bool>();
  }
  static void convert(const json& j, std::string& out) {
    if (!j.is_string()) throw json::type_error::create(302, "expected a quoted string", &j);
    out = j.get<std::string>();
  }
  static void convert(const json& j, Vec2& out) {
    if (!j.is_array() || j.size() != 2) throw json::type_error::create(302, "expected [x, y]", &j);
    convert(j[0], out.x());
    convert(j[1], out.y());
  }
  static void convert(const json& j, ArrayGrid& out) {
    if (!j.is_array() || j.size() != 2) throw json::type_error::create(302, "expected [count_x, count_y]", &j);
    convert(j[0], out.x);
    convert(j[1], out.y);
  }
  static void convert(const json& j, Spacing& out) {
    if (!j.is_array() || j.size() != 2) throw json::type_error::create(302, "expected [dx, dy]", &j);
    convert(j[0], out.x);
    convert(j[1], out.y);
  }
  static void convert(const json& j, Rect& out) {
    if (!j.is_array() || j.size() != 4)
      throw json::type_error::create(302, "expected [x_min, y_min, x_max, y_max]", &j);
    convert(j[0], out.x_min);
    convert(j[1], out.y_min);
    convert(j[2], out.x_max);
    convert(j[3], out.y_max);
  }
  template <typename T>
  static void convert(const json& j, std::vector<T>& out) {
    if (!j.is_array()) throw json::type_error::create(302, "expected an array", &j);
    out.clear();
    for (const auto& e : j) {
      T v{};
      convert(e, v);
      out.push_back(v);
    }
  }

  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

}  // namespace

Configuration parse_scenario(const std::string& text) {
  pt::ptree root;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(std::string("malformed configuration: ") + e.what());
  }
  static const std::set<std::string> known{"scenario", "energy", "solver", "sweep"};
  for (const auto& [name, child] : root) {
    if (!known.count(name)) throw ParseError("unknown section [" + name + "]");
  }
  auto section = [&](const char* name) {
    const auto it = root.find(name);
    return Section(it == root.not_found() ? nullptr : &it->second, name);
  };

  Configuration cfg = baseline_scenario();
  ScenarioConfig& s = cfg.scenario;
  Section sc = section("scenario");
  sc.read("area", s.area);
  sc.read("ue_positions", s.ue_positions);
  sc.read("bs_position", s.bs_position);
  sc.read("bs_height", s.bs_height);
  sc.read("ris_position", s.ris_position);
  sc.read("ris_height", s.ris_height);
  sc.read("uav_start", s.uav_start);
  sc.read("uav_end", s.uav_end);
  sc.read("uav_height", s.uav_height);
  sc.read("n_steps", s.n_steps);
  sc.read("tau", s.tau);
  sc.read("v_max", s.v_max);
  sc.read("v_acc", s.v_acc);
  sc.read("pi_min", s.pi_min);
  sc.read_broadcast("r_min", s.r_min, s.num_ues());
  sc.read("energy_budget_multiplier", s.energy_budget_multiplier);
  sc.read("alpha0_db", s.alpha0_db);
  sc.read("noise_dbm", s.noise_dbm);
  sc.read("carrier_wavelength", s.carrier_wavelength);
  const Spacing half{s.carrier_wavelength / 2.0, s.carrier_wavelength / 2.0};
  s.bs_spacing = s.uav_spacing = s.ris_spacing = half;
  sc.read("bs_grid", s.bs_grid);
  sc.read("uav_grid", s.uav_grid);
  sc.read("ris_grid", s.ris_grid);
  sc.read("bs_spacing", s.bs_spacing);
  sc.read("uav_spacing", s.uav_spacing);
  sc.read("ris_spacing", s.ris_spacing);
  sc.read("per_hop_path_loss", s.per_hop_path_loss);
  sc.read("tie_link_powers", s.tie_link_powers);
  sc.read("p_bs_max_w", s.p_bs_max_w);
  sc.read("p_uav_max_w", s.p_uav_max_w);
  sc.check_unused();

  EnergyParams& e = cfg.energy;
  Section en = section("energy");
  en.read("omega", e.omega);
  en.read("rotor_radius", e.rotor_radius);
  en.read("air_density", e.air_density);
  en.read("rotor_solidity", e.rotor_solidity);
  en.read("rotor_disc_area", e.rotor_disc_area);
  en.read("induced_velocity", e.induced_velocity);
  en.read("fuselage_drag", e.fuselage_drag);
  en.read("blade_power", e.blade_power);
  en.read("induced_power", e.induced_power);
  en.check_unused();

  SimControls& c = cfg.controls;
  Section so = section("solver");
  so.read("max_iterations", c.max_iterations);
  so.read("convergence_tol", c.convergence_tol);
  so.read("solver_tol", c.solver_tol);
  so.read("rng_seed", c.rng_seed);
  so.read("inner_max_iterations", c.inner_max_iterations);
  so.read("trust_radius", c.trust_radius);
  so.read("trust_shrink", c.trust_shrink);
  so.read("trust_retries", c.trust_retries);
  so.read("power_margin", c.power_margin);
  std::string objective = to_string(c.trajectory_objective);
  so.read("trajectory_objective", objective);
  c.trajectory_objective = trajectory_objective_from_string(objective);
  so.read("weight_direct", c.weight_direct);
  so.read("weight_ris", c.weight_ris);
  so.read("weight_bs", c.weight_bs);
  so.check_unused();

  SweepPlan& w = cfg.sweep;
  Section sw = section("sweep");
  sw.read("k_list", w.k_list);
  sw.read("r_list", w.r_list);
  sw.read("ris_list", w.ris_list);
  sw.read("multipliers", w.multipliers);
  sw.read("draws", w.draws);
  sw.read("draw_min", w.draw_min);
  sw.read("draw_max", w.draw_max);
  sw.check_unused();

  validate(cfg);
  return cfg;
}

Configuration load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open configuration file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

namespace {

// Shortest representation that parses back to the same double.
std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

std::string num(int v) { return std::to_string(v); }

std::string pair(double a, double b) { return "[" + num(a) + ", " + num(b) + "]"; }
std::string pair(const Vec2& p) { return pair(p.x(), p.y()); }

template <typename T>
std::string list(const std::vector<T>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_same_v<T, Vec2>) s += pair(v[i]);
    else s += num(v[i]);
  }
  return s + "]";
}

}  // namespace

std::string serialize(const Configuration& cfg) {
  const ScenarioConfig& s = cfg.scenario;
  const EnergyParams& e = cfg.energy;
  const SimControls& c = cfg.controls;
  const SweepPlan& w = cfg.sweep;
  std::ostringstream o;
  o << "[scenario]\n";
  o << "area = [" << num(s.area.x_min) << ", " << num(s.area.y_min) << ", " << num(s.area.x_max) << ", "
    << num(s.area.y_max) << "]\n";
  o << "ue_positions = " << list(s.ue_positions) << '\n';
  o << "bs_position = " << pair(s.bs_position) << '\n';
  o << "bs_height = " << num(s.bs_height) << '\n';
  o << "ris_position = " << pair(s.ris_position) << '\n';
  o << "ris_height = " << num(s.ris_height) << '\n';
  o << "uav_start = " << pair(s.uav_start) << '\n';
  o << "uav_end = " << pair(s.uav_end) << '\n';
  o << "uav_height = " << num(s.uav_height) << '\n';
  o << "n_steps = " << num(s.n_steps) << '\n';
  o << "tau = " << num(s.tau) << '\n';
  o << "v_max = " << num(s.v_max) << '\n';
  o << "v_acc = " << num(s.v_acc) << '\n';
  o << "pi_min = " << num(s.pi_min) << '\n';
  o << "r_min = " << list(s.r_min) << '\n';
  o << "energy_budget_multiplier = " << num(s.energy_budget_multiplier) << '\n';
  o << "alpha0_db = " << num(s.alpha0_db) << '\n';
  o << "noise_dbm = " << num(s.noise_dbm) << '\n';
  o << "carrier_wavelength = " << num(s.carrier_wavelength) << '\n';
  o << "bs_grid = [" << s.bs_grid.x << ", " << s.bs_grid.y << "]\n";
  o << "uav_grid = [" << s.uav_grid.x << ", " << s.uav_grid.y << "]\n";
  o << "ris_grid = [" << s.ris_grid.x << ", " << s.ris_grid.y << "]\n";
  o << "bs_spacing = " << pair(s.bs_spacing.x, s.bs_spacing.y) << '\n';
  o << "uav_spacing = " << pair(s.uav_spacing.x, s.uav_spacing.y) << '\n';
  o << "ris_spacing = " << pair(s.ris_spacing.x, s.ris_spacing.y) << '\n';
  o << "per_hop_path_loss = " << (s.per_hop_path_loss ? "true" : "false") << '\n';
  o << "tie_link_powers = " << (s.tie_link_powers ? "true" : "false") << '\n';
  o << "p_bs_max_w = " << num(s.p_bs_max_w) << '\n';
  o << "p_uav_max_w = " << num(s.p_uav_max_w) << '\n';

  o << "\n[energy]\n";
  o << "omega = " << num(e.omega) << '\n';
  o << "rotor_radius = " << num(e.rotor_radius) << '\n';
  o << "air_density = " << num(e.air_density) << '\n';
  o << "rotor_solidity = " << num(e.rotor_solidity) << '\n';
  o << "rotor_disc_area = " << num(e.rotor_disc_area) << '\n';
  o << "induced_velocity = " << num(e.induced_velocity) << '\n';
  o << "fuselage_drag = " << num(e.fuselage_drag) << '\n';
  o << "blade_power = " << num(e.blade_power) << '\n';
  o << "induced_power = " << num(e.induced_power) << '\n';

  o << "\n[solver]\n";
  o << "max_iterations = " << c.max_iterations << '\n';
  o << "convergence_tol = " << num(c.convergence_tol) << '\n';
  o << "solver_tol = " << num(c.solver_tol) << '\n';
  o << "rng_seed = " << c.rng_seed << '\n';
  o << "inner_max_iterations = " << c.inner_max_iterations << '\n';
  o << "trust_radius = " << num(c.trust_radius) << '\n';
  o << "trust_shrink = " << num(c.trust_shrink) << '\n';
  o << "trust_retries = " << c.trust_retries << '\n';
  o << "power_margin = " << num(c.power_margin) << '\n';
  o << "trajectory_objective = \"" << to_string(c.trajectory_objective) << "\"\n";
  o << "weight_direct = " << num(c.weight_direct) << '\n';
  o << "weight_ris = " << num(c.weight_ris) << '\n';
  o << "weight_bs = " << num(c.weight_bs) << '\n';

  o << "\n[sweep]\n";
  o << "k_list = " << list(w.k_list) << '\n';
  o << "r_list = " << list(w.r_list) << '\n';
  o << "ris_list = " << list(w.ris_list) << '\n';
  o << "multipliers = " << list(w.multipliers) << '\n';
  o << "draws = " << w.draws << '\n';
  o << "draw_min = " << num(w.draw_min) << '\n';
  o << "draw_max = " << num(w.draw_max) << '\n';
  return o.str();
}

}  // namespace risuav
