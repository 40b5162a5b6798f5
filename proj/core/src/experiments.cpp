#include "risuav/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <thread>

#include "risuav/energy.hpp"
#include "risuav/error.hpp"

namespace risuav {

namespace fs = std::filesystem;

int exit_code_for(RunStatus status) {
  switch (status) {
    case RunStatus::converged:
    case RunStatus::max_iter: return exit_ok;
    case RunStatus::infeasible: return exit_infeasible;
    case RunStatus::numerical_failure: return exit_solver_failure;
  }
  return exit_solver_failure;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

std::string quote_if_needed(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cells.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else {
      cells.back() += c;
    }
  }
  return cells;
}

std::string str(int v) { return std::to_string(v); }

}  // namespace

std::string CsvTable::to_string() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += quote_if_needed(cells[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

CsvTable CsvTable::parse(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      t.header = split_csv_line(line);
      first = false;
    } else {
      t.rows.push_back(split_csv_line(line));
    }
  }
  return t;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("no CSV column named " + name);
  return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const std::string& cell = rows.at(row).at(column(name));
  if (cell.empty()) return std::nan("");
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{}) throw std::invalid_argument("not a number in column " + name + ": " + cell);
  return v;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

RunTables tabulate(const ScenarioConfig& s, const EnergyParams& e, const OptimizationResult& r) {
  RunTables t;
  const Trajectory& tr = r.trajectory;
  const int K = s.num_ues();

  t.trajectory.header = {"n", "x", "y", "vx", "vy", "speed", "propulsion_W"};
  for (int n = 0; n < tr.steps(); ++n) {
    const Vec2& z = tr.position(n);
    const Vec2& v = tr.v[static_cast<std::size_t>(n)];
    const double speed = v.norm();
    const double p = speed >= s.pi_min ? propulsion_power(speed, e, s.pi_min) : std::nan("");
    t.trajectory.rows.push_back({str(n + 1), format_number(z.x()), format_number(z.y()), format_number(v.x()),
                                 format_number(v.y()), format_number(speed), format_number(p)});
  }

  t.power.header = {"n", "p_bs"};
  for (int k = 0; k < K; ++k) t.power.header.push_back("p_" + str(k + 1) + "_direct");
  for (int k = 0; k < K; ++k) t.power.header.push_back("p_" + str(k + 1) + "_ris");
  for (std::size_t n = 0; n < r.powers.p_bs.size(); ++n) {
    std::vector<std::string> row{str(static_cast<int>(n) + 1), format_number(r.powers.p_bs[n])};
    for (int k = 0; k < K; ++k) row.push_back(format_number(r.powers.p_direct[static_cast<std::size_t>(k)][n]));
    for (int k = 0; k < K; ++k) row.push_back(format_number(r.powers.p_ris[static_cast<std::size_t>(k)][n]));
    t.power.rows.push_back(std::move(row));
  }

  t.iterations.header = {"j", "p_total", "violation", "trust_radius"};
  for (const IterationRecord& it : r.trace)
    t.iterations.rows.push_back({str(it.iteration), format_number(it.p_total), format_number(it.max_violation),
                                 format_number(it.trust_radius)});

  const bool has_powers = !r.powers.p_bs.empty() &&
                          (r.state.status == RunStatus::converged || r.state.status == RunStatus::max_iter);
  t.summary.header = {"status", "P_total", "energy_J", "iterations", "energy_budget_J", "message"};
  t.summary.rows.push_back({to_string(r.state.status), has_powers ? format_number(r.powers.total()) : "",
                            format_number(r.energy_used), str(r.state.iteration), format_number(r.energy_budget),
                            r.state.message});

  t.iterates.header = {"j", "n", "x", "y"};
  for (std::size_t j = 0; j < r.iterates.size(); ++j)
    for (std::size_t n = 0; n < r.iterates[j].z.size(); ++n)
      t.iterates.rows.push_back({str(static_cast<int>(j)), str(static_cast<int>(n)),
                                 format_number(r.iterates[j].z[n].x()), format_number(r.iterates[j].z[n].y())});

  t.nodes.header = {"kind", "index", "x", "y"};
  t.nodes.rows.push_back({"bs", "0", format_number(s.bs_position.x()), format_number(s.bs_position.y())});
  t.nodes.rows.push_back({"ris", "0", format_number(s.ris_position.x()), format_number(s.ris_position.y())});
  for (int k = 0; k < K; ++k) {
    const Vec2& p = s.ue_positions[static_cast<std::size_t>(k)];
    t.nodes.rows.push_back({"ue", str(k + 1), format_number(p.x()), format_number(p.y())});
  }
  return t;
}

namespace {

struct Frame {
  double x0, y0, x1, y1;
  static constexpr double kSize = 600.0;
  double sx(double x) const { return 40.0 + (x - x0) / (x1 - x0) * (kSize - 80.0); }
  double sy(double y) const { return kSize - 40.0 - (y - y0) / (y1 - y0) * (kSize - 80.0); }
};

Frame frame_for(const std::vector<Vec2>& pts) {
  double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts.front().x();
    y0 = y1 = pts.front().y();
    for (const Vec2& p : pts) {
      x0 = std::min(x0, p.x());
      x1 = std::max(x1, p.x());
      y0 = std::min(y0, p.y());
      y1 = std::max(y1, p.y());
    }
  }
  const double span = std::max({x1 - x0, y1 - y0, 1.0});
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  return {cx - 0.55 * span, cy - 0.55 * span, cx + 0.55 * span, cy + 0.55 * span};
}

std::vector<Vec2> node_points(const CsvTable& nodes) {
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < nodes.rows.size(); ++i) pts.emplace_back(nodes.number(i, "x"), nodes.number(i, "y"));
  return pts;
}

std::string svg_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

void draw_nodes(std::ostringstream& o, const CsvTable& nodes, const Frame& f) {
  for (std::size_t i = 0; i < nodes.rows.size(); ++i) {
    const std::string& kind = nodes.rows[i][nodes.column("kind")];
    const double x = f.sx(nodes.number(i, "x")), y = f.sy(nodes.number(i, "y"));
    if (kind == "bs") {
      o << "<rect x=\"" << svg_number(x - 6) << "\" y=\"" << svg_number(y - 6)
        << "\" width=\"12\" height=\"12\" fill=\"#1f4e9c\"/>\n";
    } else if (kind == "ris") {
      o << "<polygon points=\"" << svg_number(x) << ',' << svg_number(y - 7) << ' ' << svg_number(x + 7) << ','
        << svg_number(y) << ' ' << svg_number(x) << ',' << svg_number(y + 7) << ' ' << svg_number(x - 7) << ','
        << svg_number(y) << "\" fill=\"#2e8b57\"/>\n";
    } else {
      o << "<circle cx=\"" << svg_number(x) << "\" cy=\"" << svg_number(y) << "\" r=\"5\" fill=\"#c0392b\"/>\n";
    }
    o << "<text x=\"" << svg_number(x + 8) << "\" y=\"" << svg_number(y - 8) << "\" font-size=\"11\">" << kind
      << (kind == "ue" ? " " + nodes.rows[i][nodes.column("index")] : "") << "</text>\n";
  }
}

std::string svg_open() {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n"
    << "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n";
  return o.str();
}

std::string polyline(const std::vector<Vec2>& pts, const Frame& f, const std::string& colour, double width) {
  std::ostringstream o;
  o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"" << svg_number(width) << "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i)
    o << (i ? " " : "") << svg_number(f.sx(pts[i].x())) << ',' << svg_number(f.sy(pts[i].y()));
  o << "\"/>\n";
  return o.str();
}

}  // namespace

std::string render_iterates_svg(const CsvTable& iterates, const CsvTable& nodes) {
  std::map<int, std::vector<Vec2>> paths;
  for (std::size_t i = 0; i < iterates.rows.size(); ++i)
    paths[static_cast<int>(iterates.number(i, "j"))].emplace_back(iterates.number(i, "x"), iterates.number(i, "y"));
  std::vector<Vec2> all = node_points(nodes);
  for (const auto& [j, p] : paths) all.insert(all.end(), p.begin(), p.end());
  const Frame f = frame_for(all);

  std::ostringstream o;
  o << svg_open();
  const std::size_t count = paths.size();
  std::size_t idx = 0;
  for (const auto& [j, p] : paths) {
    // grey ramp from light (first) to black (last)
    const double t = count > 1 ? static_cast<double>(idx) / static_cast<double>(count - 1) : 1.0;
    const int level = static_cast<int>(std::lround(210.0 * (1.0 - t)));
    char colour[8];
    std::snprintf(colour, sizeof colour, "#%02x%02x%02x", level, level, level);
    o << polyline(p, f, colour, idx + 1 == count ? 2.5 : 1.2);
    ++idx;
  }
  draw_nodes(o, nodes, f);
  o << "</svg>\n";
  return o.str();
}

std::string render_paths_svg(const CsvTable& paths, const CsvTable& nodes) {
  static const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d"};
  std::vector<std::string> order;
  std::map<std::string, std::vector<Vec2>> by_label;
  const std::size_t lc = paths.column("label");
  for (std::size_t i = 0; i < paths.rows.size(); ++i) {
    const std::string& label = paths.rows[i][lc];
    if (!by_label.count(label)) order.push_back(label);
    by_label[label].emplace_back(paths.number(i, "x"), paths.number(i, "y"));
  }
  std::vector<Vec2> all = node_points(nodes);
  for (const auto& [l, p] : by_label) all.insert(all.end(), p.begin(), p.end());
  const Frame f = frame_for(all);

  std::ostringstream o;
  o << svg_open();
  for (std::size_t i = 0; i < order.size(); ++i) {
    const char* colour = palette[i % std::size(palette)];
    o << polyline(by_label[order[i]], f, colour, 1.8);
    o << "<text x=\"460\" y=\"" << 20 + 16 * i << "\" font-size=\"12\" fill=\"" << colour << "\">" << order[i]
      << "</text>\n";
  }
  draw_nodes(o, nodes, f);
  o << "</svg>\n";
  return o.str();
}

namespace {

struct LinkAverage {
  double los = 0.0;
  double ris = 0.0;
};

LinkAverage link_averages(const PowerSchedule& p) {
  LinkAverage a;
  std::size_t count = 0;
  for (std::size_t k = 0; k < p.p_direct.size(); ++k)
    for (std::size_t n = 0; n < p.p_direct[k].size(); ++n) {
      a.los += p.p_direct[k][n];
      a.ris += p.p_ris[k][n];
      ++count;
    }
  if (count) {
    a.los /= static_cast<double>(count);
    a.ris /= static_cast<double>(count);
  }
  return a;
}

RunOutcome outcome_of(const ScenarioConfig& s, const OptimizationResult& r) {
  RunOutcome o;
  o.status = r.state.status;
  o.message = r.state.message;
  const bool usable = o.status == RunStatus::converged || o.status == RunStatus::max_iter;
  o.p_total = usable ? r.powers.total() : std::nan("");
  const LinkAverage avg = link_averages(r.powers);
  o.avg_p_los = usable ? avg.los : std::nan("");
  o.avg_p_ris = usable ? avg.ris : std::nan("");
  o.path_length = r.trajectory.path_length();
  o.energy_used = r.energy_used;
  o.energy_budget = r.energy_budget;
  o.final_path.header = {"n", "x", "y"};
  for (std::size_t n = 0; n < r.trajectory.z.size(); ++n)
    o.final_path.rows.push_back({str(static_cast<int>(n)), format_number(r.trajectory.z[n].x()),
                                 format_number(r.trajectory.z[n].y())});
  (void)s;
  return o;
}

OptimizationResult optimize(const Configuration& config) {
  return run_joint_optimization(config.scenario, config.energy, config.controls);
}

void write_outputs(const fs::path& out_dir, const std::vector<std::pair<std::string, std::string>>& files) {
  fs::create_directories(out_dir);
  for (const auto& [name, content] : files) write_file_atomic(out_dir / name, content);
}

}  // namespace

RunOutcome run_scenario(const Configuration& config, const fs::path& out_dir) {
  validate(config);
  const OptimizationResult r = optimize(config);
  const RunTables t = tabulate(config.scenario, config.energy, r);
  write_outputs(out_dir, {{"trajectory.csv", t.trajectory.to_string()},
                          {"power.csv", t.power.to_string()},
                          {"iterations.csv", t.iterations.to_string()},
                          {"summary.csv", t.summary.to_string()},
                          {"iterates.csv", t.iterates.to_string()},
                          {"nodes.csv", t.nodes.to_string()},
                          {"trajectory.svg", render_iterates_svg(t.iterates, t.nodes)}});
  return outcome_of(config.scenario, r);
}

namespace {

template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  const int workers = std::max(1, std::min(jobs, count));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_lock);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

// Runs a cell, turning model-domain errors into a recorded failure.
RunOutcome run_cell(const Configuration& cfg, const fs::path* dir) {
  try {
    if (dir) return run_scenario(cfg, *dir);
    validate(cfg);
    return outcome_of(cfg.scenario, optimize(cfg));
  } catch (const DomainError& e) {
    RunOutcome o;
    o.status = RunStatus::infeasible;
    o.p_total = o.avg_p_los = o.avg_p_ris = std::nan("");
    o.message = e.what();
    return o;
  }
}

int sweep_exit(const std::vector<RunOutcome>& cells) {
  for (const RunOutcome& c : cells)
    if (c.status == RunStatus::numerical_failure) return exit_solver_failure;
  return exit_ok;
}

void append_path(CsvTable& paths, const std::string& label, const CsvTable& path) {
  for (const auto& row : path.rows) paths.rows.push_back({label, row[0], row[1], row[2]});
}

CsvTable base_nodes(const ScenarioConfig& s) {
  CsvTable nodes;
  nodes.header = {"kind", "index", "x", "y"};
  nodes.rows.push_back({"bs", "0", format_number(s.bs_position.x()), format_number(s.bs_position.y())});
  nodes.rows.push_back({"ris", "0", format_number(s.ris_position.x()), format_number(s.ris_position.y())});
  for (std::size_t k = 0; k < s.ue_positions.size(); ++k)
    nodes.rows.push_back({"ue", str(static_cast<int>(k) + 1), format_number(s.ue_positions[k].x()),
                          format_number(s.ue_positions[k].y())});
  return nodes;
}

// splitmix64, so draws do not depend on the standard library's distributions
struct SplitMix {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace

std::vector<Vec2> seeded_ue_positions(const Rect& area, int count, std::uint64_t seed) {
  SplitMix rng{seed * 0x100000001b3ULL + static_cast<std::uint64_t>(count)};
  std::vector<Vec2> out;
  for (int k = 0; k < count; ++k) {
    const double x = area.x_min + (area.x_max - area.x_min) * rng.uniform();
    const double y = area.y_min + (area.y_max - area.y_min) * rng.uniform();
    out.emplace_back(x, y);
  }
  return out;
}

std::vector<std::vector<double>> seeded_rate_draws(int draws, int num_ues, double lo, double hi, std::uint64_t seed) {
  SplitMix rng{seed ^ 0x5bd1e995ULL};
  std::vector<std::vector<double>> out(static_cast<std::size_t>(draws));
  for (auto& d : out)
    for (int k = 0; k < num_ues; ++k) d.push_back(lo + (hi - lo) * rng.uniform());
  return out;
}

int sweep_users_rates(const Configuration& base, const fs::path& out_dir, const SweepOptions& opt) {
  validate(base);
  const SweepPlan& plan = base.sweep;
  struct Cell {
    int K;
    double r;
    Configuration cfg;
    std::string name;
  };
  std::vector<Cell> cells;
  CsvTable placements;
  placements.header = {"K", "k", "x", "y", "source"};
  for (int K : plan.k_list) {
    std::vector<Vec2> ues = base.scenario.ue_positions;
    const bool baseline = K == base.scenario.num_ues();
    if (!baseline) ues = seeded_ue_positions(base.scenario.area, K, base.controls.rng_seed);
    for (int k = 0; k < K; ++k)
      placements.rows.push_back({str(K), str(k + 1), format_number(ues[static_cast<std::size_t>(k)].x()),
                                 format_number(ues[static_cast<std::size_t>(k)].y()), baseline ? "config" : "seeded"});
    for (double r : plan.r_list) {
      Configuration cfg = base;
      cfg.scenario.ue_positions = ues;
      cfg.scenario.r_min.assign(static_cast<std::size_t>(K), r);
      cells.push_back({K, r, cfg, "K" + str(K) + "_R" + format_number(r)});
    }
  }

  std::vector<RunOutcome> results(cells.size());
  parallel_for(static_cast<int>(cells.size()), opt.jobs, [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    const fs::path dir = out_dir / "cells" / cells[idx].name;
    results[idx] = run_cell(cells[idx].cfg, &dir);
  });

  CsvTable total, by_link;
  total.header = {"K", "R_min", "status", "P_total"};
  by_link.header = {"K", "R_min", "status", "avg_p_los", "avg_p_ris"};
  std::map<int, CsvTable> overlays;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const RunOutcome& o = results[i];
    const std::string K = str(cells[i].K), R = format_number(cells[i].r), st = to_string(o.status);
    total.rows.push_back({K, R, st, format_number(o.p_total)});
    by_link.rows.push_back({K, R, st, format_number(o.avg_p_los), format_number(o.avg_p_ris)});
    CsvTable& ov = overlays[cells[i].K];
    ov.header = {"label", "n", "x", "y"};
    append_path(ov, "R_min=" + R, o.final_path);
  }
  std::vector<std::pair<std::string, std::string>> files{{"total_power.csv", total.to_string()},
                                                         {"avg_power_by_link.csv", by_link.to_string()},
                                                         {"ue_placements.csv", placements.to_string()}};
  for (auto& [K, ov] : overlays) {
    const auto it = std::find_if(cells.begin(), cells.end(), [K = K](const Cell& c) { return c.K == K; });
    const CsvTable nodes = base_nodes(it->cfg.scenario);
    files.emplace_back("paths_K" + str(K) + ".csv", ov.to_string());
    files.emplace_back("nodes_K" + str(K) + ".csv", nodes.to_string());
    files.emplace_back("paths_K" + str(K) + ".svg", render_paths_svg(ov, nodes));
  }
  write_outputs(out_dir, files);
  return sweep_exit(results);
}

int sweep_ris_positions(const Configuration& base, const fs::path& out_dir, const SweepOptions& opt) {
  validate(base);
  const SweepPlan& plan = base.sweep;
  const int K = base.scenario.num_ues();
  const auto draws = seeded_rate_draws(plan.draws, K, plan.draw_min, plan.draw_max, base.controls.rng_seed);
  const std::size_t P = plan.ris_list.size();
  const std::size_t D = draws.size();

  // one cell per position with the configured rates, then every draw
  std::vector<Configuration> cfgs;
  for (std::size_t p = 0; p < P; ++p) {
    Configuration c = base;
    c.scenario.ris_position = plan.ris_list[p];
    cfgs.push_back(c);
    for (std::size_t d = 0; d < D; ++d) {
      Configuration cd = c;
      cd.scenario.r_min = draws[d];
      cfgs.push_back(cd);
    }
  }
  std::vector<RunOutcome> results(cfgs.size());
  parallel_for(static_cast<int>(cfgs.size()), opt.jobs, [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::size_t p = idx / (D + 1), d = idx % (D + 1);
    if (d == 0) {
      const fs::path dir = out_dir / "cells" / ("ris" + str(static_cast<int>(p)));
      results[idx] = run_cell(cfgs[idx], &dir);
    } else {
      results[idx] = run_cell(cfgs[idx], nullptr);
    }
  });

  CsvTable box, per_pos, draw_table, paths;
  box.header = {"ris_index", "ris_x", "ris_y", "draw", "status", "avg_p_los", "avg_p_ris"};
  per_pos.header = {"ris_index", "ris_x", "ris_y", "status", "P_total", "avg_p_los", "avg_p_ris"};
  draw_table.header = {"draw", "k", "r_min"};
  paths.header = {"label", "n", "x", "y"};
  for (std::size_t d = 0; d < D; ++d)
    for (int k = 0; k < K; ++k)
      draw_table.rows.push_back(
          {str(static_cast<int>(d)), str(k + 1), format_number(draws[d][static_cast<std::size_t>(k)])});
  CsvTable nodes = base_nodes(base.scenario);
  nodes.rows.erase(nodes.rows.begin() + 1);
  for (std::size_t p = 0; p < P; ++p) {
    const std::string pi = str(static_cast<int>(p)), px = format_number(plan.ris_list[p].x()),
                      py = format_number(plan.ris_list[p].y());
    nodes.rows.push_back({"ris", pi, px, py});
    const RunOutcome& head = results[p * (D + 1)];
    per_pos.rows.push_back({pi, px, py, to_string(head.status), format_number(head.p_total),
                            format_number(head.avg_p_los), format_number(head.avg_p_ris)});
    append_path(paths, "RIS (" + px + ", " + py + ")", head.final_path);
    for (std::size_t d = 0; d < D; ++d) {
      const RunOutcome& o = results[p * (D + 1) + d + 1];
      box.rows.push_back({pi, px, py, str(static_cast<int>(d)), to_string(o.status), format_number(o.avg_p_los),
                          format_number(o.avg_p_ris)});
    }
  }
  write_outputs(out_dir, {{"ris_link_power.csv", box.to_string()},
                          {"ris_positions.csv", per_pos.to_string()},
                          {"rate_draws.csv", draw_table.to_string()},
                          {"paths_ris.csv", paths.to_string()},
                          {"nodes_ris.csv", nodes.to_string()},
                          {"paths_ris.svg", render_paths_svg(paths, nodes)}});
  return sweep_exit(results);
}

int sweep_energy_budget(const Configuration& base, const fs::path& out_dir, const SweepOptions& opt) {
  validate(base);
  const auto& mult = base.sweep.multipliers;
  for (double m : mult)
    if (!(m >= 1.0)) throw ValidationError("sweep.multipliers", "energy-budget multipliers must be at least 1");
  std::vector<Configuration> cfgs;
  for (double m : mult) {
    Configuration c = base;
    c.scenario.energy_budget_multiplier = m;
    cfgs.push_back(c);
  }
  std::vector<RunOutcome> results(cfgs.size());
  parallel_for(static_cast<int>(cfgs.size()), opt.jobs, [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    const fs::path dir = out_dir / "cells" / ("m" + format_number(mult[idx]));
    results[idx] = run_cell(cfgs[idx], &dir);
  });

  CsvTable lengths, paths;
  lengths.header = {"multiplier", "status", "path_length_m", "energy_J", "energy_budget_J"};
  paths.header = {"label", "n", "x", "y"};
  for (std::size_t i = 0; i < mult.size(); ++i) {
    const RunOutcome& o = results[i];
    lengths.rows.push_back({format_number(mult[i]), to_string(o.status), format_number(o.path_length),
                            format_number(o.energy_used), format_number(o.energy_budget)});
    append_path(paths, "E_max = " + format_number(mult[i]) + " E_min", o.final_path);
  }
  const CsvTable nodes = base_nodes(base.scenario);
  write_outputs(out_dir, {{"path_length.csv", lengths.to_string()},
                          {"paths_energy.csv", paths.to_string()},
                          {"nodes_energy.csv", nodes.to_string()},
                          {"paths_energy.svg", render_paths_svg(paths, nodes)}});
  return sweep_exit(results);
}

}  // namespace risuav
