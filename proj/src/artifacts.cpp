#include "auvmpc/artifacts.hpp"

#include "auvmpc/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace auvmpc {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw ArtifactError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArtifactError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ArtifactError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ArtifactError("cannot move " + tmp.string() + " to " + path.string());
  }
}

namespace {

std::string num(double v) { return format_double(v); }

void row(std::string& out, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    out += c;
    first = false;
  }
  out += '\n';
}

std::string heading_text(double vx, double vy) {
  if (vx == 0.0 && vy == 0.0) return "";
  return num(std::atan2(vy, vx));
}

}  // namespace

void append_trajectory_rows(std::string& out, const Trajectory& traj, int horizon) {
  const int K = traj.steps();
  const int N = traj.n_auv();
  const std::string h = std::to_string(horizon);
  for (int k = 0; k <= K; ++k) {
    const std::string ks = std::to_string(k);
    const Eigen::Vector2d p = traj.usv(k);
    if (k < K) {
      const Eigen::Vector2d u = traj.usv_input(k);
      row(out, {h, ks, "0", num(p.x()), num(p.y()), "", num(u.x()), num(u.y()), "", num(u.x()), num(u.y()), "",
                heading_text(u.x(), u.y()), num(u.norm())});
    } else {
      row(out, {h, ks, "0", num(p.x()), num(p.y()), "", "", "", "", "", "", "", "", ""});
    }
    for (int n = 0; n < N; ++n) {
      const Eigen::Vector3d x = traj.position(n, k), v = traj.velocity(n, k);
      std::string ux, uy, uz;
      if (k < K) {
        const Eigen::Vector3d u = traj.auv_input(n, k);
        ux = num(u.x());
        uy = num(u.y());
        uz = num(u.z());
      }
      row(out, {h, ks, std::to_string(n + 1), num(x.x()), num(x.y()), num(x.z()), num(v.x()), num(v.y()), num(v.z()),
                ux, uy, uz, heading_text(v.x(), v.y()), num(v.head<2>().norm())});
    }
  }
}

std::string trajectory_csv(const std::vector<Trajectory>& horizons) {
  std::string out = std::string(kTrajectoryHeader) + "\n";
  for (std::size_t h = 0; h < horizons.size(); ++h) append_trajectory_rows(out, horizons[h], int(h) + 1);
  return out;
}

std::vector<LoadedHorizon> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTrajectoryHeader) {
    throw ArtifactError("trajectory CSV: missing or wrong header");
  }
  struct Row {
    int k, body;
    std::vector<std::string> cells;
  };
  std::map<int, std::vector<Row>> by_horizon;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto parts = split(trim(line), ',');
    if (parts.size() != 14) {
      throw ArtifactError("trajectory CSV line " + std::to_string(line_no) + ": expected 14 fields");
    }
    Row r;
    try {
      const int h = int(parse_double(parts[0]));
      r.k = int(parse_double(parts[1]));
      r.body = int(parse_double(parts[2]));
      for (const auto& p : parts) r.cells.emplace_back(p);
      by_horizon[h].push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      throw ArtifactError("trajectory CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  std::vector<LoadedHorizon> out;
  for (auto& [h, rows] : by_horizon) {
    int K = 0, N = 0;
    for (const Row& r : rows) {
      K = std::max(K, r.k);
      N = std::max(N, r.body);
    }
    if (K < 1 || N < 1 || rows.size() != std::size_t(K + 1) * std::size_t(N + 1)) {
      throw ArtifactError("trajectory CSV: horizon " + std::to_string(h) + " is incomplete");
    }
    LoadedHorizon lh;
    lh.horizon = h;
    lh.trajectory.states.assign(std::size_t(K) + 1, Eigen::VectorXd::Zero(2 + 6 * N));
    lh.trajectory.inputs.assign(std::size_t(K), Eigen::VectorXd::Zero(2 + 3 * N));
    auto value = [&](const Row& r, int col) {
      const std::string& c = r.cells[std::size_t(col)];
      if (c.empty()) throw ArtifactError("trajectory CSV: blank field at horizon " + std::to_string(h));
      return parse_double(c);
    };
    for (const Row& r : rows) {
      if (r.k < 0 || r.body < 0) throw ArtifactError("trajectory CSV: negative index");
      Eigen::VectorXd& x = lh.trajectory.states[std::size_t(r.k)];
      if (r.body == 0) {
        x(0) = value(r, 3);
        x(1) = value(r, 4);
        if (r.k < K) {
          lh.trajectory.inputs[std::size_t(r.k)](0) = value(r, 9);
          lh.trajectory.inputs[std::size_t(r.k)](1) = value(r, 10);
        }
        continue;
      }
      const Eigen::Index s = StackedSystem::auv_state(r.body - 1);
      for (int c = 0; c < 6; ++c) x(s + c) = value(r, 3 + c);
      if (r.k < K) {
        const Eigen::Index u = StackedSystem::auv_input(r.body - 1);
        for (int c = 0; c < 3; ++c) lh.trajectory.inputs[std::size_t(r.k)](u + c) = value(r, 9 + c);
      }
    }
    out.push_back(std::move(lh));
  }
  return out;
}

std::vector<LoadedHorizon> load_trajectory_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open " + path.string());
  return read_trajectory_csv(in);
}

std::string graph_lines(const GraphSchedule& graphs) {
  std::string out;
  for (std::size_t k = 0; k < graphs.steps.size(); ++k) {
    const StepGraphs& g = graphs.steps[k];
    out += std::to_string(k) + "; a2u=" + std::to_string(g.a2u.selected + 1) + "; a2a=";
    for (std::size_t e = 0; e < g.a2a.edges.size(); ++e) {
      if (e > 0) out += ',';
      out += "(" + std::to_string(g.a2a.edges[e].first + 1) + "," + std::to_string(g.a2a.edges[e].second + 1) + ")";
    }
    out += '\n';
    if (k < graphs.ranges.size()) {
      for (const auto& [e, r] : graphs.ranges[k]) {
        const int i = e.first == kUsvNode ? 0 : e.first + 1;
        out += std::to_string(k) + "; range (" + std::to_string(i) + "," + std::to_string(e.second + 1) + ")=" +
               num(r) + "\n";
      }
    }
  }
  return out;
}

std::string graph_file(const std::vector<PlanResult>& results, int a2u_ring_start) {
  std::string out;
  for (const PlanResult& r : results) {
    out += "horizon " + std::to_string(r.horizon) + "\n";
    out += "ring_start a2u=" + std::to_string(a2u_ring_start) + " a2a=" + std::to_string(r.a2a_ring_start) + "\n";
    out += graph_lines(r.graphs);
  }
  return out;
}

namespace {

int parse_index(std::string_view s) {
  const double v = parse_double(trim(s));
  if (v != std::floor(v)) throw std::invalid_argument("not an index");
  return int(v);
}

// "(i,j)" -> pair, 1-based as written
std::pair<int, int> parse_pair(std::string_view s) {
  s = trim(s);
  if (s.size() < 5 || s.front() != '(' || s.back() != ')') throw std::invalid_argument("bad edge");
  const auto parts = split(s.substr(1, s.size() - 2), ',');
  if (parts.size() != 2) throw std::invalid_argument("bad edge");
  return {parse_index(parts[0]), parse_index(parts[1])};
}

}  // namespace

std::vector<HorizonGraphs> read_graph_file(std::istream& in, int n_auv) {
  std::vector<HorizonGraphs> out;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    try {
      if (line.rfind("horizon ", 0) == 0) {
        out.emplace_back();
        out.back().horizon = parse_index(line.substr(8));
        continue;
      }
      if (out.empty()) throw std::invalid_argument("graph line before a horizon header");
      HorizonGraphs& hg = out.back();
      if (line.rfind("ring_start ", 0) == 0) {
        for (auto part : split(line.substr(11), ' ')) {
          if (part.rfind("a2u=", 0) == 0) hg.a2u_ring_start = parse_index(part.substr(4));
          if (part.rfind("a2a=", 0) == 0) hg.a2a_ring_start = parse_index(part.substr(4));
        }
        continue;
      }
      const auto fields = split(line, ';');
      if (fields.size() < 2) throw std::invalid_argument("expected 'k; ...'");
      const int k = parse_index(fields[0]);
      if (k < 0) throw std::invalid_argument("negative step");
      GraphSchedule& g = hg.schedule;
      if (std::size_t(k) >= g.steps.size()) {
        g.steps.resize(std::size_t(k) + 1);
        g.ranges.resize(std::size_t(k) + 1);
      }
      const std::string_view second = trim(fields[1]);
      if (second.rfind("range ", 0) == 0) {
        const auto eq = second.find('=');
        if (eq == std::string_view::npos) throw std::invalid_argument("range needs '='");
        const auto [i, j] = parse_pair(second.substr(6, eq - 6));
        const Edge e{i == 0 ? kUsvNode : i - 1, j - 1};
        g.ranges[std::size_t(k)][e] = parse_double(trim(second.substr(eq + 1)));
        continue;
      }
      if (fields.size() != 3 || second.rfind("a2u=", 0) != 0) throw std::invalid_argument("expected a2u and a2a");
      StepGraphs& s = g.steps[std::size_t(k)];
      s.a2u.selected = parse_index(second.substr(4)) - 1;
      if (s.a2u.selected < 0 || s.a2u.selected >= n_auv) throw std::invalid_argument("a2u node out of range");
      s.a2u.sigma.assign(std::size_t(n_auv), 0);
      s.a2u.sigma[std::size_t(s.a2u.selected)] = 1;
      const std::string_view a2a = trim(fields[2]);
      if (a2a.rfind("a2a=", 0) != 0) throw std::invalid_argument("expected a2a=");
      std::string_view rest = a2a.substr(4);
      while (!rest.empty()) {
        const auto close = rest.find(')');
        if (close == std::string_view::npos) throw std::invalid_argument("unterminated edge");
        const auto [i, j] = parse_pair(rest.substr(0, close + 1));
        s.a2a.edges.emplace_back(i - 1, j - 1);
        rest = rest.substr(close + 1);
        if (!rest.empty() && rest.front() == ',') rest = rest.substr(1);
      }
    } catch (const std::invalid_argument& e) {
      throw ArtifactError("graph file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string validation_table(const ValidationReport& report) {
  std::string out;
  for (const ConstraintCheck& c : report.checks) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-28s %s  worst=%s", c.name.c_str(), c.passed ? "PASS" : "FAIL",
                  num(c.worst).c_str());
    out += buf;
    if (!c.detail.empty()) out += "  at " + c.detail;
    out += '\n';
  }
  for (const auto& n : report.notes) out += "note: " + n + "\n";
  return out;
}

namespace {

std::string objective_lines(const ObjectiveRecord& r) {
  std::string out;
  auto line = [&](const char* name, double v) { out += std::string(name) + " = " + num(v) + "\n"; };
  line("of1_1", r.of1_1);
  line("of1_2", r.of1_2);
  line("of1_3", r.of1_3);
  line("of1_4", r.of1_4);
  line("of1_5", r.of1_5);
  line("of1_6", r.of1_6);
  line("of1_7", r.of1_7);
  line("of1_8", r.of1_8);
  line("of1_8_2", r.of1_8_2);
  line("composite", r.composite);
  line("weighted_total", r.weighted_total);
  return out;
}

const char* yes_no(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string plan_report(const RunConfig& config, const std::vector<PlanResult>& results) {
  std::string out = "auvmpc plan report\n\n[config]\n" + config.echo();
  std::vector<Trajectory> trajectories;
  for (const PlanResult& r : results) {
    const std::string h = std::to_string(r.horizon);
    out += "\n[horizon " + h + "]\n";
    out += std::string("status = ") + (r.success() ? "success" : "flagged") + "\n";
    out += std::string("step3_solved = ") + yes_no(r.step3_solved) + "\n";
    out += std::string("fallback_to_step1 = ") + yes_no(r.fallback_to_step1) + "\n";
    out += "floor_iterations = " + std::to_string(r.floor_iterations) + "\n";
    out += "step3_floor_iterations = " + std::to_string(r.step3_floor_iterations) + "\n";
    out += "repair_rounds = " + std::to_string(r.repair_rounds) + "\n";
    out += "repaired_edges = " + std::to_string(r.repaired_edges) + "\n";
    out += "a2a_ring_start = " + std::to_string(r.a2a_ring_start) + "\n";
    for (const auto& w : r.warnings) out += "warning: " + w + "\n";
    out += "\n[objectives " + h + "]\n" + objective_lines(r.objectives);
    out += "\n[step1 objectives " + h + "]\n" + objective_lines(r.step1_objectives);
    out += "\n[validation " + h + "]\n" + validation_table(r.validation);
    out += "\n[graphs " + h + "]\n" + graph_lines(r.graphs);
    trajectories.push_back(r.trajectory);
  }
  out += "\n[trajectory]\n" + trajectory_csv(trajectories);
  return out;
}

std::string timings_text(const std::vector<PlanResult>& results) {
  std::string out = "horizon,step1_s,step2_a2u_s,step2_a2a_s,step3_s,total_s\n";
  for (const PlanResult& r : results) {
    row(out, {std::to_string(r.horizon), num(r.timings.step1), num(r.timings.step2_a2u), num(r.timings.step2_a2a),
              num(r.timings.step3), num(r.timings.total())});
  }
  return out;
}

std::string comparison_report(const PlanResult& planner, const BaselineResult& baseline) {
  const ObjectiveRecord& p = planner.objectives;
  const ObjectiveRecord& b = baseline.objectives;
  std::string out = "auvmpc comparison\n\n";
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-16s %24s %24s\n", "term", "planner", "baseline");
  out += buf;
  auto line = [&](const char* name, double a, double c) {
    std::snprintf(buf, sizeof buf, "%-16s %24s %24s\n", name, num(a).c_str(), num(c).c_str());
    out += buf;
  };
  line("composite", p.composite, baseline.score);
  line("of1_1", p.of1_1, b.of1_1);
  line("of1_2", p.of1_2, b.of1_2);
  line("of1_8_2", p.of1_8_2, b.of1_8_2);
  line("wall_clock_s", planner.timings.total(), baseline.elapsed);
  out += "\nplanner_validation = " + std::string(planner.validation.all_pass() ? "pass" : "fail") + "\n";
  out += "baseline_candidates = " + std::to_string(baseline.candidates) + "\n";
  out += "baseline_rejected = " + std::to_string(baseline.rejected) + "\n";
  out += "predicted_samples = " + num(baseline.predicted.samples) + "\n";
  out += "predicted_operations = " + num(baseline.predicted.operations) +
         (baseline.predicted.saturated ? " (saturated)" : "") + "\n";
  return out;
}

std::vector<int> plotted_steps(int steps) {
  std::vector<int> ks{1, std::max(1, steps / 2), steps};
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

namespace {

struct Segment {
  double x1, y1, x2, y2;
};

// Marching squares over a strided copy of the depth grid.
std::vector<std::pair<double, Segment>> contour_segments(const SeafloorMap& map, int levels, int max_cells) {
  std::vector<std::pair<double, Segment>> out;
  const Eigen::MatrixXd& d = map.depth();
  const double lo = d.minCoeff(), hi = d.maxCoeff();
  if (!(hi - lo > 1e-9)) return out;
  const Eigen::Index stride = std::max<Eigen::Index>(1, std::max(d.rows(), d.cols()) / max_cells);
  auto px = [&](Eigen::Index j) { return map.origin().x() + map.cell().x() * double(j); };
  auto py = [&](Eigen::Index i) { return map.origin().y() + map.cell().y() * double(i); };
  for (int l = 1; l <= levels; ++l) {
    const double z = lo + (hi - lo) * l / (levels + 1);
    for (Eigen::Index i = 0; i + stride < d.rows(); i += stride) {
      for (Eigen::Index j = 0; j + stride < d.cols(); j += stride) {
        const Eigen::Index i2 = i + stride, j2 = j + stride;
        // corners counter-clockwise from (i, j)
        const double c[4] = {d(i, j), d(i, j2), d(i2, j2), d(i2, j)};
        const double cx[4] = {px(j), px(j2), px(j2), px(j)};
        const double cy[4] = {py(i), py(i), py(i2), py(i2)};
        std::vector<std::pair<double, double>> cross;
        for (int e = 0; e < 4; ++e) {
          const int f = (e + 1) % 4;
          if ((c[e] < z) != (c[f] < z)) {
            const double t = (z - c[e]) / (c[f] - c[e]);
            cross.emplace_back(cx[e] + t * (cx[f] - cx[e]), cy[e] + t * (cy[f] - cy[e]));
          }
        }
        for (std::size_t s = 0; s + 1 < cross.size(); s += 2) {
          out.push_back({z, {cross[s].first, cross[s].second, cross[s + 1].first, cross[s + 1].second}});
        }
      }
    }
  }
  return out;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

class Svg {
 public:
  Svg(double xmin, double xmax, double ymin, double ymax, const std::string& title)
      : xmin_(xmin), ymax_(ymax), scale_(800.0 / std::max(xmax - xmin, 1e-9)) {
    const double h = std::max((ymax - ymin) * scale_, 1.0);
    body_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"" + fixed(h) + "\" viewBox=\"0 0 800 " +
            fixed(h) + "\">\n<title>" + title + "</title>\n<rect width=\"800\" height=\"" + fixed(h) +
            "\" fill=\"white\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& cls, const std::string& color, double width) {
    body_ += "<line class=\"" + cls + "\" x1=\"" + fixed(sx(x1)) + "\" y1=\"" + fixed(sy(y1)) + "\" x2=\"" +
             fixed(sx(x2)) + "\" y2=\"" + fixed(sy(y2)) + "\" stroke=\"" + color + "\" stroke-width=\"" + fixed(width) +
             "\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& cls, const std::string& color) {
    body_ += "<polyline class=\"" + cls + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i > 0) body_ += ' ';
      body_ += fixed(sx(pts[i].first)) + "," + fixed(sy(pts[i].second));
    }
    body_ += "\"/>\n";
  }
  std::string finish() { return body_ + "</svg>\n"; }

 private:
  [[nodiscard]] double sx(double x) const { return (x - xmin_) * scale_; }
  [[nodiscard]] double sy(double y) const { return (ymax_ - y) * scale_; }
  double xmin_, ymax_, scale_;
  std::string body_;
};

const char* kPlotHeader = "series,horizon,k,a,b,value,x1,c1,x2,c2\n";

const char* auv_color(int n) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[n % 10];
}

}  // namespace

std::vector<fs::path> emit_plot_files(const std::vector<PlanResult>& results, const SeafloorMap& map,
                                      const fs::path& dir) {
  if (results.empty()) return {};
  const int N = results.front().trajectory.n_auv();

  // bounds of everything drawn, padded
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin, zmin = xmin,
         zmax = 0.0;
  for (const PlanResult& r : results) {
    const Trajectory& t = r.trajectory;
    for (int k = 0; k <= t.steps(); ++k) {
      const Eigen::Vector2d u = t.usv(k);
      xmin = std::min(xmin, u.x());
      xmax = std::max(xmax, u.x());
      ymin = std::min(ymin, u.y());
      ymax = std::max(ymax, u.y());
      for (int n = 0; n < N; ++n) {
        const Eigen::Vector3d p = t.position(n, k);
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
        const double floor = map.contains(p.x(), p.y()) ? map.depth_at(p.x(), p.y()) : p.z();
        zmin = std::min({zmin, p.z(), floor});
      }
    }
  }
  const double pad = 100.0;
  xmin -= pad;
  xmax += pad;
  ymin -= pad;
  ymax += pad;
  zmin -= 20.0;
  zmax += 20.0;

  std::string top_csv = kPlotHeader, side_csv = kPlotHeader;
  Svg top(xmin, xmax, ymin, ymax, "top-down view");
  // the profile view stretches depth so that it stays readable
  const double zscale = std::max(1.0, 0.4 * (xmax - xmin) / std::max(zmax - zmin, 1.0));
  Svg side(xmin, xmax, zmin * zscale, zmax * zscale, "profile view");

  for (const auto& [z, s] : contour_segments(map, 8, 150)) {
    if (std::max(s.x1, s.x2) < xmin || std::min(s.x1, s.x2) > xmax || std::max(s.y1, s.y2) < ymin ||
        std::min(s.y1, s.y2) > ymax) {
      continue;
    }
    row(top_csv, {"contour", "", "", "", "", num(z), num(s.x1), num(s.y1), num(s.x2), num(s.y2)});
    top.line(s.x1, s.y1, s.x2, s.y2, "contour", "#c8b89a", 0.8);
  }

  for (const PlanResult& r : results) {
    const Trajectory& t = r.trajectory;
    const int K = t.steps();
    const std::string h = std::to_string(r.horizon);
    std::vector<std::pair<double, double>> usv_top, usv_side;
    for (int k = 0; k <= K; ++k) {
      const Eigen::Vector2d u = t.usv(k);
      usv_top.emplace_back(u.x(), u.y());
      usv_side.emplace_back(u.x(), 0.0);
      row(top_csv, {"usv", h, std::to_string(k), "0", "", "", num(u.x()), num(u.y()), "", ""});
      row(side_csv, {"usv", h, std::to_string(k), "0", "", "", num(u.x()), "0", "", ""});
    }
    top.polyline(usv_top, "usv", "black");
    side.polyline(usv_side, "usv", "black");
    for (int n = 0; n < N; ++n) {
      std::vector<std::pair<double, double>> pt, ps, floor;
      const std::string id = std::to_string(n + 1);
      for (int k = 0; k <= K; ++k) {
        const Eigen::Vector3d p = t.position(n, k);
        pt.emplace_back(p.x(), p.y());
        ps.emplace_back(p.x(), p.z() * zscale);
        row(top_csv, {"auv", h, std::to_string(k), id, "", "", num(p.x()), num(p.y()), "", ""});
        row(side_csv, {"auv", h, std::to_string(k), id, "", "", num(p.x()), num(p.z()), "", ""});
        if (map.contains(p.x(), p.y())) {
          const double f = map.depth_at(p.x(), p.y());
          floor.emplace_back(p.x(), f * zscale);
          row(side_csv, {"floor", h, std::to_string(k), id, "", "", num(p.x()), num(f), "", ""});
        }
      }
      side.polyline(floor, "floor", "#8b6d45");
      top.polyline(pt, "auv", auv_color(n));
      side.polyline(ps, "auv", auv_color(n));
    }
    for (int k : plotted_steps(K)) {
      if (std::size_t(k) >= r.graphs.steps.size()) continue;
      const StepGraphs& g = r.graphs.steps[std::size_t(k)];
      const std::string ks = std::to_string(k);
      const Eigen::Vector2d u = t.usv(k);
      const Eigen::Vector3d a = t.position(g.a2u.selected, k);
      const std::string sel = std::to_string(g.a2u.selected + 1);
      row(top_csv, {"a2u", h, ks, "0", sel, "", num(u.x()), num(u.y()), num(a.x()), num(a.y())});
      row(side_csv, {"a2u", h, ks, "0", sel, "", num(u.x()), "0", num(a.x()), num(a.z())});
      top.line(u.x(), u.y(), a.x(), a.y(), "a2u", "#444444", 1.2);
      side.line(u.x(), 0.0, a.x(), a.z() * zscale, "a2u", "#444444", 1.2);
      for (const Edge& e : g.a2a.edges) {
        const Eigen::Vector3d p = t.position(e.first, k), q = t.position(e.second, k);
        const std::string i = std::to_string(e.first + 1), j = std::to_string(e.second + 1);
        row(top_csv, {"a2a", h, ks, i, j, "", num(p.x()), num(p.y()), num(q.x()), num(q.y())});
        row(side_csv, {"a2a", h, ks, i, j, "", num(p.x()), num(p.z()), num(q.x()), num(q.z())});
        top.line(p.x(), p.y(), q.x(), q.y(), "a2a", "#e41a1c", 1.0);
        side.line(p.x(), p.z() * zscale, q.x(), q.z() * zscale, "a2a", "#e41a1c", 1.0);
      }
    }
  }

  const std::vector<fs::path> files{dir / "plot_topdown.svg", dir / "plot_topdown.csv", dir / "plot_profile.svg",
                                    dir / "plot_profile.csv"};
  write_atomic(files[0], top.finish());
  write_atomic(files[1], top_csv);
  write_atomic(files[2], side.finish());
  write_atomic(files[3], side_csv);
  return files;
}

}  // namespace auvmpc
