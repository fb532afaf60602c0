#include "auvmpc/run.hpp"

#include "auvmpc/text_format.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace auvmpc {

namespace fs = std::filesystem;

namespace {

Scenario scenario_with_map(const RunConfig& config) {
  Scenario sc = config.scenario;
  sc.map = config.load_terrain();
  return sc;
}

}  // namespace

RunOutcome run(const RunConfig& config, std::ostream& log) {
  config.validate();
  const Scenario sc = resolve_starts(scenario_with_map(config));
  const fs::path& dir = config.output.dir;
  RunOutcome out;

  if (config.mission.horizons > 0) out.results = plan_mission(sc, config.mission);
  for (const PlanResult& r : out.results) {
    log << "horizon " << r.horizon << ": " << (r.success() ? "success" : "flagged") << ", composite "
        << format_double(r.objectives.composite) << ", " << r.repair_rounds << " repair round(s)\n";
    for (const auto& w : r.warnings) log << "  warning: " << w << '\n';
    for (const auto& c : r.validation.checks) {
      if (!c.passed) log << "  FAIL " << c.name << " (" << c.detail << ")\n";
    }
  }

  auto emit = [&](const std::string& name, const std::string& content) {
    write_atomic(dir / name, content);
    out.files.push_back(dir / name);
  };
  std::vector<Trajectory> trajectories;
  for (const PlanResult& r : out.results) trajectories.push_back(r.trajectory);
  if (config.output.csv) {
    emit("trajectory.csv", trajectory_csv(trajectories));
    emit("graphs.txt", graph_file(out.results, sc.assembly.first_a2u_ring_step));
  }
  if (config.output.report) {
    emit("report.txt", plan_report(config, out.results));
    emit("timings.txt", timings_text(out.results));
  }
  if (config.output.plots) {
    for (auto& f : emit_plot_files(out.results, *sc.map, dir)) out.files.push_back(f);
  }

  if (config.output.compare && !out.results.empty()) {
    out.baseline = rrt_like_plan(sc, sc.initial_state(), config.baseline);
    emit("baseline_trajectory.csv", trajectory_csv({out.baseline->trajectory}));
    emit("comparison.txt", comparison_report(out.results.front(), *out.baseline));
    log << "baseline: score " << format_double(out.baseline->score) << " in " << out.baseline->elapsed
        << " s; planner: " << format_double(out.results.front().objectives.composite) << " in "
        << out.results.front().timings.total() << " s\n";
  }

  const bool ok = !out.results.empty() && static_cast<int>(out.results.size()) == config.mission.horizons &&
                  std::all_of(out.results.begin(), out.results.end(), [](const PlanResult& r) { return r.success(); });
  out.exit_code = ok || config.mission.horizons == 0 ? kExitOk : kExitFlagged;
  return out;
}

fs::path write_terrain(const RunConfig& config) {
  const auto map = config.load_terrain();
  const fs::path path = config.output.dir / "terrain.txt";
  std::ostringstream os;
  map->write(os);
  write_atomic(path, os.str());
  return path;
}

RecheckOutcome recheck(const fs::path& trajectory_csv, const RunConfig& config, std::ostream& log) {
  config.validate();
  const Scenario sc = scenario_with_map(config);
  const auto horizons = load_trajectory_csv(trajectory_csv);
  std::vector<HorizonGraphs> graphs;
  const fs::path graph_path = trajectory_csv.parent_path() / "graphs.txt";
  if (fs::exists(graph_path)) {
    std::ifstream in(graph_path);
    graphs = read_graph_file(in, sc.n_auv);
  }

  if (horizons.empty()) throw ArtifactError("trajectory CSV has no rows");
  RecheckOutcome out;
  for (const LoadedHorizon& h : horizons) {
    const Trajectory& t = h.trajectory;
    if (t.n_auv() != sc.n_auv) {
      throw ArtifactError("trajectory has " + std::to_string(t.n_auv()) + " AUVs, config has " +
                          std::to_string(sc.n_auv));
    }
    const StackedSystem sys = build_stacked(sc.n_auv, sc.params, sc.dt, t.steps());
    ValidationOptions opt;
    opt.los_resolution = sc.los_resolution;
    GraphSchedule schedule;
    const auto g =
        std::find_if(graphs.begin(), graphs.end(), [&](const HorizonGraphs& x) { return x.horizon == h.horizon; });
    if (g != graphs.end()) {
      schedule = g->schedule;
      opt.first_a2u_ring_step = g->a2u_ring_start;
      opt.first_a2a_ring_step = g->a2a_ring_start;
    } else {
      opt.check_graphs = false;
    }
    ValidationReport rep = validate_constraints(t, schedule, sc.weights, *sc.map, sys, opt);
    log << "horizon " << h.horizon << (opt.check_graphs ? "" : " (no graphs)") << "\n" << validation_table(rep);
    if (!rep.all_pass()) out.exit_code = kExitFlagged;
    out.reports.push_back(std::move(rep));
  }
  return out;
}

}  // namespace auvmpc
