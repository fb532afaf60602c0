#include "auvmpc/run.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

using namespace auvmpc;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> horizons;
  bool quiet = false;
};

RunConfig load_with(const std::string& path, const Overrides& o) {
  RunConfig c = load_config(path);
  if (o.seed) {
    c.scenario.seed = *o.seed;
    c.baseline.seed = *o.seed;
  }
  if (o.out) c.output.dir = *o.out;
  if (o.horizons) c.mission.horizons = *o.horizons;
  c.validate();
  return c;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Seed for AUV starts and the baseline");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--horizons", o.horizons, "Number of receding horizons");
  cmd->add_flag("--quiet", o.quiet, "Only report errors");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-AUV receding-horizon planner"};
  app.require_subcommand(1);
  Overrides o;
  std::string config_path, csv_path;

  auto* plan = app.add_subcommand("plan", "Plan a mission and write its artifacts");
  plan->add_option("config", config_path, "Run configuration")->required();
  add_common(plan, o);

  auto* compare = app.add_subcommand("compare", "Plan one horizon and run the sampling baseline on it");
  compare->add_option("config", config_path, "Run configuration")->required();
  add_common(compare, o);

  auto* synth = app.add_subcommand("synth-terrain", "Write the configured terrain to <out>/terrain.txt");
  synth->add_option("config", config_path, "Run configuration")->required();
  add_common(synth, o);

  auto* validate = app.add_subcommand("validate", "Re-check a trajectory CSV against a configuration");
  validate->add_option("trajectory", csv_path, "Trajectory CSV")->required();
  validate->add_option("config", config_path, "Run configuration")->required();
  add_common(validate, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  std::ostringstream sink;
  std::ostream& log = o.quiet ? static_cast<std::ostream&>(sink) : std::cout;
  try {
    RunConfig cfg = load_with(config_path, o);
    if (*plan || *compare) {
      if (*compare) {
        cfg.output.compare = true;
        cfg.mission.horizons = 1;
      }
      const RunOutcome r = run(cfg, log);
      for (const auto& f : r.files) log << "wrote " << f.string() << '\n';
      return r.exit_code;
    }
    if (*synth) {
      log << "wrote " << write_terrain(cfg).string() << '\n';
      return kExitOk;
    }
    return recheck(csv_path, cfg, log).exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
