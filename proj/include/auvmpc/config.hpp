#pragma once

// Run configuration: flat `key = value` text with [section] headers.
//
//   [scenario]  n_auv, steps, dt, seed, usv_start, auv_start, horizons, ...
//   [weights]   w1 .. w82, d_s, d_max, d_t, surface_clearance, target
//   [vehicle]   VehicleParams fields, shared by every AUV
//   [assembly]  [floor]  solver and assembly options
//   [terrain]   file = <path>, or the synthetic terrain fields
//   [baseline]  sampling comparator settings
//   [output]    dir, csv, report, plots, compare
//
// `#` starts a comment. Vectors are whitespace separated; auv_start lists
// positions separated by `;`.

#include "auvmpc/baseline.hpp"
#include "auvmpc/planner.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace auvmpc {

/// Parse or validation failure. `line` and `column` are 1-based and zero
/// when the error is not tied to a location; `field` is `section.key`.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::string field, int line = 0, int column = 0);
  [[nodiscard]] const std::string& field() const { return field_; }
  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] int column() const { return column_; }

 private:
  std::string field_;
  int line_;
  int column_;
};

struct TerrainSource {
  std::optional<std::filesystem::path> file;  // resolved against the config's directory
  SynthTerrainSpec synth;
  bool synth_keys = false;  // any synthetic field was set
};

struct OutputOptions {
  std::filesystem::path dir = "out";
  bool csv = true;
  bool report = true;
  bool plots = true;
  bool compare = false;
};

struct RunConfig {
  Scenario scenario;  // map stays empty until load_terrain
  TerrainSource terrain;
  SamplingConfig baseline;
  MissionOptions mission;
  OutputOptions output;

  void validate() const;
  [[nodiscard]] std::shared_ptr<const SeafloorMap> load_terrain() const;
  /// Every setting except output.dir, defaults included, in the input format.
  [[nodiscard]] std::string echo() const;
};

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

}  // namespace auvmpc
