#include "auvmpc/config.hpp"

#include "auvmpc/text_format.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace auvmpc {

ConfigError::ConfigError(const std::string& what, std::string field, int line, int column)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what
                                  : (field.empty() ? what : field + ": " + what)),
      field_(std::move(field)),
      line_(line),
      column_(column) {}

namespace {

struct Field {
  std::string section;
  std::string key;
  std::function<void(std::string_view)> set;
  std::function<std::vector<std::string>()> get;
  bool repeatable = false;
};

std::vector<double> numbers(std::string_view s) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    out.push_back(parse_double(s.substr(i, j - i)));
    i = j;
  }
  return out;
}

double one_number(std::string_view s) {
  const auto v = numbers(s);
  if (v.size() != 1) throw std::invalid_argument("expected one number");
  return v[0];
}

template <typename Int>
Int parse_int(std::string_view s) {
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw std::invalid_argument("not a boolean: '" + std::string(s) + "'");
}

Eigen::Vector2d parse_vec2(std::string_view s) {
  const auto v = numbers(s);
  if (v.size() != 2) throw std::invalid_argument("expected two numbers");
  return {v[0], v[1]};
}

std::string vec_text(const Eigen::Vector2d& v) { return format_double(v.x()) + " " + format_double(v.y()); }

class Table {
 public:
  void add(Field f) { fields_.push_back(std::move(f)); }

  void number(const std::string& sec, const std::string& key, double& v) {
    add({sec, key, [&v](std::string_view s) { v = one_number(s); },
         [&v] { return std::vector<std::string>{format_double(v)}; }});
  }
  void integer(const std::string& sec, const std::string& key, int& v) {
    add({sec, key, [&v](std::string_view s) { v = parse_int<int>(s); },
         [&v] { return std::vector<std::string>{std::to_string(v)}; }});
  }
  void seed(const std::string& sec, const std::string& key, std::uint64_t& v) {
    add({sec, key, [&v](std::string_view s) { v = parse_int<std::uint64_t>(s); },
         [&v] { return std::vector<std::string>{std::to_string(v)}; }});
  }
  void flag(const std::string& sec, const std::string& key, bool& v) {
    add({sec, key, [&v](std::string_view s) { v = parse_bool(s); },
         [&v] { return std::vector<std::string>{v ? "true" : "false"}; }});
  }
  void vec2(const std::string& sec, const std::string& key, Eigen::Vector2d& v) {
    add({sec, key, [&v](std::string_view s) { v = parse_vec2(s); },
         [&v] { return std::vector<std::string>{vec_text(v)}; }});
  }
  void optional_vec2(const std::string& sec, const std::string& key, std::optional<Eigen::Vector2d>& v) {
    add({sec, key, [&v](std::string_view s) { v = parse_vec2(s); },
         [&v] { return v ? std::vector<std::string>{vec_text(*v)} : std::vector<std::string>{}; }});
  }
  void optional_number(const std::string& sec, const std::string& key, std::optional<double>& v) {
    add({sec, key, [&v](std::string_view s) { v = one_number(s); },
         [&v] { return v ? std::vector<std::string>{format_double(*v)} : std::vector<std::string>{}; }});
  }

  [[nodiscard]] const Field* find(const std::string& sec, const std::string& key) const {
    for (const auto& f : fields_) {
      if (f.section == sec && f.key == key) return &f;
    }
    return nullptr;
  }
  [[nodiscard]] bool has_section(const std::string& sec) const {
    for (const auto& f : fields_) {
      if (f.section == sec) return true;
    }
    return false;
  }
  [[nodiscard]] const std::vector<Field>& fields() const { return fields_; }

 private:
  std::vector<Field> fields_;
};

Table make_table(RunConfig& c) {
  Table t;
  Scenario& s = c.scenario;
  t.integer("scenario", "n_auv", s.n_auv);
  t.integer("scenario", "steps", s.steps);
  t.number("scenario", "dt", s.dt);
  t.seed("scenario", "seed", s.seed);
  t.vec2("scenario", "usv_start", s.usv_start);
  t.add({"scenario", "auv_start",
         [&s](std::string_view v) {
           s.auv_start.clear();
           for (auto part : split(v, ';')) {
             const auto p = numbers(trim(part));
             if (p.size() != 3) throw std::invalid_argument("each AUV start needs x y z");
             s.auv_start.push_back({Eigen::Vector3d(p[0], p[1], p[2]), Eigen::Vector3d::Zero()});
           }
         },
         [&s] {
           if (s.auv_start.empty()) return std::vector<std::string>{};
           std::string out;
           for (std::size_t n = 0; n < s.auv_start.size(); ++n) {
             const auto& p = s.auv_start[n].position;
             if (n > 0) out += "; ";
             out += format_double(p.x()) + " " + format_double(p.y()) + " " + format_double(p.z());
           }
           return std::vector<std::string>{out};
         }});
  t.integer("scenario", "horizons", c.mission.horizons);
  t.flag("scenario", "continue_on_flag", c.mission.continue_on_flag);
  t.number("scenario", "los_resolution", s.los_resolution);
  t.number("scenario", "repair_step", s.repair_step);
  t.integer("scenario", "max_repair_rounds", s.max_repair_rounds);
  t.integer("scenario", "max_a2a_ring_start", s.max_a2a_ring_start);
  t.number("scenario", "start_depth_margin", s.start_depth_margin);

  PlanWeights& w = s.weights;
  t.number("weights", "w1", w.w1);
  t.number("weights", "w2", w.w2);
  t.number("weights", "w3", w.w3);
  t.number("weights", "w4", w.w4);
  t.number("weights", "w5", w.w5);
  t.number("weights", "w6", w.w6);
  t.number("weights", "w7", w.w7);
  t.number("weights", "w8", w.w8);
  t.number("weights", "w82", w.w82);
  t.number("weights", "d_s", w.d_s);
  t.number("weights", "d_max", w.d_max);
  t.number("weights", "d_t", w.d_t);
  t.number("weights", "surface_clearance", w.surface_clearance);
  t.optional_vec2("weights", "target", w.target);

  VehicleParams& p = s.params.front();
  t.number("vehicle", "mass", p.mass);
  t.number("vehicle", "inertia_x", p.inertia_x);
  t.number("vehicle", "inertia_y", p.inertia_y);
  t.number("vehicle", "inertia_z", p.inertia_z);
  t.number("vehicle", "added_mass_x", p.added_mass_x);
  t.number("vehicle", "added_mass_y", p.added_mass_y);
  t.number("vehicle", "added_mass_z", p.added_mass_z);
  t.number("vehicle", "drag_x", p.drag_x);
  t.number("vehicle", "drag_y", p.drag_y);
  t.number("vehicle", "drag_z", p.drag_z);
  t.number("vehicle", "drag_roll", p.drag_roll);
  t.number("vehicle", "drag_pitch", p.drag_pitch);
  t.number("vehicle", "drag_yaw", p.drag_yaw);
  t.number("vehicle", "max_speed", p.max_speed);
  t.number("vehicle", "max_horizontal_speed", p.max_horizontal_speed);
  t.number("vehicle", "max_heading_rate", p.max_heading_rate);
  t.number("vehicle", "heading_alpha", p.heading_alpha);

  AssemblyOptions& a = s.assembly;
  t.number("assembly", "geometric_margin", a.geometric_margin);
  t.number("assembly", "speed_margin", a.speed_margin);
  t.number("assembly", "strict_margin", a.strict_margin);
  t.flag("assembly", "heading_band", a.heading_band);
  t.flag("assembly", "lookahead", a.lookahead);
  t.flag("assembly", "map_extent", a.map_extent);
  t.integer("assembly", "first_a2u_ring_step", a.first_a2u_ring_step);
  t.integer("assembly", "first_a2a_ring_step", a.first_a2a_ring_step);

  FloorIterationOptions& f = s.floor;
  t.number("floor", "displacement_threshold", f.displacement_threshold);
  t.optional_number("floor", "profile_radius", f.profile_radius);
  t.integer("floor", "max_iterations", f.max_iterations);
  t.number("floor", "tol", f.tol);
  t.integer("floor", "max_solver_iterations", f.max_solver_iterations);

  TerrainSource& ts = c.terrain;
  t.add({"terrain", "file", [&ts](std::string_view v) { ts.file = std::filesystem::path(std::string(v)); },
         [&ts] { return ts.file ? std::vector<std::string>{ts.file->generic_string()} : std::vector<std::string>{}; }});
  SynthTerrainSpec& st = ts.synth;
  t.vec2("terrain", "origin", st.origin);
  t.vec2("terrain", "extent", st.extent);
  t.number("terrain", "cell", st.cell);
  t.seed("terrain", "seed", st.seed);
  t.integer("terrain", "seamounts", st.seamounts);
  t.integer("terrain", "valleys", st.valleys);
  t.number("terrain", "base_depth", st.base_depth);
  t.number("terrain", "amplitude", st.amplitude);
  t.number("terrain", "sigma_min", st.sigma_min);
  t.number("terrain", "sigma_max", st.sigma_max);
  t.number("terrain", "clearance", st.clearance);
  t.add({"terrain", "feature",
         [&st](std::string_view v) {
           const auto n = numbers(v);
           if (n.size() != 4) throw std::invalid_argument("feature needs x y amplitude sigma");
           st.features.push_back({{n[0], n[1]}, n[2], n[3]});
         },
         [&st] {
           std::vector<std::string> out;
           for (const auto& ft : st.features) {
             out.push_back(vec_text(ft.center) + " " + format_double(ft.amplitude) + " " + format_double(ft.sigma));
           }
           return out;
         },
         true});

  SamplingConfig& b = c.baseline;
  t.integer("baseline", "samples_per_step", b.samples_per_step);
  t.integer("baseline", "beam", b.beam);
  t.seed("baseline", "seed", b.seed);
  t.optional_number("baseline", "usv_max_speed", b.usv_max_speed);
  t.number("baseline", "segment_resolution", b.segment_resolution);

  OutputOptions& o = c.output;
  t.add({"output", "dir", [&o](std::string_view v) { o.dir = std::filesystem::path(std::string(v)); },
         [&o] { return std::vector<std::string>{o.dir.generic_string()}; }});
  t.flag("output", "csv", o.csv);
  t.flag("output", "report", o.report);
  t.flag("output", "plots", o.plots);
  t.flag("output", "compare", o.compare);
  return t;
}

// Rethrows a component validation failure against the named section.
template <typename F>
void check_section(const std::string& section, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what(), section);
  }
}

}  // namespace

void RunConfig::validate() const {
  const Scenario& s = scenario;
  const PlanWeights& w = s.weights;
  auto require = [](bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ConfigError(what, field);
  };
  require(s.n_auv >= 1, "scenario.n_auv", "must be at least 1");
  require(s.steps >= 2, "scenario.steps", "must be at least 2");
  require(s.dt > 0, "scenario.dt", "must be positive");
  require(mission.horizons >= 0, "scenario.horizons", "must be non-negative");
  require(s.auv_start.empty() || s.auv_start.size() == std::size_t(s.n_auv), "scenario.auv_start",
          "needs one position per AUV");
  require(w.d_s > 0, "weights.d_s", "must be positive");
  require(w.d_t > 0 && w.d_t < w.d_s, "weights.d_t", "must lie in (0, d_s)");
  require(w.d_max > w.d_s, "weights.d_max", "must exceed d_s");
  require(!(terrain.file && terrain.synth_keys), "terrain", "set either file or synthetic fields, not both");
  require(terrain.file || terrain.synth_keys, "terrain", "no terrain source; set file or synthetic fields");
  require(!output.dir.empty(), "output.dir", "must not be empty");
  check_section("weights", [&] { w.validate(); });
  check_section("vehicle", [&] { s.params.front().validate(); });
  check_section("baseline", [&] { baseline.validate(); });
  require(s.assembly.first_a2u_ring_step >= 1, "assembly.first_a2u_ring_step", "must be at least 1");
  require(s.assembly.first_a2a_ring_step >= 1, "assembly.first_a2a_ring_step", "must be at least 1");
  require(s.max_a2a_ring_start >= s.assembly.first_a2a_ring_step, "scenario.max_a2a_ring_start",
          "must not precede assembly.first_a2a_ring_step");
  require(s.floor.max_iterations >= 1, "floor.max_iterations", "must be at least 1");
  require(s.los_resolution > 0, "scenario.los_resolution", "must be positive");
  require(s.repair_step > 0, "scenario.repair_step", "must be positive");
  require(s.max_repair_rounds >= 0, "scenario.max_repair_rounds", "must be non-negative");
  if (!terrain.file) {
    const SynthTerrainSpec& t = terrain.synth;
    require(t.cell > 0, "terrain.cell", "must be positive");
    require(t.extent.x() > t.cell && t.extent.y() > t.cell, "terrain.extent", "must span more than one cell");
    require(t.base_depth < 0, "terrain.base_depth", "must be negative");
    require(t.clearance >= 0, "terrain.clearance", "must be non-negative");
    require(t.seamounts >= 0 && t.valleys >= 0, "terrain.seamounts", "feature counts must be non-negative");
  }
}

std::shared_ptr<const SeafloorMap> RunConfig::load_terrain() const {
  if (terrain.file) {
    try {
      return std::make_shared<const SeafloorMap>(SeafloorMap::load(*terrain.file));
    } catch (const std::exception& e) {
      throw ConfigError(e.what(), "terrain.file");
    }
  }
  return std::make_shared<const SeafloorMap>(synth_terrain(terrain.synth));
}

std::string RunConfig::echo() const {
  RunConfig copy = *this;
  const Table t = make_table(copy);
  std::ostringstream os;
  std::string section;
  for (const Field& f : t.fields()) {
    // where the artifacts go is not part of the run
    if (f.section == "output" && f.key == "dir") continue;
    const auto values = f.get();
    if (values.empty()) continue;
    if (f.section != section) {
      if (!section.empty()) os << '\n';
      section = f.section;
      os << '[' << section << "]\n";
    }
    for (const auto& v : values) os << f.key << " = " << v << '\n';
  }
  return os.str();
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig c;
  const Table t = make_table(c);
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    const int indent = int(line.find_first_not_of(" \t")) + 1;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError("unterminated section header", "", line_no, indent);
      section = std::string(trim(body.substr(1, body.size() - 2)));
      if (!t.has_section(section)) throw ConfigError("unknown section [" + section + "]", section, line_no, indent + 1);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value", "", line_no, indent);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const int value_col = value.empty() ? int(eq) + 2 : int(line.find_first_not_of(" \t", eq + 1)) + 1;
    if (section.empty()) throw ConfigError("key '" + key + "' outside any section", key, line_no, indent);
    const std::string name = section + "." + key;
    const Field* f = t.find(section, key);
    if (!f) throw ConfigError("unknown key '" + key + "' in [" + section + "]", name, line_no, indent);
    if (!f->repeatable && !seen.insert(name).second) throw ConfigError("duplicate key '" + key + "'", name, line_no, indent);
    if (value.empty()) throw ConfigError("missing value for '" + key + "'", name, line_no, value_col);
    try {
      f->set(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(e.what()) + " for '" + key + "'", name, line_no, value_col);
    }
    if (section == "terrain" && key != "file") c.terrain.synth_keys = true;
  }
  if (c.terrain.file && c.terrain.file->is_relative() && !base_dir.empty()) c.terrain.file = base_dir / *c.terrain.file;
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string(), "");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace auvmpc
