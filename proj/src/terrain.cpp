#include "auvmpc/terrain.hpp"

#include "auvmpc/text_format.hpp"
#include "auvmpc/vehicle_models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace auvmpc {

SeafloorMap::SeafloorMap(Eigen::Vector2d origin, Eigen::Vector2d cell, Eigen::MatrixXd depth, double clearance)
    : origin_(std::move(origin)), cell_(std::move(cell)), depth_(std::move(depth)), clearance_(clearance) {
  if (!(cell_.x() > 0) || !(cell_.y() > 0)) throw std::invalid_argument("terrain cell sizes must be positive");
  if (depth_.rows() < 2 || depth_.cols() < 2) throw std::invalid_argument("terrain grid needs at least 2x2 nodes");
  if (!depth_.allFinite()) throw std::invalid_argument("terrain depths must be finite");
  if (depth_.maxCoeff() >= 0) throw std::invalid_argument("terrain depths must be below the surface");
  if (!(clearance_ > 0)) throw std::invalid_argument("terrain clearance must be positive");
}

Eigen::Vector2d SeafloorMap::upper_corner() const {
  return origin_ + Eigen::Vector2d(cell_.x() * double(cols() - 1), cell_.y() * double(rows() - 1));
}

bool SeafloorMap::contains(double x, double y) const {
  const Eigen::Vector2d hi = upper_corner();
  return x >= origin_.x() && y >= origin_.y() && x <= hi.x() && y <= hi.y();
}

double SeafloorMap::depth_at(double x, double y) const {
  if (!contains(x, y)) {
    std::ostringstream os;
    os << "point (" << x << ", " << y << ") outside terrain extents";
    throw OutOfBoundsError(os.str());
  }
  const double fx = (x - origin_.x()) / cell_.x();
  const double fy = (y - origin_.y()) / cell_.y();
  const auto j = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(fx)), cols() - 2);
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(fy)), rows() - 2);
  const double tx = fx - double(j);
  const double ty = fy - double(i);
  const double z00 = depth_(i, j), z01 = depth_(i, j + 1);
  const double z10 = depth_(i + 1, j), z11 = depth_(i + 1, j + 1);
  return (1 - ty) * ((1 - tx) * z00 + tx * z01) + ty * ((1 - tx) * z10 + tx * z11);
}

double SeafloorMap::max_depth_near(double x, double y, double radius) const {
  double best = depth_at(x, y);
  if (radius <= 0) return best;
  const auto j0 = static_cast<Eigen::Index>(std::floor((x - radius - origin_.x()) / cell_.x()));
  const auto j1 = static_cast<Eigen::Index>(std::ceil((x + radius - origin_.x()) / cell_.x()));
  const auto i0 = static_cast<Eigen::Index>(std::floor((y - radius - origin_.y()) / cell_.y()));
  const auto i1 = static_cast<Eigen::Index>(std::ceil((y + radius - origin_.y()) / cell_.y()));
  for (Eigen::Index i = std::max<Eigen::Index>(i0, 0); i <= std::min(i1, rows() - 1); ++i) {
    for (Eigen::Index j = std::max<Eigen::Index>(j0, 0); j <= std::min(j1, cols() - 1); ++j) {
      const double nx = origin_.x() + cell_.x() * double(j) - x;
      const double ny = origin_.y() + cell_.y() * double(i) - y;
      if (nx * nx + ny * ny <= radius * radius) best = std::max(best, depth_(i, j));
    }
  }
  return best;
}

bool SeafloorMap::collision_free(const Eigen::Vector3d& p) const {
  return p.z() >= depth_at(p.x(), p.y()) + clearance_;
}

void SeafloorMap::write(std::ostream& os) const {
  os << "# auvmpc seafloor v1\n";
  os << "origin " << format_double(origin_.x()) << ' ' << format_double(origin_.y()) << '\n';
  os << "cell " << format_double(cell_.x()) << ' ' << format_double(cell_.y()) << '\n';
  os << "size " << cols() << ' ' << rows() << '\n';
  os << "clearance " << format_double(clearance_) << '\n';
  for (Eigen::Index i = 0; i < rows(); ++i) {
    for (Eigen::Index j = 0; j < cols(); ++j) {
      if (j) os << ',';
      os << format_double(depth_(i, j));
    }
    os << '\n';
  }
}

void SeafloorMap::save(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(os);
}

namespace {

std::vector<std::string> header_fields(std::istream& is, const std::string& key, std::size_t count, int& line_no) {
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string k;
    ls >> k;
    if (k != key) {
      throw TerrainFormatError("line " + std::to_string(line_no) + ": expected '" + key + "', found '" + k + "'");
    }
    std::vector<std::string> out;
    std::string tok;
    while (ls >> tok) out.push_back(tok);
    if (out.size() != count) {
      throw TerrainFormatError("line " + std::to_string(line_no) + ": '" + key + "' expects " +
                               std::to_string(count) + " values");
    }
    return out;
  }
  throw TerrainFormatError("unexpected end of terrain file before '" + key + "'");
}

double parse_field(std::string_view s, int line_no) {
  try {
    return parse_double(s);
  } catch (const std::invalid_argument&) {
    throw TerrainFormatError("line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
}

}  // namespace

SeafloorMap SeafloorMap::read(std::istream& is) {
  int line_no = 0;
  const auto o = header_fields(is, "origin", 2, line_no);
  const double ox = parse_field(o[0], line_no), oy = parse_field(o[1], line_no);
  const auto c = header_fields(is, "cell", 2, line_no);
  const double cx = parse_field(c[0], line_no), cy = parse_field(c[1], line_no);
  const auto sz = header_fields(is, "size", 2, line_no);
  const auto nx = static_cast<Eigen::Index>(parse_field(sz[0], line_no));
  const auto ny = static_cast<Eigen::Index>(parse_field(sz[1], line_no));
  const auto cl = header_fields(is, "clearance", 1, line_no);
  const double clearance = parse_field(cl[0], line_no);
  if (nx < 2 || ny < 2) throw TerrainFormatError("terrain size must be at least 2x2");

  Eigen::MatrixXd depth(ny, nx);
  std::string line;
  Eigen::Index row = 0;
  while (row < ny && std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (static_cast<Eigen::Index>(cells.size()) != nx) {
      throw TerrainFormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(nx) +
                               " depth values, found " + std::to_string(cells.size()));
    }
    for (Eigen::Index j = 0; j < nx; ++j) depth(row, j) = parse_field(trim(cells[std::size_t(j)]), line_no);
    ++row;
  }
  if (row != ny) throw TerrainFormatError("terrain file ends after " + std::to_string(row) + " depth rows");
  try {
    return SeafloorMap({ox, oy}, {cx, cy}, std::move(depth), clearance);
  } catch (const std::invalid_argument& e) {
    throw TerrainFormatError(e.what());
  }
}

SeafloorMap SeafloorMap::load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open terrain file " + path.string());
  return read(is);
}

bool operator==(const SeafloorMap& a, const SeafloorMap& b) {
  return a.origin_ == b.origin_ && a.cell_ == b.cell_ && a.clearance_ == b.clearance_ &&
         a.depth_.rows() == b.depth_.rows() && a.depth_.cols() == b.depth_.cols() && a.depth_ == b.depth_;
}

LosSample interpolate_line(const Eigen::Vector3d& from, const Eigen::Vector3d& to, double resolution) {
  if (!(resolution > 0)) throw std::invalid_argument("interpolation resolution must be positive");
  LosSample out{{}, resolution};
  const double length = (to - from).norm();
  if (length == 0.0) {
    out.points.push_back(from);
    return out;
  }
  const auto segments = static_cast<std::size_t>(std::ceil(length / resolution));
  out.points.reserve(segments + 1);
  for (std::size_t s = 0; s <= segments; ++s) {
    if (s == segments) {
      out.points.push_back(to);
    } else {
      const double t = double(s) / double(segments);
      out.points.push_back(from + t * (to - from));
    }
  }
  return out;
}

bool los_clear(const SeafloorMap& map, const Eigen::Vector3d& from, const Eigen::Vector3d& to, double resolution) {
  const LosSample samples = interpolate_line(from, to, resolution);
  return std::all_of(samples.points.begin(), samples.points.end(), [&](const Eigen::Vector3d& p) {
    return p.z() > map.depth_at(p.x(), p.y()) + map.clearance();
  });
}

SeafloorMap synth_terrain(const SynthTerrainSpec& spec) {
  if (!(spec.cell > 0)) throw ParameterError("terrain cell must be positive");
  if (!(spec.base_depth < 0)) throw ParameterError("base_depth must be negative");
  if (!(spec.amplitude < std::abs(spec.base_depth))) throw ParameterError("amplitude must be below |base_depth|");
  if (spec.seamounts < 0 || spec.valleys < 0) throw ParameterError("feature counts must be non-negative");
  if (!(spec.sigma_min > 0) || spec.sigma_max < spec.sigma_min) throw ParameterError("bad sigma range");

  const auto nx = static_cast<Eigen::Index>(std::floor(spec.extent.x() / spec.cell)) + 1;
  const auto ny = static_cast<Eigen::Index>(std::floor(spec.extent.y() / spec.cell)) + 1;

  std::vector<TerrainFeature> features;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> ux(spec.origin.x(), spec.origin.x() + spec.extent.x());
  std::uniform_real_distribution<double> uy(spec.origin.y(), spec.origin.y() + spec.extent.y());
  std::uniform_real_distribution<double> us(spec.sigma_min, spec.sigma_max);
  for (int s = 0; s < spec.seamounts + spec.valleys; ++s) {
    const double cx = ux(rng);
    const double cy = uy(rng);
    const double sigma = us(rng);
    features.push_back({{cx, cy}, s < spec.seamounts ? spec.amplitude : -spec.amplitude, sigma});
  }
  features.insert(features.end(), spec.features.begin(), spec.features.end());

  Eigen::MatrixXd depth = Eigen::MatrixXd::Constant(ny, nx, spec.base_depth);
  for (Eigen::Index i = 0; i < ny; ++i) {
    const double y = spec.origin.y() + spec.cell * double(i);
    for (Eigen::Index j = 0; j < nx; ++j) {
      const double x = spec.origin.x() + spec.cell * double(j);
      for (const auto& f : features) {
        const double r2 = (Eigen::Vector2d(x, y) - f.center).squaredNorm();
        depth(i, j) += f.amplitude * std::exp(-r2 / (2 * f.sigma * f.sigma));
      }
    }
  }
  if (depth.maxCoeff() >= 0) throw ParameterError("synthetic terrain breaches the surface");
  return SeafloorMap(spec.origin, {spec.cell, spec.cell}, std::move(depth), spec.clearance);
}

}  // namespace auvmpc
