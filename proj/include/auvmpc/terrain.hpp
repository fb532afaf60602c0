#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace auvmpc {

class OutOfBoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class TerrainFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gridded seafloor depth field Z(x, y).
///
/// Depths are negative (below the surface). Node (i, j) sits at
/// (origin.x + j * cell.x, origin.y + i * cell.y); the grid matrix is
/// indexed (row = i along y, column = j along x). Everything at or below
/// the interpolated surface is obstacle.
class SeafloorMap {
 public:
  SeafloorMap(Eigen::Vector2d origin, Eigen::Vector2d cell, Eigen::MatrixXd depth, double clearance);

  [[nodiscard]] const Eigen::Vector2d& origin() const { return origin_; }
  [[nodiscard]] const Eigen::Vector2d& cell() const { return cell_; }
  [[nodiscard]] const Eigen::MatrixXd& depth() const { return depth_; }
  [[nodiscard]] double clearance() const { return clearance_; }
  [[nodiscard]] Eigen::Index rows() const { return depth_.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return depth_.cols(); }
  [[nodiscard]] Eigen::Vector2d upper_corner() const;
  [[nodiscard]] bool contains(double x, double y) const;

  /// Bilinear interpolation of the depth grid.
  [[nodiscard]] double depth_at(double x, double y) const;

  /// Largest grid depth within `radius` of (x, y) plus the interpolated value there.
  [[nodiscard]] double max_depth_near(double x, double y, double radius) const;

  [[nodiscard]] bool collision_free(const Eigen::Vector3d& p) const;

  void write(std::ostream& os) const;
  void save(const std::filesystem::path& path) const;
  static SeafloorMap read(std::istream& is);
  static SeafloorMap load(const std::filesystem::path& path);

  friend bool operator==(const SeafloorMap& a, const SeafloorMap& b);

 private:
  Eigen::Vector2d origin_;
  Eigen::Vector2d cell_;
  Eigen::MatrixXd depth_;
  double clearance_;
};

/// Evenly spaced samples along a 3D segment, endpoints included.
struct LosSample {
  std::vector<Eigen::Vector3d> points;
  double resolution;
};

LosSample interpolate_line(const Eigen::Vector3d& from, const Eigen::Vector3d& to, double resolution);

/// True iff every interpolated sample stays strictly above floor + clearance.
bool los_clear(const SeafloorMap& map, const Eigen::Vector3d& from, const Eigen::Vector3d& to, double resolution);

inline bool collision_free(const SeafloorMap& map, const Eigen::Vector3d& p) { return map.collision_free(p); }

struct TerrainFeature {
  Eigen::Vector2d center;
  double amplitude;  // positive raises the floor (seamount), negative lowers it (valley)
  double sigma;      // Gaussian width, m
};

struct SynthTerrainSpec {
  Eigen::Vector2d origin{-1000.0, -1000.0};
  Eigen::Vector2d extent{6000.0, 6000.0};
  double cell = 25.0;
  std::uint64_t seed = 1;
  int seamounts = 0;
  int valleys = 0;
  double base_depth = -300.0;
  double amplitude = 100.0;
  double sigma_min = 150.0;
  double sigma_max = 400.0;
  double clearance = 5.0;
  std::vector<TerrainFeature> features;  // placed in addition to the random ones
};

/// Flat base plus Gaussian seamounts and valleys. Deterministic per seed.
SeafloorMap synth_terrain(const SynthTerrainSpec& spec);

}  // namespace auvmpc
