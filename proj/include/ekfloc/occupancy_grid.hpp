#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "ekfloc/geometry.hpp"

namespace ekfloc {

class MapFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CellIndex {
  int ix = 0;
  int iy = 0;
};

/// Row-major occupancy map. Cell (0, 0) has its lower-left corner at
/// origin; ix grows along the origin's x axis, iy along its y axis.
/// Cells store occupancy in [0, 1] and count as obstacles at or above
/// occupied_threshold.
class OccupancyGrid {
 public:
  OccupancyGrid(int width, int height, double resolution, Pose2D origin = {},
                double occupied_threshold = 0.65);
  OccupancyGrid(int width, int height, double resolution, Pose2D origin,
                double occupied_threshold, std::vector<double> cells);

  /// A grid covering size_x by size_y meters, all free.
  static OccupancyGrid empty(double size_x, double size_y, double resolution, Pose2D origin = {});

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Pose2D& origin() const { return origin_; }
  double occupied_threshold() const { return occupied_threshold_; }
  const std::vector<double>& cells() const { return cells_; }

  bool in_bounds(int ix, int iy) const { return ix >= 0 && iy >= 0 && ix < width_ && iy < height_; }
  double at(int ix, int iy) const { return cells_[index(ix, iy)]; }
  void set(int ix, int iy, double occupancy);
  bool occupied(int ix, int iy) const { return at(ix, iy) >= occupied_threshold_; }

  /// World point expressed in the grid frame (meters, relative to origin).
  Eigen::Vector2d to_grid_frame(double wx, double wy) const;
  std::optional<CellIndex> cell_of(double wx, double wy) const;
  bool contains(double wx, double wy) const { return cell_of(wx, wy).has_value(); }
  /// True if the point is inside the grid and its cell is not an obstacle.
  bool is_free(double wx, double wy) const;

  /// Sets every cell whose center lies in the grid-frame box [x0,x1]x[y0,y1].
  void fill_box(double x0, double y0, double x1, double y1, double occupancy = 1.0);
  /// Marks a border of the given thickness (meters) as occupied.
  void add_border_walls(double thickness);

 private:
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(ix);
  }

  int width_;
  int height_;
  double resolution_;
  Pose2D origin_;
  double occupied_threshold_;
  std::vector<double> cells_;
};

/// Loads a PGM image (P2 or P5) plus its sidecar metadata (YAML with keys
/// resolution, origin_x, origin_y, origin_theta, occupied_threshold).
/// Darker pixels map to higher occupancy: occ = (maxval - pixel) / maxval.
/// The first image row is the top (highest iy) of the grid.
OccupancyGrid load_map(const std::filesystem::path& pgm_path,
                       const std::filesystem::path& meta_path);

/// Writes an 8-bit P5 image and its metadata sidecar.
void save_map(const OccupancyGrid& grid, const std::filesystem::path& pgm_path,
              const std::filesystem::path& meta_path);

}  // namespace ekfloc
