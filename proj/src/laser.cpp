#include "ekfloc/laser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ekfloc {

double LaserScan::beam_angle(int i) const {
  if (n_beams() <= 1) {
    return 0.5 * (angle_min + angle_max);
  }
  return angle_min + (angle_max - angle_min) * static_cast<double>(i) / (n_beams() - 1);
}

double ray_cast(const OccupancyGrid& grid, const Pose2D& origin, double beam_angle,
                double max_range) {
  if (!(max_range >= 0.0)) {
    throw std::invalid_argument("ray_cast: max_range must be >= 0");
  }
  const auto start = grid.cell_of(origin.x(), origin.y());
  if (!start) {
    throw std::invalid_argument("ray_cast: origin outside the grid");
  }
  int ix = start->ix;
  int iy = start->iy;
  if (grid.occupied(ix, iy)) {
    return 0.0;
  }

  // Work in cell units inside the grid frame.
  const double res = grid.resolution();
  const Eigen::Vector2d p = grid.to_grid_frame(origin.x(), origin.y()) / res;
  const double heading = origin.theta() + beam_angle - grid.origin().theta();
  const double dx = std::cos(heading);
  const double dy = std::sin(heading);
  constexpr double kInf = std::numeric_limits<double>::infinity();

  const int step_x = dx > 0.0 ? 1 : -1;
  const int step_y = dy > 0.0 ? 1 : -1;
  const double delta_x = dx != 0.0 ? 1.0 / std::abs(dx) : kInf;
  const double delta_y = dy != 0.0 ? 1.0 / std::abs(dy) : kInf;
  double next_x = dx != 0.0 ? ((ix + (dx > 0.0 ? 1 : 0)) - p.x()) / dx : kInf;
  double next_y = dy != 0.0 ? ((iy + (dy > 0.0 ? 1 : 0)) - p.y()) / dy : kInf;
  const double limit = max_range / res;

  while (true) {
    double t = 0.0;
    if (next_x < next_y) {
      t = next_x;
      next_x += delta_x;
      ix += step_x;
    } else {
      t = next_y;
      next_y += delta_y;
      iy += step_y;
    }
    if (t > limit || !grid.in_bounds(ix, iy)) {
      return max_range;
    }
    if (grid.occupied(ix, iy)) {
      return std::min(t * res, max_range);
    }
  }
}

LaserScan simulate_scan(const OccupancyGrid& grid, const Pose2D& true_pose, int n_beams,
                        double max_range, double sigma_range, std::uint64_t rng_seed, double t) {
  if (n_beams <= 0) {
    throw std::invalid_argument("simulate_scan: n_beams must be positive");
  }
  if (!(sigma_range >= 0.0)) {
    throw std::invalid_argument("simulate_scan: sigma_range must be >= 0");
  }
  LaserScan scan;
  scan.t = t;
  scan.max_range = max_range;
  scan.ranges.resize(static_cast<std::size_t>(n_beams));

  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < n_beams; ++i) {
    double r = ray_cast(grid, true_pose, scan.beam_angle(i), max_range);
    if (sigma_range > 0.0) {
      r += sigma_range * noise(rng);
    }
    scan.ranges[static_cast<std::size_t>(i)] = std::clamp(r, 0.0, max_range);
  }
  return scan;
}

}  // namespace ekfloc
