#pragma once

#include <cstdint>
#include <vector>

#include "ekfloc/geometry.hpp"
#include "ekfloc/occupancy_grid.hpp"

namespace ekfloc {

/// Planar range scan. Beams are evenly spaced from angle_min to angle_max
/// (inclusive), measured relative to the sensor heading.
struct LaserScan {
  double t = 0.0;
  double angle_min = deg_to_rad(-135.0);
  double angle_max = deg_to_rad(135.0);
  double max_range = 50.0;
  std::vector<double> ranges;

  int n_beams() const { return static_cast<int>(ranges.size()); }
  double beam_angle(int i) const;
};

/// Distance from origin along heading + beam_angle to the first occupied
/// cell, or max_range when nothing is hit within range (or the ray leaves
/// the map). Uses exact cell traversal. Throws std::invalid_argument if the
/// origin lies outside the grid.
double ray_cast(const OccupancyGrid& grid, const Pose2D& origin, double beam_angle,
                double max_range);

/// Noisy scan over a 270 degree field of view centred on the pose heading.
/// Each range is ray_cast + N(0, sigma_range), clamped to [0, max_range].
LaserScan simulate_scan(const OccupancyGrid& grid, const Pose2D& true_pose, int n_beams,
                        double max_range, double sigma_range, std::uint64_t rng_seed,
                        double t = 0.0);

}  // namespace ekfloc
