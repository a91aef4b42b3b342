#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ekfloc/geometry.hpp"
#include "ekfloc/laser.hpp"
#include "ekfloc/occupancy_grid.hpp"
#include "ekfloc/sensors.hpp"

namespace ekfloc {

struct Particle {
  Pose2D pose;
  double weight = 0.0;
};

struct ParticleSet {
  std::vector<Particle> particles;

  std::size_t size() const { return particles.size(); }
  double weight_sum() const;
  /// Rescales weights to sum to one. Throws if the sum is not positive.
  void normalize();
  double effective_sample_size() const;
};

/// Fixed-size bootstrap Monte Carlo localizer settings.
struct MclConfig {
  int beam_stride = 8;         // use every n-th beam for the likelihood
  double sigma_hit = 0.5;      // m, beam likelihood spread
  double z_hit = 0.95;         // mixture weight of the Gaussian hit term
  double z_rand = 0.05;        // mixture weight of the uniform term
  double jitter_xy = 0.05;     // m, per-update particle diffusion
  double jitter_theta = deg_to_rad(3.0);  // rad
  double resample_ratio = 0.5; // resample when ESS < ratio * N
  Eigen::Vector3d cov_floor{1e-4, 1e-4, 1e-4};

  void validate() const;
};

struct MclResult {
  ParticleSet particles;
  /// MapPose measurement: weighted mean pose (circular mean heading) with
  /// the weighted sample covariance, eigenvalues floored at cov_floor.
  Measurement measurement;
  /// False when every particle had zero likelihood; the particles are then
  /// returned propagated but unweighted and the measurement must not be used.
  bool usable = true;
};

ParticleSet uniform_particles(const OccupancyGrid& grid, int n, std::uint64_t rng_seed);
ParticleSet gaussian_particles(const Pose2D& center, double sigma_xy, double sigma_theta, int n,
                               std::uint64_t rng_seed);

/// Weighted mean pose and (x, y, theta) covariance of a particle set.
Pose2D weighted_mean_pose(const ParticleSet& set);
Eigen::Matrix3d weighted_covariance(const ParticleSet& set, const Pose2D& mean);

/// One localization cycle: propagate every particle by motion_delta (in its
/// own frame) plus Gaussian jitter, reweight against the scan, summarize,
/// and systematically resample when the effective sample size drops.
MclResult mcl_localize(const ParticleSet& particles, const LaserScan& scan,
                       const OccupancyGrid& grid, const Pose2D& motion_delta,
                       std::uint64_t rng_seed, const MclConfig& config = {});

}  // namespace ekfloc
