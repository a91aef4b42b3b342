#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ekfloc/mcl.hpp"
#include "ekfloc/occupancy_grid.hpp"
#include "ekfloc/sensor_log.hpp"
#include "ekfloc/sensors.hpp"
#include "ekfloc/trajectory.hpp"

namespace ekfloc {

/// Sensor noise and rate parameters for the simulators.
struct SimNoise {
  // Encoder: multiplicative slip on each wheel's ticks, then integer rounding.
  double encoder_slip_sigma = 0.01;
  bool encoder_rounding = true;
  // Compass heading noise and output resolution; gyro-like yaw-rate noise.
  double compass_sigma = deg_to_rad(0.2);
  double compass_step = deg_to_rad(0.1);
  double gyro_sigma = 0.02;  // rad/s
  // Map pose fixes (shortcut mode).
  double map_sigma_xy = 0.02;
  double map_sigma_theta = deg_to_rad(0.5);
  // Laser range noise (full mode).
  double laser_sigma_range = 0.008;

  double map_rate = 17.0;
  double compass_rate = 50.0;
  double encoder_rate = 50.0;

  void validate() const;
};

enum class MapMode { Shortcut, Full };

/// Settings for the scan-matching map source.
struct MapPipelineConfig {
  int particles = 300;
  int n_beams = 271;
  double max_range = 20.0;
  double init_sigma_xy = 0.1;
  double init_sigma_theta = deg_to_rad(3.0);
  MclConfig mcl;
};

/// Variance floors applied when deriving R from noise parameters, so that
/// noise-free simulations still produce positive definite covariances.
inline constexpr double kMinLinearVariance = 1e-8;   // m^2, (m/s)^2
inline constexpr double kMinAngularVariance = 1e-10;  // rad^2, (rad/s)^2

/// R for encoder twists: half-tick quantization (uniform, variance q^2/12)
/// plus slip at the nominal wheel speed, propagated through the
/// differential-drive kinematics.
Eigen::Matrix2d derive_encoder_R(const WheelGeometry& geom, const SimNoise& noise,
                                 double nominal_speed);
/// R for compass readings: heading noise plus quantization, gyro noise.
Eigen::Matrix2d derive_compass_R(const SimNoise& noise);
/// R for shortcut map fixes.
Eigen::Matrix3d derive_map_R(const SimNoise& noise);

/// Encoder twists at noise.encoder_rate. Each interval's truth motion is
/// converted to wheel ticks, perturbed by slip, optionally rounded, and
/// converted back with ticks_to_twist. Stamped at the interval end.
std::vector<Measurement> simulate_encoder_log(const std::vector<TruthSample>& truth,
                                              const WheelGeometry& geom, const SimNoise& noise,
                                              std::uint64_t seed, const Eigen::Matrix2d& R);

/// Compass readings at noise.compass_rate: quantized noisy heading plus
/// noisy yaw rate.
std::vector<Measurement> simulate_compass_log(const std::vector<TruthSample>& truth,
                                              const SimNoise& noise, std::uint64_t seed,
                                              const Eigen::Matrix2d& R);

/// Map pose fixes at noise.map_rate. Shortcut mode perturbs the true pose
/// with Gaussian noise; full mode simulates a scan per fix and runs the
/// Monte Carlo localizer, using its covariance as R. Full mode needs a grid.
std::vector<Measurement> simulate_map_log(const std::vector<TruthSample>& truth,
                                          const SimNoise& noise, std::uint64_t seed,
                                          MapMode mode, const Eigen::Matrix3d& R,
                                          const OccupancyGrid* grid = nullptr,
                                          const MapPipelineConfig& pipeline = {});

/// Walled arena around a route with a few asymmetric obstacles kept clear of
/// the route itself. The grid frame is offset so the route sits inside.
OccupancyGrid synthetic_arena(const TrajectorySpec& spec, double resolution = 0.05,
                              double margin = 2.0);

/// Derives a stream-specific seed from a run seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ekfloc
