#include "ekfloc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "ekfloc/laser.hpp"

namespace ekfloc {

void SimNoise::validate() const {
  for (double s : {encoder_slip_sigma, compass_sigma, compass_step, gyro_sigma, map_sigma_xy,
                   map_sigma_theta, laser_sigma_range}) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("SimNoise: noise parameters must be finite and >= 0");
    }
  }
  for (double r : {map_rate, compass_rate, encoder_rate}) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("SimNoise: sensor rates must be > 0");
    }
  }
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Eigen::Matrix2d derive_encoder_R(const WheelGeometry& geom, const SimNoise& noise,
                                 double nominal_speed) {
  geom.validate();
  const double tick_speed = geom.meters_per_tick() * noise.encoder_rate;
  const double quant = noise.encoder_rounding ? tick_speed * tick_speed / 12.0 : 0.0;
  const double slip = std::pow(noise.encoder_slip_sigma * nominal_speed, 2);
  const double wheel = quant + slip;
  const double var_v = std::max(wheel / 2.0, kMinLinearVariance);
  const double var_w =
      std::max(2.0 * wheel / (geom.track_width * geom.track_width), kMinAngularVariance);
  return Eigen::Vector2d(var_v, var_w).asDiagonal();
}

Eigen::Matrix2d derive_compass_R(const SimNoise& noise) {
  const double var_th = std::max(
      noise.compass_sigma * noise.compass_sigma + noise.compass_step * noise.compass_step / 12.0,
      kMinAngularVariance);
  const double var_w = std::max(noise.gyro_sigma * noise.gyro_sigma, kMinAngularVariance);
  return Eigen::Vector2d(var_th, var_w).asDiagonal();
}

Eigen::Matrix3d derive_map_R(const SimNoise& noise) {
  const double var_xy = std::max(noise.map_sigma_xy * noise.map_sigma_xy, kMinLinearVariance);
  const double var_th =
      std::max(noise.map_sigma_theta * noise.map_sigma_theta, kMinAngularVariance);
  return Eigen::Vector3d(var_xy, var_xy, var_th).asDiagonal();
}

namespace {

void require_truth(const std::vector<TruthSample>& truth) {
  if (truth.empty()) {
    throw std::invalid_argument("simulator: empty truth");
  }
}

// Sample times t0 + j / rate, j >= first, up to the end of the truth.
std::vector<double> sample_times(const std::vector<TruthSample>& truth, double rate, int first) {
  const double t0 = truth.front().t;
  const double t1 = truth.back().t;
  std::vector<double> times;
  for (long long j = first;; ++j) {
    const double t = t0 + static_cast<double>(j) / rate;
    if (t > t1 + 1e-9) {
      break;
    }
    times.push_back(t);
  }
  return times;
}

}  // namespace

std::vector<Measurement> simulate_encoder_log(const std::vector<TruthSample>& truth,
                                              const WheelGeometry& geom, const SimNoise& noise,
                                              std::uint64_t seed, const Eigen::Matrix2d& R) {
  require_truth(truth);
  geom.validate();
  noise.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double mpt = geom.meters_per_tick();
  const double half_track = 0.5 * geom.track_width;
  std::vector<Measurement> out;
  double prev = truth.front().t;
  for (double t : sample_times(truth, noise.encoder_rate, 1)) {
    const Displacement d = truth_displacement(truth, prev, t);
    double left = (d.distance - d.dtheta * half_track) / mpt;
    double right = (d.distance + d.dtheta * half_track) / mpt;
    const double slip_l = gauss(rng);
    const double slip_r = gauss(rng);
    left *= 1.0 + noise.encoder_slip_sigma * slip_l;
    right *= 1.0 + noise.encoder_slip_sigma * slip_r;
    if (noise.encoder_rounding) {
      left = std::round(left);
      right = std::round(right);
    }
    const Twist2D tw = ticks_to_twist(left, right, t - prev, geom);
    out.push_back(make_measurement(t, Source::EncoderTwist, Eigen::Vector2d(tw.v, tw.omega), R));
    prev = t;
  }
  return out;
}

std::vector<Measurement> simulate_compass_log(const std::vector<TruthSample>& truth,
                                              const SimNoise& noise, std::uint64_t seed,
                                              const Eigen::Matrix2d& R) {
  require_truth(truth);
  noise.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Measurement> out;
  for (double t : sample_times(truth, noise.compass_rate, 0)) {
    double heading = truth_pose_at(truth, t).theta() + noise.compass_sigma * gauss(rng);
    if (noise.compass_step > 0.0) {
      heading = noise.compass_step * std::round(heading / noise.compass_step);
    }
    const double rate = truth_twist_at(truth, t).omega + noise.gyro_sigma * gauss(rng);
    out.push_back(make_measurement(t, Source::CompassHeading,
                                   Eigen::Vector2d(wrap_angle(heading), rate), R));
  }
  return out;
}

std::vector<Measurement> simulate_map_log(const std::vector<TruthSample>& truth,
                                          const SimNoise& noise, std::uint64_t seed,
                                          MapMode mode, const Eigen::Matrix3d& R,
                                          const OccupancyGrid* grid,
                                          const MapPipelineConfig& pipeline) {
  require_truth(truth);
  noise.validate();
  std::vector<Measurement> out;
  const std::vector<double> times = sample_times(truth, noise.map_rate, 0);

  if (mode == MapMode::Shortcut) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double t : times) {
      const Pose2D p = truth_pose_at(truth, t);
      const Eigen::Vector3d z(p.x() + noise.map_sigma_xy * gauss(rng),
                              p.y() + noise.map_sigma_xy * gauss(rng),
                              p.theta() + noise.map_sigma_theta * gauss(rng));
      out.push_back(make_measurement(t, Source::MapPose, z, R));
    }
    return out;
  }

  if (grid == nullptr) {
    throw std::invalid_argument("simulate_map_log: full mode requires an occupancy grid");
  }
  Pose2D prev = truth_pose_at(truth, times.front());
  ParticleSet particles =
      gaussian_particles(prev, pipeline.init_sigma_xy, pipeline.init_sigma_theta,
                         pipeline.particles, stream_seed(seed, 0));
  for (std::size_t j = 0; j < times.size(); ++j) {
    const Pose2D pose = truth_pose_at(truth, times[j]);
    if (!grid->contains(pose.x(), pose.y())) {
      throw std::invalid_argument("simulate_map_log: true pose leaves the map");
    }
    const LaserScan scan = simulate_scan(*grid, pose, pipeline.n_beams, pipeline.max_range,
                                         noise.laser_sigma_range, stream_seed(seed, 2 * j + 1),
                                         times[j]);
    MclResult r = mcl_localize(particles, scan, *grid, prev.between(pose),
                               stream_seed(seed, 2 * j + 2), pipeline.mcl);
    particles = std::move(r.particles);
    if (r.usable) {
      out.push_back(std::move(r.measurement));
    }
    prev = pose;
  }
  return out;
}

OccupancyGrid synthetic_arena(const TrajectorySpec& spec, double resolution, double margin) {
  spec.validate();
  Eigen::Vector2d lo = spec.waypoints.front();
  Eigen::Vector2d hi = lo;
  for (const auto& w : spec.waypoints) {
    lo = lo.cwiseMin(w);
    hi = hi.cwiseMax(w);
  }
  const Eigen::Vector2d size = hi - lo + Eigen::Vector2d::Constant(2.0 * margin);
  const Pose2D origin(lo.x() - margin, lo.y() - margin, 0.0);
  OccupancyGrid grid = OccupancyGrid::empty(size.x(), size.y(), resolution, origin);
  grid.add_border_walls(std::max(0.2, 2.0 * resolution));

  // Distance from a grid-frame point to the route.
  auto clearance = [&](const Eigen::Vector2d& g) {
    const Eigen::Vector2d p = g + Eigen::Vector2d(origin.x(), origin.y());
    double best = std::numeric_limits<double>::infinity();
    const auto& w = spec.waypoints;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const Eigen::Vector2d a = w[i];
      const Eigen::Vector2d b = w[(i + 1) % w.size()];
      const double u = std::clamp((p - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
      best = std::min(best, (a + u * (b - a) - p).norm());
    }
    return best;
  };

  // Boxes as fractions of the arena extent: (cx, cy, half_w, half_h) with
  // the half sizes in meters. Deliberately irregular.
  struct Box {
    double fx, fy, hw, hh;
  };
  constexpr Box kBoxes[] = {{0.28, 0.38, 0.75, 0.5},  {0.62, 0.70, 0.4, 1.0},
                            {0.80, 0.30, 0.5, 0.5},   {0.45, 0.55, 0.3, 0.3},
                            {0.04, 0.50, 0.25, 0.8},  {0.70, 0.97, 1.2, 0.25}};
  for (const Box& b : kBoxes) {
    const Eigen::Vector2d c(b.fx * size.x(), b.fy * size.y());
    const double reach = std::hypot(b.hw, b.hh);
    if (clearance(c) - reach < 0.75) {
      continue;
    }
    grid.fill_box(c.x() - b.hw, c.y() - b.hh, c.x() + b.hw, c.y() + b.hh);
  }
  return grid;
}

}  // namespace ekfloc
