#include "ekfloc/mcl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace ekfloc {

double ParticleSet::weight_sum() const {
  double s = 0.0;
  for (const Particle& p : particles) {
    s += p.weight;
  }
  return s;
}

void ParticleSet::normalize() {
  const double s = weight_sum();
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("ParticleSet::normalize: weights do not sum to a positive value");
  }
  for (Particle& p : particles) {
    p.weight /= s;
  }
}

double ParticleSet::effective_sample_size() const {
  double sq = 0.0;
  for (const Particle& p : particles) {
    sq += p.weight * p.weight;
  }
  return sq > 0.0 ? 1.0 / sq : 0.0;
}

void MclConfig::validate() const {
  if (beam_stride < 1 || !(sigma_hit > 0.0) || z_hit < 0.0 || z_rand < 0.0 ||
      !(z_hit + z_rand > 0.0) || jitter_xy < 0.0 || jitter_theta < 0.0 ||
      resample_ratio < 0.0 || resample_ratio > 1.0 || !(cov_floor.minCoeff() > 0.0)) {
    throw std::invalid_argument("MclConfig: invalid parameter");
  }
}

ParticleSet uniform_particles(const OccupancyGrid& grid, int n, std::uint64_t rng_seed) {
  if (n <= 0) {
    throw std::invalid_argument("uniform_particles: n must be positive");
  }
  std::vector<CellIndex> free_cells;
  for (int iy = 0; iy < grid.height(); ++iy) {
    for (int ix = 0; ix < grid.width(); ++ix) {
      if (!grid.occupied(ix, iy)) {
        free_cells.push_back({ix, iy});
      }
    }
  }
  if (free_cells.empty()) {
    throw std::invalid_argument("uniform_particles: grid has no free cells");
  }
  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, free_cells.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double c = std::cos(grid.origin().theta());
  const double s = std::sin(grid.origin().theta());

  ParticleSet set;
  set.particles.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const CellIndex cell = free_cells[pick(rng)];
    const double gx = (cell.ix + unit(rng)) * grid.resolution();
    const double gy = (cell.iy + unit(rng)) * grid.resolution();
    const double theta = -kPi + kTwoPi * unit(rng);
    set.particles.push_back({Pose2D(grid.origin().x() + c * gx - s * gy,
                                    grid.origin().y() + s * gx + c * gy, theta),
                             1.0 / n});
  }
  return set;
}

ParticleSet gaussian_particles(const Pose2D& center, double sigma_xy, double sigma_theta, int n,
                               std::uint64_t rng_seed) {
  if (n <= 0) {
    throw std::invalid_argument("gaussian_particles: n must be positive");
  }
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ParticleSet set;
  set.particles.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = center.x() + sigma_xy * gauss(rng);
    const double y = center.y() + sigma_xy * gauss(rng);
    const double th = center.theta() + sigma_theta * gauss(rng);
    set.particles.push_back({Pose2D(x, y, th), 1.0 / n});
  }
  return set;
}

Pose2D weighted_mean_pose(const ParticleSet& set) {
  double x = 0.0;
  double y = 0.0;
  double sn = 0.0;
  double cs = 0.0;
  for (const Particle& p : set.particles) {
    x += p.weight * p.pose.x();
    y += p.weight * p.pose.y();
    sn += p.weight * std::sin(p.pose.theta());
    cs += p.weight * std::cos(p.pose.theta());
  }
  const double w = set.weight_sum();
  return {x / w, y / w, std::atan2(sn, cs)};
}

Eigen::Matrix3d weighted_covariance(const ParticleSet& set, const Pose2D& mean) {
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Particle& p : set.particles) {
    const Eigen::Vector3d d(p.pose.x() - mean.x(), p.pose.y() - mean.y(),
                            angle_diff(p.pose.theta(), mean.theta()));
    cov += p.weight * d * d.transpose();
  }
  return cov / set.weight_sum();
}

namespace {

Eigen::Matrix3d floor_covariance(const Eigen::Matrix3d& cov, const Eigen::Vector3d& floor) {
  Eigen::Matrix3d sym = 0.5 * (cov + cov.transpose());
  // Raise the diagonal floor first, then lift any eigenvalue still below the
  // smallest floor entry so the result is always SPD.
  for (int i = 0; i < 3; ++i) {
    sym(i, i) = std::max(sym(i, i), floor(i));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(sym);
  const Eigen::Vector3d lifted = eig.eigenvalues().cwiseMax(floor.minCoeff());
  Eigen::Matrix3d out = eig.eigenvectors() * lifted.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

std::vector<Particle> systematic_resample(const std::vector<Particle>& in, std::mt19937_64& rng) {
  const std::size_t n = in.size();
  std::uniform_real_distribution<double> unit(0.0, 1.0 / static_cast<double>(n));
  const double u0 = unit(rng);
  std::vector<Particle> out;
  out.reserve(n);
  double cumulative = in.front().weight;
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = u0 + static_cast<double>(i) / static_cast<double>(n);
    while (u > cumulative && j + 1 < n) {
      ++j;
      cumulative += in[j].weight;
    }
    out.push_back({in[j].pose, 1.0 / static_cast<double>(n)});
  }
  return out;
}

}  // namespace

MclResult mcl_localize(const ParticleSet& particles, const LaserScan& scan,
                       const OccupancyGrid& grid, const Pose2D& motion_delta,
                       std::uint64_t rng_seed, const MclConfig& config) {
  config.validate();
  if (particles.particles.empty()) {
    throw std::invalid_argument("mcl_localize: empty particle set");
  }
  if (scan.ranges.empty()) {
    throw std::invalid_argument("mcl_localize: empty scan");
  }
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const std::size_t n = particles.size();
  std::vector<Particle> moved;
  moved.reserve(n);
  for (const Particle& p : particles.particles) {
    Pose2D q = p.pose.compose(motion_delta);
    if (config.jitter_xy > 0.0 || config.jitter_theta > 0.0) {
      q = Pose2D(q.x() + config.jitter_xy * gauss(rng), q.y() + config.jitter_xy * gauss(rng),
                 q.theta() + config.jitter_theta * gauss(rng));
    }
    moved.push_back({q, p.weight});
  }

  const double norm = 1.0 / (config.sigma_hit * std::sqrt(kTwoPi));
  const double uniform = config.z_rand / scan.max_range;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> log_w(n, kNegInf);
  double best = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    const Pose2D& pose = moved[i].pose;
    if (!(moved[i].weight > 0.0) || !grid.is_free(pose.x(), pose.y())) {
      continue;
    }
    double ll = std::log(moved[i].weight);
    for (int b = 0; b < scan.n_beams(); b += config.beam_stride) {
      const double expected = ray_cast(grid, pose, scan.beam_angle(b), scan.max_range);
      const double e = (scan.ranges[static_cast<std::size_t>(b)] - expected) / config.sigma_hit;
      ll += std::log(config.z_hit * norm * std::exp(-0.5 * e * e) + uniform);
    }
    log_w[i] = ll;
    best = std::max(best, ll);
  }

  MclResult result;
  if (best == kNegInf) {
    result.particles.particles = std::move(moved);
    result.usable = false;
    const Pose2D mean = weighted_mean_pose(particles);
    result.measurement = Measurement{scan.t, Source::MapPose,
                                     Eigen::Vector3d(mean.x(), mean.y(), mean.theta()),
                                     Eigen::Matrix3d(config.cov_floor.asDiagonal())};
    return result;
  }

  for (std::size_t i = 0; i < n; ++i) {
    moved[i].weight = log_w[i] == kNegInf ? 0.0 : std::exp(log_w[i] - best);
  }
  ParticleSet weighted{std::move(moved)};
  weighted.normalize();

  const Pose2D mean = weighted_mean_pose(weighted);
  const Eigen::Matrix3d cov = floor_covariance(weighted_covariance(weighted, mean),
                                               config.cov_floor);
  result.measurement =
      make_measurement(scan.t, Source::MapPose,
                       Eigen::Vector3d(mean.x(), mean.y(), mean.theta()), cov);

  if (weighted.effective_sample_size() < config.resample_ratio * static_cast<double>(n)) {
    weighted.particles = systematic_resample(weighted.particles, rng);
  }
  result.particles = std::move(weighted);
  return result;
}

}  // namespace ekfloc
