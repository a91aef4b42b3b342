#include "ekfloc/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace ekfloc {

std::vector<Eigen::Vector2d> TrajectorySpec::rectangle(double width, double height) {
  return {{0.0, 0.0}, {width, 0.0}, {width, height}, {0.0, height}};
}

double TrajectorySpec::perimeter() const {
  double total = 0.0;
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    total += (waypoints[(i + 1) % waypoints.size()] - waypoints[i]).norm();
  }
  return total;
}

void TrajectorySpec::validate() const {
  if (waypoints.size() < 2) {
    throw std::invalid_argument("TrajectorySpec: need at least two waypoints");
  }
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    if (!waypoints[i].allFinite()) {
      throw std::invalid_argument("TrajectorySpec: non-finite waypoint");
    }
    if ((waypoints[(i + 1) % waypoints.size()] - waypoints[i]).norm() <= 0.0) {
      throw std::invalid_argument("TrajectorySpec: degenerate route (repeated waypoint)");
    }
  }
  if (!(speed > 0.0) || !std::isfinite(speed)) {
    throw std::invalid_argument("TrajectorySpec: speed must be > 0");
  }
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw std::invalid_argument("TrajectorySpec: sample_rate must be > 0");
  }
  if (!(turn_rate >= 0.0) || !std::isfinite(turn_rate)) {
    throw std::invalid_argument("TrajectorySpec: turn_rate must be >= 0");
  }
  if (corner_mode == CornerMode::BlendedArc && !(blend_radius > 0.0)) {
    throw std::invalid_argument("TrajectorySpec: blend_radius must be > 0");
  }
}

Pose2D integrate_twist(const Pose2D& start, const Twist2D& twist, double dt) {
  const double th = start.theta();
  const double dth = twist.omega * dt;
  if (std::abs(dth) < 1e-12) {
    return {start.x() + twist.v * dt * std::cos(th), start.y() + twist.v * dt * std::sin(th),
            th + dth};
  }
  const double r = twist.v / twist.omega;
  return {start.x() + r * (std::sin(th + dth) - std::sin(th)),
          start.y() - r * (std::cos(th + dth) - std::cos(th)), th + dth};
}

Trajectory::Trajectory(const TrajectorySpec& spec) {
  spec.validate();
  const auto& w = spec.waypoints;
  const std::size_t n = w.size();

  std::vector<Eigen::Vector2d> dir(n);
  std::vector<double> length(n);
  std::vector<double> heading(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d e = w[(i + 1) % n] - w[i];
    length[i] = e.norm();
    dir[i] = e / length[i];
    heading[i] = std::atan2(e.y(), e.x());
  }
  // turn[i]: heading change at waypoint i, between edge i-1 and edge i.
  std::vector<double> turn(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    turn[i] = angle_diff(heading[i], heading[i - 1]);
  }
  const bool blended = spec.corner_mode == CornerMode::BlendedArc;
  std::vector<double> trim(n + 1, 0.0);
  if (blended) {
    for (std::size_t i = 1; i < n; ++i) {
      trim[i] = spec.blend_radius * std::tan(0.5 * std::abs(turn[i]));
    }
  }

  double t = 0.0;
  auto push = [&](const Pose2D& start, const Twist2D& twist, double duration) {
    segments_.push_back({t, t + duration, start, twist});
    t += duration;
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double straight = length[i] - trim[i] - trim[i + 1];
    if (straight < -1e-12) {
      throw std::invalid_argument("TrajectorySpec: blend radius too large for the route");
    }
    const Eigen::Vector2d p0 = w[i] + trim[i] * dir[i];
    if (straight > 0.0) {
      push(Pose2D(p0.x(), p0.y(), heading[i]), {spec.speed, 0.0}, straight / spec.speed);
    }
    if (i + 1 == n || turn[i + 1] == 0.0) {
      continue;
    }
    const double dth = turn[i + 1];
    const Eigen::Vector2d corner = w[i + 1] - trim[i + 1] * dir[i];
    const Pose2D start(corner.x(), corner.y(), heading[i]);
    double duration = 0.0;
    Twist2D twist;
    if (blended) {
      duration = spec.blend_radius * std::abs(dth) / spec.speed;
      twist = {spec.speed, std::copysign(spec.speed / spec.blend_radius, dth)};
    } else {
      duration = spec.turn_rate > 0.0 ? std::abs(dth) / spec.turn_rate : 1.0 / spec.sample_rate;
      twist = {0.0, dth / duration};
    }
    corner_times_.push_back(t + 0.5 * duration);
    push(start, twist, duration);
  }
}

double Trajectory::duration() const { return segments_.back().t1; }

double Trajectory::path_length() const {
  double total = 0.0;
  for (const Segment& s : segments_) {
    total += std::abs(s.twist.v) * (s.t1 - s.t0);
  }
  return total;
}

TruthSample Trajectory::at(double t) const {
  t = std::clamp(t, 0.0, duration());
  if (t >= duration()) {
    const Segment& last = segments_.back();
    return {t, integrate_twist(last.start, last.twist, last.t1 - last.t0), Twist2D{}};
  }
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double value, const Segment& s) { return value < s.t0; });
  const Segment& seg = *std::prev(it);
  return {t, integrate_twist(seg.start, seg.twist, t - seg.t0), seg.twist};
}

std::vector<double> Trajectory::knot_times() const {
  std::vector<double> knots;
  knots.reserve(segments_.size() + 1);
  for (const Segment& s : segments_) {
    knots.push_back(s.t0);
  }
  knots.push_back(duration());
  return knots;
}

std::vector<TruthSample> generate_truth(const TrajectorySpec& spec) {
  const Trajectory traj(spec);
  const double duration = traj.duration();

  // (time, is_knot); knots win over nearby grid times.
  std::vector<std::pair<double, bool>> times;
  const auto n_grid = static_cast<long long>(std::floor(duration * spec.sample_rate + 1e-9));
  for (long long k = 0; k <= n_grid; ++k) {
    times.emplace_back(static_cast<double>(k) / spec.sample_rate, false);
  }
  for (double knot : traj.knot_times()) {
    times.emplace_back(knot, true);
  }
  std::sort(times.begin(), times.end());

  std::vector<double> merged;
  bool last_is_knot = false;
  for (const auto& [time, knot] : times) {
    if (!merged.empty() && time - merged.back() < 1e-9) {
      if (knot && !last_is_knot) {
        merged.back() = time;
        last_is_knot = true;
      }
      continue;
    }
    merged.push_back(time);
    last_is_knot = knot;
  }

  std::vector<TruthSample> out;
  out.reserve(merged.size());
  for (double time : merged) {
    out.push_back(traj.at(time));
  }
  return out;
}

namespace {

std::size_t sample_index(const std::vector<TruthSample>& truth, double t) {
  if (truth.empty()) {
    throw std::invalid_argument("truth: empty sample list");
  }
  auto it = std::upper_bound(truth.begin(), truth.end(), t,
                             [](double value, const TruthSample& s) { return value < s.t; });
  if (it == truth.begin()) {
    return 0;
  }
  return static_cast<std::size_t>(std::distance(truth.begin(), it)) - 1;
}

}  // namespace

Pose2D truth_pose_at(const std::vector<TruthSample>& truth, double t) {
  const std::size_t k = sample_index(truth, t);
  if (k + 1 == truth.size() || t <= truth[k].t) {
    return truth[k].pose;
  }
  return integrate_twist(truth[k].pose, truth[k].twist, t - truth[k].t);
}

Twist2D truth_twist_at(const std::vector<TruthSample>& truth, double t) {
  return truth[sample_index(truth, t)].twist;
}

Displacement truth_displacement(const std::vector<TruthSample>& truth, double t0, double t1) {
  Displacement d;
  if (t1 <= t0) {
    return d;
  }
  for (std::size_t k = sample_index(truth, t0); k + 1 < truth.size(); ++k) {
    const double a = std::max(t0, truth[k].t);
    const double b = std::min(t1, truth[k + 1].t);
    if (truth[k].t >= t1) {
      break;
    }
    if (b > a) {
      d.distance += truth[k].twist.v * (b - a);
      d.dtheta += truth[k].twist.omega * (b - a);
    }
  }
  return d;
}

}  // namespace ekfloc
