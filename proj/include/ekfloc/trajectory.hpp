#pragma once

#include <vector>

#include <Eigen/Core>

#include "ekfloc/geometry.hpp"

namespace ekfloc {

enum class CornerMode { StopAndTurn, BlendedArc };

/// Closed polygonal route driven at constant speed, starting at the first
/// waypoint heading towards the second and ending back at the first.
struct TrajectorySpec {
  std::vector<Eigen::Vector2d> waypoints = rectangle(24.0, 15.0);
  double speed = 0.8;         // m/s
  double sample_rate = 17.0;  // Hz
  CornerMode corner_mode = CornerMode::StopAndTurn;
  /// Stop-and-turn yaw rate (rad/s). Zero means the turn takes one sample
  /// period, so consecutive samples at a corner share a position.
  double turn_rate = 0.0;
  double blend_radius = 1.0;  // m, BlendedArc only

  /// Counter-clockwise rectangle with its first corner at the origin.
  static std::vector<Eigen::Vector2d> rectangle(double width, double height);

  /// Sum of the polygon's edge lengths including the closing edge.
  double perimeter() const;
  void validate() const;
};

/// Ground-truth sample. The twist holds from t until the next sample.
struct TruthSample {
  double t = 0.0;
  Pose2D pose;
  Twist2D twist;
};

/// Continuous piecewise constant-twist trajectory built from a spec.
class Trajectory {
 public:
  explicit Trajectory(const TrajectorySpec& spec);

  double duration() const;
  double path_length() const;
  /// Pose and twist at time t (clamped to [0, duration]); the twist at the
  /// final instant is zero.
  TruthSample at(double t) const;
  /// Segment boundary times, including 0 and duration.
  std::vector<double> knot_times() const;
  /// Mid-time of each corner maneuver.
  std::vector<double> corner_times() const { return corner_times_; }

 private:
  struct Segment {
    double t0 = 0.0;
    double t1 = 0.0;
    Pose2D start;
    Twist2D twist;
  };

  std::vector<Segment> segments_;
  std::vector<double> corner_times_;
};

/// Pose reached from `start` after holding `twist` for dt seconds (exact arc).
Pose2D integrate_twist(const Pose2D& start, const Twist2D& twist, double dt);

/// Samples the trajectory on a uniform grid at spec.sample_rate, adding the
/// segment boundaries so the samples capture every corner exactly.
std::vector<TruthSample> generate_truth(const TrajectorySpec& spec);

/// Pose at time t from a truth sample list (clamped to its span).
Pose2D truth_pose_at(const std::vector<TruthSample>& truth, double t);
/// Twist in effect at time t.
Twist2D truth_twist_at(const std::vector<TruthSample>& truth, double t);

/// Travelled distance and heading change between t0 and t1.
struct Displacement {
  double distance = 0.0;
  double dtheta = 0.0;
};
Displacement truth_displacement(const std::vector<TruthSample>& truth, double t0, double t1);

}  // namespace ekfloc
