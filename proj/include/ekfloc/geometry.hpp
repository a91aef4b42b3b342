#pragma once

#include <numbers>

namespace ekfloc {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into (-pi, pi]. Throws std::invalid_argument on NaN/inf.
/// Angles already inside the interval are returned unchanged, so the
/// operation is exactly idempotent.
double wrap_angle(double theta);

/// Shortest signed rotation taking b onto a, i.e. wrap_angle(a - b).
double angle_diff(double a, double b);

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Planar pose. Heading is kept wrapped to (-pi, pi] at all times.
class Pose2D {
 public:
  Pose2D() = default;
  Pose2D(double x, double y, double theta);

  double x() const { return x_; }
  double y() const { return y_; }
  double theta() const { return theta_; }

  void set_x(double x) { x_ = x; }
  void set_y(double y) { y_ = y; }
  void set_theta(double theta) { theta_ = wrap_angle(theta); }

  /// Composition this ⊕ delta, with delta expressed in this pose's frame.
  Pose2D compose(const Pose2D& delta) const;
  /// Relative pose r such that this->compose(r) == other.
  Pose2D between(const Pose2D& other) const;

  friend bool operator==(const Pose2D&, const Pose2D&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
};

/// Forward speed (m/s) and yaw rate (rad/s).
struct Twist2D {
  double v = 0.0;
  double omega = 0.0;

  friend bool operator==(const Twist2D&, const Twist2D&) = default;
};

/// A pose stamped with a time in seconds.
struct TimedPose {
  double t = 0.0;
  Pose2D pose;
};

}  // namespace ekfloc
