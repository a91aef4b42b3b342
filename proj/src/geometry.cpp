#include "ekfloc/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace ekfloc {

double wrap_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("wrap_angle: non-finite angle");
  }
  if (theta > -kPi && theta <= kPi) {
    return theta;
  }
  double r = std::fmod(theta + kPi, kTwoPi);
  if (r <= 0.0) {
    r += kTwoPi;
  }
  r -= kPi;
  // Rounding in the shift can land exactly on -pi.
  return r <= -kPi ? kPi : r;
}

double angle_diff(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("angle_diff: non-finite angle");
  }
  return wrap_angle(a - b);
}

Pose2D::Pose2D(double x, double y, double theta) : x_(x), y_(y), theta_(wrap_angle(theta)) {}

Pose2D Pose2D::compose(const Pose2D& delta) const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  return {x_ + c * delta.x() - s * delta.y(), y_ + s * delta.x() + c * delta.y(),
          theta_ + delta.theta()};
}

Pose2D Pose2D::between(const Pose2D& other) const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  const double dx = other.x() - x_;
  const double dy = other.y() - y_;
  return {c * dx + s * dy, -s * dx + c * dy, angle_diff(other.theta(), theta_)};
}

}  // namespace ekfloc
