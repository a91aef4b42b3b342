#include "ekfloc/motion.hpp"

#include <cmath>
#include <stdexcept>

namespace ekfloc {

Vec5 State5::vector() const {
  Vec5 out;
  out << pose.x(), pose.y(), pose.theta(), twist.v, twist.omega;
  return out;
}

State5 State5::from_vector(const Vec5& v) {
  if (!v.allFinite()) {
    throw std::invalid_argument("State5: non-finite state entry");
  }
  return {Pose2D(v(kX), v(kY), v(kTheta)), Twist2D{v(kV), v(kOmega)}};
}

namespace {

void check_dt(double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("motion: dt must be finite and non-negative");
  }
}

}  // namespace

State5 predict_state(const State5& s, double dt) {
  check_dt(dt);
  if (dt == 0.0) {
    return s;
  }
  const double th = s.pose.theta();
  const double v = s.twist.v;
  State5 out = s;
  out.pose = Pose2D(s.pose.x() + v * dt * std::cos(th), s.pose.y() + v * dt * std::sin(th),
                    th + s.twist.omega * dt);
  return out;
}

Mat5 jacobian_F(const State5& s, double dt) {
  check_dt(dt);
  const double th = s.pose.theta();
  const double v = s.twist.v;
  Mat5 F = Mat5::Identity();
  F(kX, kTheta) = -v * dt * std::sin(th);
  F(kX, kV) = dt * std::cos(th);
  F(kY, kTheta) = v * dt * std::cos(th);
  F(kY, kV) = dt * std::sin(th);
  F(kTheta, kOmega) = dt;
  return F;
}

}  // namespace ekfloc
