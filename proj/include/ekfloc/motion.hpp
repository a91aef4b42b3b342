#pragma once

#include <Eigen/Core>

#include "ekfloc/geometry.hpp"

namespace ekfloc {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

/// Indices into the flattened state [x, y, theta, v, omega].
enum StateIndex : int { kX = 0, kY = 1, kTheta = 2, kV = 3, kOmega = 4 };

/// Unicycle state: planar pose plus body twist.
struct State5 {
  Pose2D pose;
  Twist2D twist;

  Vec5 vector() const;
  /// Builds a state from a flat vector; the heading entry is wrapped.
  /// Throws std::invalid_argument if any entry is non-finite.
  static State5 from_vector(const Vec5& v);
};

/// Constant-twist Euler step of length dt (seconds, dt >= 0).
State5 predict_state(const State5& s, double dt);

/// Jacobian of predict_state with respect to the state, evaluated at s.
Mat5 jacobian_F(const State5& s, double dt);

}  // namespace ekfloc
