#pragma once

#include <span>
#include <string_view>

#include <Eigen/Core>

#include "ekfloc/geometry.hpp"
#include "ekfloc/motion.hpp"

namespace ekfloc {

/// Measurement sources. The enumerator order is the processing order for
/// readings that share a timestamp.
enum class Source { MapPose = 0, CompassHeading = 1, EncoderTwist = 2 };

std::string_view source_name(Source s);

/// Dimension of z for a source: 3 for map poses, 2 otherwise.
int measurement_dim(Source s);

/// Indices of z that hold angles and need wrap-aware innovations.
std::span<const int> angular_components(Source s);

/// A timestamped reading with its noise covariance R.
struct Measurement {
  double t = 0.0;
  Source source = Source::MapPose;
  Eigen::VectorXd z;
  Eigen::MatrixXd R;

  /// Throws std::invalid_argument when dimensions disagree with the source,
  /// values are non-finite, or R is not symmetric positive definite.
  void validate() const;
};

/// Builds and validates a measurement; angular components of z are wrapped.
Measurement make_measurement(double t, Source source, Eigen::VectorXd z, Eigen::MatrixXd R);

// Linear selector models. Each H has a single 1 per row.
const Eigen::Matrix<double, 3, 5>& H_map();
const Eigen::Matrix<double, 2, 5>& H_encoder();
const Eigen::Matrix<double, 2, 5>& H_compass();

Eigen::Vector3d h_map(const State5& s);
Eigen::Vector2d h_encoder(const State5& s);
Eigen::Vector2d h_compass(const State5& s);

/// H for any source as a dynamic matrix.
Eigen::MatrixXd measurement_matrix(Source s);
/// Predicted measurement h(s) for any source.
Eigen::VectorXd predict_measurement(const State5& s, Source source);

struct WheelGeometry {
  double wheel_radius = 0.05;   // m
  double track_width = 0.30;    // m, wheel separation
  double counts_per_rev = 500;  // ticks per wheel revolution

  void validate() const;
  /// Wheel travel per tick (m).
  double meters_per_tick() const;
};

/// Differential-drive forward kinematics from signed tick deltas over dt.
Twist2D ticks_to_twist(double d_left, double d_right, double dt, const WheelGeometry& geom);

}  // namespace ekfloc
