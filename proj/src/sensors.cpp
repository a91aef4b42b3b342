#include "ekfloc/sensors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

namespace ekfloc {

std::string_view source_name(Source s) {
  switch (s) {
    case Source::MapPose:
      return "map";
    case Source::CompassHeading:
      return "compass";
    case Source::EncoderTwist:
      return "encoder";
  }
  return "unknown";
}

int measurement_dim(Source s) { return s == Source::MapPose ? 3 : 2; }

std::span<const int> angular_components(Source s) {
  static constexpr std::array<int, 1> kMap{2};
  static constexpr std::array<int, 1> kCompass{0};
  switch (s) {
    case Source::MapPose:
      return kMap;
    case Source::CompassHeading:
      return kCompass;
    case Source::EncoderTwist:
      break;
  }
  return {};
}

void Measurement::validate() const {
  const int n = measurement_dim(source);
  const std::string who = "measurement (" + std::string(source_name(source)) + ")";
  if (!std::isfinite(t)) {
    throw std::invalid_argument(who + ": non-finite timestamp");
  }
  if (z.size() != n || R.rows() != n || R.cols() != n) {
    throw std::invalid_argument(who + ": dimension mismatch");
  }
  if (!z.allFinite() || !R.allFinite()) {
    throw std::invalid_argument(who + ": non-finite value");
  }
  const double scale = std::max(1.0, R.cwiseAbs().maxCoeff());
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument(who + ": R is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(who + ": R is not positive definite");
  }
}

Measurement make_measurement(double t, Source source, Eigen::VectorXd z, Eigen::MatrixXd R) {
  Measurement m{t, source, std::move(z), std::move(R)};
  if (m.z.size() == measurement_dim(source)) {
    for (int i : angular_components(source)) {
      if (std::isfinite(m.z(i))) {
        m.z(i) = wrap_angle(m.z(i));
      }
    }
  }
  m.validate();
  return m;
}

const Eigen::Matrix<double, 3, 5>& H_map() {
  static const Eigen::Matrix<double, 3, 5> H = [] {
    Eigen::Matrix<double, 3, 5> h = Eigen::Matrix<double, 3, 5>::Zero();
    h(0, kX) = 1.0;
    h(1, kY) = 1.0;
    h(2, kTheta) = 1.0;
    return h;
  }();
  return H;
}

const Eigen::Matrix<double, 2, 5>& H_encoder() {
  static const Eigen::Matrix<double, 2, 5> H = [] {
    Eigen::Matrix<double, 2, 5> h = Eigen::Matrix<double, 2, 5>::Zero();
    h(0, kV) = 1.0;
    h(1, kOmega) = 1.0;
    return h;
  }();
  return H;
}

const Eigen::Matrix<double, 2, 5>& H_compass() {
  static const Eigen::Matrix<double, 2, 5> H = [] {
    Eigen::Matrix<double, 2, 5> h = Eigen::Matrix<double, 2, 5>::Zero();
    h(0, kTheta) = 1.0;
    h(1, kOmega) = 1.0;
    return h;
  }();
  return H;
}

Eigen::Vector3d h_map(const State5& s) { return {s.pose.x(), s.pose.y(), s.pose.theta()}; }

Eigen::Vector2d h_encoder(const State5& s) { return {s.twist.v, s.twist.omega}; }

Eigen::Vector2d h_compass(const State5& s) { return {s.pose.theta(), s.twist.omega}; }

Eigen::MatrixXd measurement_matrix(Source s) {
  switch (s) {
    case Source::MapPose:
      return H_map();
    case Source::CompassHeading:
      return H_compass();
    case Source::EncoderTwist:
      return H_encoder();
  }
  throw std::invalid_argument("measurement_matrix: unknown source");
}

Eigen::VectorXd predict_measurement(const State5& s, Source source) {
  switch (source) {
    case Source::MapPose:
      return h_map(s);
    case Source::CompassHeading:
      return h_compass(s);
    case Source::EncoderTwist:
      return h_encoder(s);
  }
  throw std::invalid_argument("predict_measurement: unknown source");
}

void WheelGeometry::validate() const {
  if (!(wheel_radius > 0.0) || !(track_width > 0.0) || !(counts_per_rev > 0.0) ||
      !std::isfinite(wheel_radius) || !std::isfinite(track_width) ||
      !std::isfinite(counts_per_rev)) {
    throw std::invalid_argument("WheelGeometry: radius, track width and resolution must be > 0");
  }
}

double WheelGeometry::meters_per_tick() const { return kTwoPi * wheel_radius / counts_per_rev; }

Twist2D ticks_to_twist(double d_left, double d_right, double dt, const WheelGeometry& geom) {
  geom.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("ticks_to_twist: dt must be > 0");
  }
  const double k = geom.meters_per_tick() / dt;
  const double s_left = k * d_left;
  const double s_right = k * d_right;
  return {0.5 * (s_right + s_left), (s_right - s_left) / geom.track_width};
}

}  // namespace ekfloc
