#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "ekfloc/motion.hpp"
#include "ekfloc/sensors.hpp"

namespace ekfloc {

/// Raised when the filter produces a non-finite or indefinite covariance, or
/// the innovation covariance cannot be inverted.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filter belief at time t: mean state and covariance P.
struct StateEstimate {
  double t = 0.0;
  State5 mean;
  Mat5 cov = Mat5::Zero();
};

/// Maximum timestamp mismatch tolerated between an estimate and the
/// measurement applied to it.
inline constexpr double kTimeTolerance = 1e-9;

inline constexpr double kNoGate = std::numeric_limits<double>::infinity();

/// Chi-square 99% quantiles for 3 and 2 degrees of freedom.
inline constexpr double kChi2_99_dof3 = 11.34;
inline constexpr double kChi2_99_dof2 = 9.21;

/// Mahalanobis thresholds, one per source. kNoGate disables a source's gate.
struct GateThresholds {
  double map = kChi2_99_dof3;
  double encoder = kNoGate;
  double compass = kNoGate;

  double for_source(Source s) const;
};

struct NoiseConfig {
  /// Process covariance added per nominal step of 1/q_rate_hz seconds.
  Mat5 Q = (Vec5() << 1e-4, 1e-4, 1e-4, 1e-2, 1e-2).finished().asDiagonal();
  double q_rate_hz = 17.0;

  /// Default per-sensor R, used when a simulator or reader needs one.
  Eigen::Matrix3d R_map =
      Eigen::Vector3d(0.02 * 0.02, 0.02 * 0.02, deg_to_rad(0.5) * deg_to_rad(0.5)).asDiagonal();
  Eigen::Matrix2d R_encoder = Eigen::Vector2d(1e-4, 2e-3).asDiagonal();
  Eigen::Matrix2d R_compass =
      Eigen::Vector2d(deg_to_rad(0.2) * deg_to_rad(0.2), 0.02 * 0.02).asDiagonal();

  bool gating = true;
  GateThresholds gate;

  /// Initial covariance and the fallback initial state used when a log
  /// carries no map fix.
  Mat5 P0 = (Vec5() << 0.25, 0.25, 0.1, 0.1, 0.1).finished().asDiagonal();
  State5 init_state;

  /// Throws std::invalid_argument if any covariance block is not SPD.
  void validate() const;

  /// Process covariance for a step of dt seconds: Q scaled by dt * q_rate_hz.
  Mat5 process_noise_for(double dt) const;
  Eigen::MatrixXd default_R(Source s) const;
  double gate_threshold(Source s) const;
};

/// Time update with process covariance Q added verbatim:
/// mean <- f(mean, dt), P <- F P F^T + Q.
StateEstimate predict(const StateEstimate& est, double dt, const Mat5& Q);
/// Same, adding noise.Q as a single per-step increment.
StateEstimate predict(const StateEstimate& est, double dt, const NoiseConfig& noise);

struct UpdateResult {
  StateEstimate estimate;
  bool accepted = true;
  Eigen::VectorXd innovation;
  double mahalanobis_sq = 0.0;
};

/// Wrap-aware innovation z - h(mean).
Eigen::VectorXd innovation(const StateEstimate& est, const Measurement& m);

/// Squared Mahalanobis distance of the innovation under S = H P H^T + R.
double mahalanobis_sq(const StateEstimate& est, const Measurement& m);

/// True iff the measurement's squared Mahalanobis distance is within threshold.
bool gate(const StateEstimate& est, const Measurement& m, double threshold);

/// Measurement update. K = P H^T S^-1, x += K nu, P <- P - K H P.
/// Gated-out measurements return the prior with accepted = false.
UpdateResult update(const StateEstimate& est, const Measurement& m,
                    double gate_threshold = kNoGate);

struct FilterStep {
  StateEstimate estimate;
  Source source = Source::MapPose;
  bool accepted = true;
};

/// Builds the starting belief for a run: pose from the first map fix (zero
/// twist) if there is one, else noise.init_state; covariance noise.P0; time
/// of the earliest measurement.
StateEstimate initial_estimate(std::span<const Measurement> log, const NoiseConfig& noise);

/// Processes measurements in time order (predict to each timestamp, then
/// update) and emits one step per measurement. Readings sharing a timestamp
/// are applied in Source order: map, compass, encoder. Throws
/// std::invalid_argument if timestamps decrease.
std::vector<FilterStep> run_filter(std::span<const Measurement> log, const StateEstimate& init,
                                   const NoiseConfig& noise);

/// Covariance health: symmetric within tol and min eigenvalue >= -tol.
bool covariance_healthy(const Mat5& P, double tol = 1e-9);

}  // namespace ekfloc
