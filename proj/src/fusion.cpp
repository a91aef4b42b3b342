#include "ekfloc/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace ekfloc {

namespace {

template <typename M>
bool is_spd(const M& m) {
  if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    return false;
  }
  const Eigen::MatrixXd dense = m;
  Eigen::LLT<Eigen::MatrixXd> llt(dense);
  return llt.info() == Eigen::Success;
}

Mat5 symmetrize(const Mat5& P) { return 0.5 * (P + P.transpose()); }

// Negative eigenvalues left by the P - KHP form are clamped to zero.
Mat5 clamp_psd(const Mat5& P) {
  Eigen::SelfAdjointEigenSolver<Mat5> eig(P);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("covariance eigen-decomposition failed");
  }
  if (eig.eigenvalues().minCoeff() >= 0.0) {
    return P;
  }
  const Vec5 clamped = eig.eigenvalues().cwiseMax(0.0);
  return symmetrize(eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose());
}

void check_finite(const StateEstimate& est, const char* where) {
  if (!est.mean.vector().allFinite() || !est.cov.allFinite()) {
    throw NumericalError(std::string(where) + ": non-finite estimate");
  }
}

struct Innovation {
  Eigen::MatrixXd H;
  Eigen::VectorXd nu;
  Eigen::LLT<Eigen::MatrixXd> S_llt;
  double d2 = 0.0;
};

Innovation compute_innovation(const StateEstimate& est, const Measurement& m) {
  if (std::abs(m.t - est.t) > kTimeTolerance) {
    throw std::invalid_argument("update: measurement at t=" + std::to_string(m.t) +
                                " does not match estimate at t=" + std::to_string(est.t));
  }
  m.validate();
  Innovation out;
  out.H = measurement_matrix(m.source);
  out.nu = innovation(est, m);
  const Eigen::MatrixXd S = out.H * est.cov * out.H.transpose() + m.R;
  out.S_llt.compute(S);
  if (out.S_llt.info() != Eigen::Success) {
    throw NumericalError("update: innovation covariance is not invertible");
  }
  out.d2 = out.nu.dot(out.S_llt.solve(out.nu));
  return out;
}

}  // namespace

double GateThresholds::for_source(Source s) const {
  switch (s) {
    case Source::MapPose:
      return map;
    case Source::CompassHeading:
      return compass;
    case Source::EncoderTwist:
      return encoder;
  }
  return kNoGate;
}

void NoiseConfig::validate() const {
  if (!is_spd(Q) || !is_spd(R_map) || !is_spd(R_encoder) || !is_spd(R_compass) || !is_spd(P0)) {
    throw std::invalid_argument("NoiseConfig: covariance blocks must be symmetric positive definite");
  }
  if (!(q_rate_hz > 0.0) || !std::isfinite(q_rate_hz)) {
    throw std::invalid_argument("NoiseConfig: q_rate_hz must be > 0");
  }
  for (double g : {gate.map, gate.encoder, gate.compass}) {
    if (!(g > 0.0)) {
      throw std::invalid_argument("NoiseConfig: gate thresholds must be > 0");
    }
  }
}

Mat5 NoiseConfig::process_noise_for(double dt) const { return Q * (dt * q_rate_hz); }

Eigen::MatrixXd NoiseConfig::default_R(Source s) const {
  switch (s) {
    case Source::MapPose:
      return R_map;
    case Source::CompassHeading:
      return R_compass;
    case Source::EncoderTwist:
      return R_encoder;
  }
  throw std::invalid_argument("default_R: unknown source");
}

double NoiseConfig::gate_threshold(Source s) const {
  return gating ? gate.for_source(s) : kNoGate;
}

StateEstimate predict(const StateEstimate& est, double dt, const Mat5& Q) {
  const Mat5 F = jacobian_F(est.mean, dt);
  StateEstimate out;
  out.t = est.t + dt;
  out.mean = predict_state(est.mean, dt);
  out.cov = symmetrize(F * est.cov * F.transpose() + Q);
  check_finite(out, "predict");
  return out;
}

StateEstimate predict(const StateEstimate& est, double dt, const NoiseConfig& noise) {
  return predict(est, dt, noise.Q);
}

Eigen::VectorXd innovation(const StateEstimate& est, const Measurement& m) {
  const Eigen::VectorXd predicted = predict_measurement(est.mean, m.source);
  Eigen::VectorXd nu = m.z - predicted;
  for (int i : angular_components(m.source)) {
    nu(i) = angle_diff(m.z(i), predicted(i));
  }
  return nu;
}

double mahalanobis_sq(const StateEstimate& est, const Measurement& m) {
  return compute_innovation(est, m).d2;
}

bool gate(const StateEstimate& est, const Measurement& m, double threshold) {
  if (threshold == kNoGate) {
    return true;
  }
  return mahalanobis_sq(est, m) <= threshold;
}

UpdateResult update(const StateEstimate& est, const Measurement& m, double gate_threshold) {
  Innovation inn = compute_innovation(est, m);
  UpdateResult result;
  result.innovation = inn.nu;
  result.mahalanobis_sq = inn.d2;
  if (gate_threshold != kNoGate && !(inn.d2 <= gate_threshold)) {
    result.estimate = est;
    result.accepted = false;
    return result;
  }

  const Eigen::MatrixXd HP = inn.H * est.cov;
  // K^T = S^-1 H P, since P is symmetric.
  const Eigen::MatrixXd K = inn.S_llt.solve(HP).transpose();

  StateEstimate& out = result.estimate;
  out.t = est.t;
  out.mean = State5::from_vector(est.mean.vector() + K * inn.nu);
  out.cov = clamp_psd(symmetrize(est.cov - K * HP));
  check_finite(out, "update");
  return result;
}

StateEstimate initial_estimate(std::span<const Measurement> log, const NoiseConfig& noise) {
  StateEstimate init;
  init.cov = noise.P0;
  init.mean = noise.init_state;
  if (log.empty()) {
    return init;
  }
  init.t = log.front().t;
  for (const Measurement& m : log) {
    init.t = std::min(init.t, m.t);
  }
  const auto fix = std::find_if(log.begin(), log.end(),
                                [](const Measurement& m) { return m.source == Source::MapPose; });
  if (fix != log.end()) {
    init.mean = State5{Pose2D(fix->z(0), fix->z(1), fix->z(2)), Twist2D{}};
  }
  return init;
}

std::vector<FilterStep> run_filter(std::span<const Measurement> log, const StateEstimate& init,
                                   const NoiseConfig& noise) {
  for (std::size_t i = 1; i < log.size(); ++i) {
    if (log[i].t < log[i - 1].t) {
      throw std::invalid_argument("run_filter: measurements are not sorted by timestamp (index " +
                                  std::to_string(i) + ")");
    }
  }

  // Stable order within ties: map, compass, encoder.
  std::vector<const Measurement*> order;
  order.reserve(log.size());
  for (const Measurement& m : log) {
    order.push_back(&m);
  }
  std::stable_sort(order.begin(), order.end(), [](const Measurement* a, const Measurement* b) {
    if (a->t != b->t) {
      return a->t < b->t;
    }
    return static_cast<int>(a->source) < static_cast<int>(b->source);
  });

  std::vector<FilterStep> out;
  out.reserve(log.size());
  StateEstimate est = init;
  for (const Measurement* m : order) {
    const double dt = m->t - est.t;
    if (dt < -kTimeTolerance) {
      throw std::invalid_argument("run_filter: measurement precedes the initial estimate");
    }
    if (dt > 0.0) {
      est = predict(est, dt, noise.process_noise_for(dt));
    }
    est.t = m->t;
    UpdateResult r = update(est, *m, noise.gate_threshold(m->source));
    est = r.estimate;
    out.push_back({est, m->source, r.accepted});
  }
  return out;
}

bool covariance_healthy(const Mat5& P, double tol) {
  if (!P.allFinite() || (P - P.transpose()).cwiseAbs().maxCoeff() > tol) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Mat5> eig(P, Eigen::EigenvaluesOnly);
  return eig.info() == Eigen::Success && eig.eigenvalues().minCoeff() >= -tol;
}

}  // namespace ekfloc
