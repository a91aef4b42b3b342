#pragma once

#include <cstdint>
#include <vector>

#include "ekfloc/fusion.hpp"
#include "ekfloc/geometry.hpp"
#include "ekfloc/run_config.hpp"
#include "ekfloc/sensor_log.hpp"

namespace ekfloc {

/// Truth plus all three sensor streams, merged into one sorted log.
/// Deterministic for a given (config, seed).
SensorLog simulate_run(const RunConfig& config, std::uint64_t seed);

/// Runs the filter over a log's measurements, starting from
/// initial_estimate().
std::vector<FilterStep> fuse_log(const SensorLog& log, const NoiseConfig& noise);

/// Encoder-only dead reckoning: each twist reading is held over its
/// interval and integrated with predict_state from the start pose.
std::vector<TimedPose> dead_reckon(const std::vector<Measurement>& log, const Pose2D& start,
                                   double t_start);

std::vector<TimedPose> truth_poses(const SensorLog& log);
/// Estimated poses, keeping only the last estimate at each timestamp.
std::vector<TimedPose> estimate_poses(const std::vector<FilterStep>& steps);

}  // namespace ekfloc
