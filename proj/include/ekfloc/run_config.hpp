#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ekfloc/fusion.hpp"
#include "ekfloc/sensors.hpp"
#include "ekfloc/simulate.hpp"
#include "ekfloc/trajectory.hpp"

namespace ekfloc {

/// Everything needed to simulate and fuse one run.
struct RunConfig {
  TrajectorySpec trajectory;
  WheelGeometry wheels;
  SimNoise sim;
  MapMode map_mode = MapMode::Shortcut;
  MapPipelineConfig map_pipeline;
  /// Optional map files for full map mode; a synthetic arena is used when
  /// these are empty.
  std::string map_pgm;
  std::string map_meta;
  /// Filter settings. R blocks are derived from `sim` unless overridden.
  NoiseConfig filter;

  void validate() const;
};

/// Defaults: 24 m x 15 m rectangle at 0.8 m/s, 500-count encoders,
/// 0.1 degree compass, 2 cm / 0.5 degree map fixes at 17 Hz.
RunConfig default_run_config();

/// Parses a flat JSON object (comments allowed). Keys not present keep their
/// defaults; unknown keys are rejected. Throws std::invalid_argument.
RunConfig parse_run_config(std::string_view text);

/// Loads a config file, or the defaults when path is "default".
RunConfig load_run_config(const std::string& path);

/// Serializes every setting as flat JSON (stable key order).
std::string dump_run_config(const RunConfig& config);

}  // namespace ekfloc
