#include "ekfloc/pipeline.hpp"

#include <stdexcept>

#include "ekfloc/motion.hpp"
#include "ekfloc/simulate.hpp"

namespace ekfloc {

namespace {

enum Stream : std::uint64_t { kEncoderStream = 1, kCompassStream = 2, kMapStream = 3 };

}  // namespace

SensorLog simulate_run(const RunConfig& config, std::uint64_t seed) {
  config.validate();
  const std::vector<TruthSample> truth = generate_truth(config.trajectory);

  std::vector<LogRecord> records;
  for (const TruthSample& s : truth) {
    records.emplace_back(TruthRecord{s.t, s.pose});
  }
  for (Measurement& m : simulate_encoder_log(truth, config.wheels, config.sim,
                                             stream_seed(seed, kEncoderStream),
                                             config.filter.R_encoder)) {
    records.emplace_back(std::move(m));
  }
  for (Measurement& m : simulate_compass_log(truth, config.sim, stream_seed(seed, kCompassStream),
                                             config.filter.R_compass)) {
    records.emplace_back(std::move(m));
  }

  std::vector<Measurement> fixes;
  if (config.map_mode == MapMode::Full) {
    const OccupancyGrid grid = config.map_pgm.empty()
                                   ? synthetic_arena(config.trajectory)
                                   : load_map(config.map_pgm, config.map_meta);
    fixes = simulate_map_log(truth, config.sim, stream_seed(seed, kMapStream), MapMode::Full,
                             config.filter.R_map, &grid, config.map_pipeline);
  } else {
    fixes = simulate_map_log(truth, config.sim, stream_seed(seed, kMapStream), MapMode::Shortcut,
                             config.filter.R_map);
  }
  for (Measurement& m : fixes) {
    records.emplace_back(std::move(m));
  }
  return merge_records(std::move(records));
}

std::vector<FilterStep> fuse_log(const SensorLog& log, const NoiseConfig& noise) {
  const std::vector<Measurement> ms = log.measurements();
  return run_filter(ms, initial_estimate(ms, noise), noise);
}

std::vector<TimedPose> dead_reckon(const std::vector<Measurement>& log, const Pose2D& start,
                                   double t_start) {
  std::vector<TimedPose> out{{t_start, start}};
  State5 s{start, Twist2D{}};
  double t = t_start;
  for (const Measurement& m : log) {
    if (m.source != Source::EncoderTwist) {
      continue;
    }
    if (m.t < t) {
      throw std::invalid_argument("dead_reckon: encoder readings out of order");
    }
    s.twist = Twist2D{m.z(0), m.z(1)};
    s = predict_state(s, m.t - t);
    t = m.t;
    out.push_back({t, s.pose});
  }
  return out;
}

std::vector<TimedPose> truth_poses(const SensorLog& log) {
  std::vector<TimedPose> out;
  for (const TruthRecord& r : log.truth()) {
    out.push_back({r.t, r.pose});
  }
  return out;
}

std::vector<TimedPose> estimate_poses(const std::vector<FilterStep>& steps) {
  std::vector<TimedPose> out;
  out.reserve(steps.size());
  for (const FilterStep& s : steps) {
    if (!out.empty() && out.back().t == s.estimate.t) {
      out.back().pose = s.estimate.mean.pose;
    } else {
      out.push_back({s.estimate.t, s.estimate.mean.pose});
    }
  }
  return out;
}

}  // namespace ekfloc
