#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ekfloc/pipeline.hpp"
#include "ekfloc/run_config.hpp"
#include "ekfloc/sensor_log.hpp"
#include "ekfloc/simulate.hpp"
#include "ekfloc/trajectory.hpp"

using namespace ekfloc;

namespace {

SimNoise zero_noise() {
  SimNoise n;
  n.encoder_slip_sigma = 0.0;
  n.encoder_rounding = false;
  n.compass_sigma = 0.0;
  n.compass_step = 0.0;
  n.gyro_sigma = 0.0;
  n.map_sigma_xy = 0.0;
  n.map_sigma_theta = 0.0;
  n.laser_sigma_range = 0.0;
  return n;
}

const Eigen::Matrix2d kR2 = 1e-4 * Eigen::Matrix2d::Identity();
const Eigen::Matrix3d kR3 = 1e-4 * Eigen::Matrix3d::Identity();

std::string to_text(const SensorLog& log) {
  std::ostringstream out;
  write_log(log, out);
  return out.str();
}

}  // namespace

TEST(Trajectory, DefaultRectangle) {
  const TrajectorySpec spec;
  EXPECT_DOUBLE_EQ(spec.perimeter(), 78.0);
  const Trajectory traj(spec);
  // 78 / 0.8 = 97.5 s of driving plus three one-sample turns.
  EXPECT_NEAR(traj.duration(), 97.5 + 3.0 / 17.0, 1e-9);
  EXPECT_NEAR(traj.path_length(), 78.0, 1e-9);
  EXPECT_EQ(traj.corner_times().size(), 3u);

  const std::vector<TruthSample> truth = generate_truth(spec);
  // 97.5 * 17 = 1657.5 samples of driving.
  EXPECT_NEAR(static_cast<double>(truth.size()), 1658.0, 10.0);
  EXPECT_EQ(truth.front().pose, Pose2D(0, 0, 0));
  EXPECT_NEAR(truth.back().pose.x(), 0.0, 1e-9);
  EXPECT_NEAR(truth.back().pose.y(), 0.0, 1e-9);
}

TEST(Trajectory, StraightStepAndTangentHeading) {
  const std::vector<TruthSample> truth = generate_truth(TrajectorySpec{});
  int straight = 0;
  for (std::size_t i = 1; i < truth.size(); ++i) {
    const TruthSample& a = truth[i - 1];
    const TruthSample& b = truth[i];
    const double dt = b.t - a.t;
    const double d = std::hypot(b.pose.x() - a.pose.x(), b.pose.y() - a.pose.y());
    if (a.twist.omega == 0.0 && a.twist.v > 0.0) {
      // Twist agrees with the finite difference of the pose.
      EXPECT_NEAR(d / dt, a.twist.v, 1e-9);
      EXPECT_NEAR(angle_diff(std::atan2(b.pose.y() - a.pose.y(), b.pose.x() - a.pose.x()), a.pose.theta()),
                  0.0, 1e-9);
      if (std::abs(dt - 1.0 / 17.0) < 1e-9) {
        EXPECT_NEAR(d, 0.8 / 17.0, 1e-9);
        EXPECT_NEAR(d, 0.0471, 5e-5);
        ++straight;
      }
    }
  }
  EXPECT_GT(straight, 1600);
}

TEST(Trajectory, StopAndTurnCorner) {
  // Samples inside a corner repeat the position; the heading steps by pi/2
  // in total across them.
  const std::vector<TruthSample> truth = generate_truth(TrajectorySpec{});
  int corners = 0;
  std::size_t i = 1;
  while (i < truth.size()) {
    double turned = 0.0;
    std::size_t j = i;
    while (j < truth.size() && truth[j].pose.x() == truth[j - 1].pose.x() &&
           truth[j].pose.y() == truth[j - 1].pose.y()) {
      turned += angle_diff(truth[j].pose.theta(), truth[j - 1].pose.theta());
      ++j;
    }
    if (j > i) {
      EXPECT_NEAR(turned, kPi / 2, 1e-9);
      EXPECT_LE(truth[j - 1].t - truth[i - 1].t, 1.0 / 17.0 + 1e-9);
      ++corners;
      i = j;
    } else {
      ++i;
    }
  }
  EXPECT_EQ(corners, 3);
}

TEST(Trajectory, BlendedArcIsSmooth) {
  TrajectorySpec spec;
  spec.corner_mode = CornerMode::BlendedArc;
  spec.blend_radius = 1.0;
  const Trajectory traj(spec);
  EXPECT_LT(traj.path_length(), 78.0);
  const std::vector<TruthSample> truth = generate_truth(spec);
  for (std::size_t i = 1; i < truth.size(); ++i) {
    const double dt = truth[i].t - truth[i - 1].t;
    EXPECT_LE(std::abs(angle_diff(truth[i].pose.theta(), truth[i - 1].pose.theta())),
              0.8 / 1.0 * dt + 1e-9);
  }
}

TEST(Trajectory, ArcLengthMatchesPerimeter) {
  for (double w : {24.0, 10.0, 3.0}) {
    TrajectorySpec spec;
    spec.waypoints = TrajectorySpec::rectangle(w, 39.0 - w);
    double length = 0.0;
    const std::vector<TruthSample> truth = generate_truth(spec);
    for (std::size_t i = 1; i < truth.size(); ++i) {
      length += std::hypot(truth[i].pose.x() - truth[i - 1].pose.x(),
                           truth[i].pose.y() - truth[i - 1].pose.y());
    }
    EXPECT_NEAR(length, spec.perimeter(), spec.speed / spec.sample_rate);
  }
}

TEST(Trajectory, RejectsDegenerateSpecs) {
  TrajectorySpec flat;
  flat.waypoints = TrajectorySpec::rectangle(0.0, 0.0);
  EXPECT_THROW(generate_truth(flat), std::invalid_argument);
  TrajectorySpec slow;
  slow.speed = 0.0;
  EXPECT_THROW(generate_truth(slow), std::invalid_argument);
  TrajectorySpec rate;
  rate.sample_rate = -1.0;
  EXPECT_THROW(generate_truth(rate), std::invalid_argument);
}

TEST(EncoderSim, NoiseFreeRoundTrip) {
  const std::vector<TruthSample> truth = generate_truth(TrajectorySpec{});
  const WheelGeometry geom;
  const std::vector<Measurement> enc = simulate_encoder_log(truth, geom, zero_noise(), 1, kR2);
  ASSERT_GT(enc.size(), 4000u);
  double prev = 0.0;
  for (const Measurement& m : enc) {
    ASSERT_EQ(m.source, Source::EncoderTwist);
    const double dt = m.t - prev;
    const Displacement d = truth_displacement(truth, prev, m.t);
    EXPECT_NEAR(m.z(0), d.distance / dt, 1e-9);
    EXPECT_NEAR(m.z(1), d.dtheta / dt, 1e-9);
    const Twist2D tw = truth_twist_at(truth, 0.5 * (prev + m.t));
    if (truth_twist_at(truth, prev) == tw && truth_twist_at(truth, m.t - 1e-9) == tw) {
      EXPECT_NEAR(m.z(0), tw.v, 1e-9);
      EXPECT_NEAR(m.z(1), tw.omega, 1e-9);
    }
    EXPECT_EQ(m.R, Eigen::MatrixXd(kR2));
    prev = m.t;
  }
}

TEST(EncoderSim, RoundingWithinHalfTick) {
  const std::vector<TruthSample> truth = generate_truth(TrajectorySpec{});
  const WheelGeometry geom;
  SimNoise noise = zero_noise();
  noise.encoder_rounding = true;
  const std::vector<Measurement> enc = simulate_encoder_log(truth, geom, noise, 1, kR2);
  double prev = 0.0;
  double worst = 0.0;
  for (const Measurement& m : enc) {
    const double dt = m.t - prev;
    const double bound = 2.0 * kPi * geom.wheel_radius / (geom.counts_per_rev * dt) / 2.0;
    const double ideal = truth_displacement(truth, prev, m.t).distance / dt;
    EXPECT_LE(std::abs(m.z(0) - ideal), bound + 1e-12);
    worst = std::max(worst, std::abs(m.z(0) - ideal));
    prev = m.t;
  }
  EXPECT_GT(worst, 0.0);
}

TEST(EncoderSim, DeterministicPerSeed) {
  const std::vector<TruthSample> truth = generate_truth(TrajectorySpec{});
  const SimNoise noise;
  const auto a = simulate_encoder_log(truth, WheelGeometry{}, noise, 5, kR2);
  const auto b = simulate_encoder_log(truth, WheelGeometry{}, noise, 5, kR2);
  const auto c = simulate_encoder_log(truth, WheelGeometry{}, noise, 6, kR2);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].z, b[i].z);
    differs = differs || a[i].z != c[i].z;
  }
  EXPECT_TRUE(differs);
}

TEST(CompassSim, QuantizationOnly) {
  const std::vector<TruthSample> truth = generate_truth(TrajectorySpec{});
  SimNoise noise = zero_noise();
  noise.compass_step = deg_to_rad(0.1);
  const auto out = simulate_compass_log(truth, noise, 3, kR2);
  ASSERT_GT(out.size(), 4000u);
  for (const Measurement& m : out) {
    const double steps = m.z(0) / noise.compass_step;
    EXPECT_NEAR(steps, std::round(steps), 1e-6);
    EXPECT_LE(std::abs(angle_diff(m.z(0), truth_pose_at(truth, m.t).theta())), noise.compass_step / 2 + 1e-12);
    EXPECT_GT(m.z(0), -kPi);
    EXPECT_LE(m.z(0), kPi);
  }
}

TEST(CompassSim, NearestStep) {
  const std::vector<TruthSample> truth{{0.0, Pose2D(0, 0, deg_to_rad(0.123)), Twist2D{}},
                                       {1.0, Pose2D(0, 0, deg_to_rad(0.123)), Twist2D{}}};
  SimNoise noise = zero_noise();
  noise.compass_step = deg_to_rad(0.1);
  const auto out = simulate_compass_log(truth, noise, 3, kR2);
  ASSERT_FALSE(out.empty());
  for (const Measurement& m : out) {
    EXPECT_NEAR(rad_to_deg(m.z(0)), 0.1, 1e-9);
    EXPECT_EQ(m.z(1), 0.0);
  }
}

TEST(CompassSim, DeterministicPerSeed) {
  const std::vector<TruthSample> truth = generate_truth(TrajectorySpec{});
  const SimNoise noise;
  const auto a = simulate_compass_log(truth, noise, 9, kR2);
  const auto b = simulate_compass_log(truth, noise, 9, kR2);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].z, b[i].z);
}

TEST(MapSim, ShortcutNoiseFreeEqualsTruth) {
  const std::vector<TruthSample> truth = generate_truth(TrajectorySpec{});
  const auto out = simulate_map_log(truth, zero_noise(), 1, MapMode::Shortcut, kR3);
  ASSERT_GT(out.size(), 1600u);
  for (const Measurement& m : out) {
    const Pose2D p = truth_pose_at(truth, m.t);
    EXPECT_NEAR(m.z(0), p.x(), 1e-12);
    EXPECT_NEAR(m.z(1), p.y(), 1e-12);
    EXPECT_NEAR(angle_diff(m.z(2), p.theta()), 0.0, 1e-12);
  }
}

TEST(MapSim, ShortcutSpreadMatchesSigma) {
  const std::vector<TruthSample> truth = generate_truth(TrajectorySpec{});
  SimNoise noise = zero_noise();
  noise.map_sigma_xy = 0.02;
  const auto out = simulate_map_log(truth, noise, 2024, MapMode::Shortcut, derive_map_R(noise));
  ASSERT_GE(out.size(), 1000u);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const double e = out[i].z(0) - truth_pose_at(truth, out[i].t).x();
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / 1000.0;
  const double std = std::sqrt(sum2 / 1000.0 - mean * mean);
  EXPECT_GE(std, 0.018);
  EXPECT_LE(std, 0.022);
  EXPECT_NEAR(out[0].R(0, 0), 0.02 * 0.02, 1e-15);
}

TEST(MapSim, FullModeTracksTruth) {
  TrajectorySpec spec;
  spec.waypoints = TrajectorySpec::rectangle(4.0, 3.0);
  const std::vector<TruthSample> truth = generate_truth(spec);
  const OccupancyGrid arena = synthetic_arena(spec);
  SimNoise noise;
  const auto out = simulate_map_log(truth, noise, 4, MapMode::Full, kR3, &arena);
  ASSERT_GT(out.size(), 100u);
  double total = 0.0;
  for (const Measurement& m : out) {
    const Pose2D p = truth_pose_at(truth, m.t);
    total += std::hypot(m.z(0) - p.x(), m.z(1) - p.y());
    EXPECT_TRUE(m.R.allFinite());
  }
  EXPECT_LT(total / static_cast<double>(out.size()), 0.1);
  EXPECT_THROW(simulate_map_log(truth, noise, 4, MapMode::Full, kR3, nullptr), std::invalid_argument);
}

TEST(DerivedR, MatchesNoiseModel) {
  SimNoise noise;
  const Eigen::Matrix2d rc = derive_compass_R(noise);
  const double step = deg_to_rad(0.1);
  EXPECT_NEAR(rc(0, 0), std::pow(deg_to_rad(0.2), 2) + step * step / 12.0, 1e-18);
  EXPECT_NEAR(rc(1, 1), 0.02 * 0.02, 1e-18);
  const Eigen::Matrix3d rm = derive_map_R(zero_noise());
  EXPECT_DOUBLE_EQ(rm(0, 0), kMinLinearVariance);
  EXPECT_DOUBLE_EQ(rm(2, 2), kMinAngularVariance);
  const Eigen::Matrix2d re = derive_encoder_R(WheelGeometry{}, noise, 0.8);
  EXPECT_GT(re(0, 0), 0.0);
  EXPECT_GT(re(1, 1), re(0, 0));
}

TEST(SensorLog, RoundTripGeneratedLog) {
  const SensorLog log = simulate_run(default_run_config(), 3);
  ASSERT_TRUE(log.is_sorted());
  std::istringstream in(to_text(log));
  const SensorLog back = read_log(in);
  ASSERT_EQ(back.records.size(), log.records.size());
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    ASSERT_EQ(log.records[i].index(), back.records[i].index());
    EXPECT_EQ(record_time(log.records[i]), record_time(back.records[i]));
    if (const auto* m = std::get_if<Measurement>(&log.records[i])) {
      const auto& b = std::get<Measurement>(back.records[i]);
      EXPECT_EQ(m->source, b.source);
      EXPECT_LE((m->z - b.z).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((m->R - b.R).cwiseAbs().maxCoeff(), 1e-12);
    } else {
      const auto& a = std::get<TruthRecord>(log.records[i]);
      const auto& b = std::get<TruthRecord>(back.records[i]);
      EXPECT_NEAR(a.pose.x(), b.pose.x(), 1e-12);
      EXPECT_NEAR(a.pose.y(), b.pose.y(), 1e-12);
      EXPECT_NEAR(a.pose.theta(), b.pose.theta(), 1e-12);
    }
  }
  EXPECT_EQ(to_text(back), to_text(log));
}

TEST(SensorLog, EmptyLog) {
  EXPECT_EQ(to_text(SensorLog{}), "");
  std::istringstream in("");
  EXPECT_TRUE(read_log(in).records.empty());
}

TEST(SensorLog, HandWrittenFixture) {
  std::istringstream in(
      "{\"t\": 0.0, \"kind\": \"truth\", \"pose\": [0.0, 0.0, 0.0]}\n"
      "{\"t\": 0.02, \"kind\": \"encoder\", \"z\": [0.8, 0.0], \"R\": [[1e-4, 0], [0, 2e-3]]}\n"
      "{\"t\": 0.0588, \"kind\": \"map\", \"z\": [0.05, 0.0, 0.01], \"R\": [[4e-4, 0, 0], [0, 4e-4, 0], [0, 0, 7.6e-5]]}\n");
  const SensorLog log = read_log(in);
  ASSERT_EQ(log.records.size(), 3u);
  EXPECT_TRUE(std::holds_alternative<TruthRecord>(log.records[0]));
  EXPECT_EQ(std::get<Measurement>(log.records[1]).source, Source::EncoderTwist);
  EXPECT_EQ(std::get<Measurement>(log.records[2]).source, Source::MapPose);
  EXPECT_DOUBLE_EQ(std::get<Measurement>(log.records[2]).z(0), 0.05);
  EXPECT_EQ(log.measurements().size(), 2u);
  EXPECT_EQ(log.truth().size(), 1u);
}

TEST(SensorLog, MalformedLineReportsLineNumber) {
  std::istringstream in(
      "{\"t\": 0.0, \"kind\": \"truth\", \"pose\": [0, 0, 0]}\n"
      "{\"t\": 0.1, \"kind\": \"compass\", \"z\": [0.1], \"R\": [[1]]}\n");
  try {
    read_log(in);
    FAIL() << "expected LogFormatError";
  } catch (const LogFormatError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream garbage("{\"t\": 0.0, \"kind\": \"truth\", \"pose\": [0, 0, 0]}\nnot json\n");
  EXPECT_THROW(read_log(garbage), LogFormatError);
  std::istringstream kind("{\"t\": 0.0, \"kind\": \"lidar\", \"z\": [1]}\n");
  EXPECT_THROW(read_log(kind), LogFormatError);
}

TEST(SensorLog, NaNRejected) {
  SensorLog log;
  log.records.push_back(TruthRecord{0.0, Pose2D()});
  Measurement bad{0.1, Source::EncoderTwist, Eigen::Vector2d(std::nan(""), 0.0),
                  Eigen::Matrix2d::Identity()};
  log.records.push_back(bad);
  std::ostringstream out;
  EXPECT_THROW(write_log(log, out), LogFormatError);
  std::istringstream in("{\"t\": NaN, \"kind\": \"truth\", \"pose\": [0, 0, 0]}\n");
  EXPECT_THROW(read_log(in), LogFormatError);
}

TEST(SimkitProperties, SimulatorsDeterministicAndMergedLogSorted) {
  const RunConfig config = default_run_config();
  const SensorLog a = simulate_run(config, 11);
  const SensorLog b = simulate_run(config, 11);
  const SensorLog c = simulate_run(config, 12);
  EXPECT_TRUE(a.is_sorted());
  EXPECT_TRUE(c.is_sorted());
  EXPECT_EQ(to_text(a), to_text(b));
  EXPECT_NE(to_text(a), to_text(c));
}

TEST(SimkitProperties, NoiseFreeEndToEnd) {
  const RunConfig config = parse_run_config(
      R"({"encoder_slip_sigma": 0, "encoder_rounding": false, "compass_sigma_deg": 0,
          "compass_step_deg": 0, "compass_gyro_sigma": 0, "map_sigma_xy": 0,
          "map_sigma_theta_deg": 0})");
  const SensorLog log = simulate_run(config, 1);
  const std::vector<FilterStep> steps = fuse_log(log, config.filter);
  const std::vector<TruthSample> truth = generate_truth(config.trajectory);
  const StateEstimate& last = steps.back().estimate;
  const Pose2D p = truth_pose_at(truth, last.t);
  EXPECT_LE(std::hypot(last.mean.pose.x() - p.x(), last.mean.pose.y() - p.y()), 1e-3);
  EXPECT_LE(std::abs(rad_to_deg(angle_diff(last.mean.pose.theta(), p.theta()))), 0.01);
}

TEST(RunConfig, ParseDumpAndErrors) {
  const RunConfig def = default_run_config();
  EXPECT_NO_THROW(def.validate());
  const RunConfig parsed = parse_run_config("// comment\n{ /* inline */ \"traj_speed\": 0.5 }");
  EXPECT_DOUBLE_EQ(parsed.trajectory.speed, 0.5);
  EXPECT_EQ(dump_run_config(parse_run_config(dump_run_config(def))), dump_run_config(def));
  EXPECT_EQ(dump_run_config(load_run_config("default")), dump_run_config(def));
  EXPECT_THROW(parse_run_config("{\"no_such_key\": 1}"), std::invalid_argument);
  EXPECT_THROW(parse_run_config("{\"traj_speed\": -1}"), std::invalid_argument);
  EXPECT_THROW(parse_run_config("{\"traj_speed\": \"fast\"}"), std::invalid_argument);
  EXPECT_THROW(parse_run_config("[1, 2]"), std::invalid_argument);
  EXPECT_THROW(parse_run_config("{\"compass_sigma_deg\": -0.1}"), std::invalid_argument);

  const RunConfig deg = parse_run_config("{\"compass_sigma_deg\": 0.5, \"gate_compass\": 9.21}");
  EXPECT_NEAR(deg.sim.compass_sigma, deg_to_rad(0.5), 1e-15);
  EXPECT_DOUBLE_EQ(deg.filter.gate.compass, 9.21);
  // R blocks follow the simulated noise unless overridden.
  EXPECT_NEAR(deg.filter.R_compass(0, 0), derive_compass_R(deg.sim)(0, 0), 1e-18);
  const RunConfig over = parse_run_config("{\"filter_r_map\": [1e-2, 1e-2, 1e-3]}");
  EXPECT_DOUBLE_EQ(over.filter.R_map(0, 0), 1e-2);
  EXPECT_DOUBLE_EQ(over.filter.R_map(2, 2), 1e-3);
}
