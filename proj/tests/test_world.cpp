#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <Eigen/Cholesky>

#include "ekfloc/laser.hpp"
#include "ekfloc/mcl.hpp"
#include "ekfloc/occupancy_grid.hpp"

using namespace ekfloc;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("ekfloc_world_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

const char* kMeta =
    "resolution: 0.1\norigin_x: -1.0\norigin_y: 2.0\norigin_theta: 0.0\noccupied_threshold: 0.65\n";

// 5 m x 5 m map with a wall filling grid-frame x in [3.0, 3.2].
OccupancyGrid wall_map(Pose2D origin = {}) {
  OccupancyGrid g = OccupancyGrid::empty(5.0, 5.0, 0.05, origin);
  g.fill_box(3.0, 0.0, 3.2, 5.0);
  return g;
}

}  // namespace

TEST(LoadMap, WhiteAndBlack) {
  TempDir dir;
  write_text(dir / "m.yaml", kMeta);
  std::string white = "P2\n# comment\n10 10\n255\n";
  for (int i = 0; i < 100; ++i) white += "255 ";
  write_text(dir / "white.pgm", white);
  const OccupancyGrid w = load_map(dir / "white.pgm", dir / "m.yaml");
  EXPECT_EQ(w.width(), 10);
  EXPECT_EQ(w.height(), 10);
  EXPECT_DOUBLE_EQ(w.resolution(), 0.1);
  EXPECT_DOUBLE_EQ(w.origin().x(), -1.0);
  EXPECT_DOUBLE_EQ(w.origin().y(), 2.0);
  for (double c : w.cells()) EXPECT_EQ(c, 0.0);

  write_text(dir / "black.pgm", "P5\n10 10\n255\n" + std::string(100, '\0'));
  const OccupancyGrid b = load_map(dir / "black.pgm", dir / "m.yaml");
  for (double c : b.cells()) EXPECT_EQ(c, 1.0);
}

TEST(LoadMap, CheckerboardCellByCell) {
  TempDir dir;
  write_text(dir / "m.yaml", kMeta);
  const int w = 7, h = 5;
  std::string img = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (int row = 0; row < h; ++row)
    for (int col = 0; col < w; ++col) img += static_cast<char>((row + col) % 2 ? 0 : 255);
  write_text(dir / "c.pgm", img);
  const OccupancyGrid g = load_map(dir / "c.pgm", dir / "m.yaml");
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      // Image row 0 is the top of the map.
      const int iy = h - 1 - row;
      EXPECT_EQ(g.at(col, iy), (row + col) % 2 ? 1.0 : 0.0) << col << "," << row;
      EXPECT_EQ(g.occupied(col, iy), (row + col) % 2 == 1);
    }
  }
}

TEST(LoadMap, SixteenBitAndGreyLevels) {
  TempDir dir;
  write_text(dir / "m.yaml", kMeta);
  write_text(dir / "g.pgm", "P2 2 1 1000\n0 250\n");
  const OccupancyGrid g = load_map(dir / "g.pgm", dir / "m.yaml");
  EXPECT_DOUBLE_EQ(g.at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(g.at(1, 0), 0.75);
  std::string raw = "P5\n2 1\n65535\n";
  raw += std::string("\xff\xff\x00\x00", 4);
  write_text(dir / "g16.pgm", raw);
  const OccupancyGrid g16 = load_map(dir / "g16.pgm", dir / "m.yaml");
  EXPECT_DOUBLE_EQ(g16.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(g16.at(1, 0), 1.0);
}

TEST(LoadMap, Errors) {
  TempDir dir;
  write_text(dir / "m.yaml", kMeta);
  write_text(dir / "ok.pgm", "P2\n2 2\n255\n0 0 0 0\n");
  write_text(dir / "magic.pgm", "P3\n2 2\n255\n0 0 0 0\n");
  write_text(dir / "short.pgm", "P2\n2 2\n255\n0 0 0\n");
  write_text(dir / "short5.pgm", "P5\n4 4\n255\n" + std::string(3, '\0'));
  write_text(dir / "header.pgm", "P2\nx 2\n255\n");
  write_text(dir / "missing.yaml", "resolution: 0.1\norigin_x: 0\n");
  write_text(dir / "badres.yaml", "resolution: zero\norigin_x: 0\norigin_y: 0\norigin_theta: 0\noccupied_threshold: 0.5\n");
  EXPECT_NO_THROW(load_map(dir / "ok.pgm", dir / "m.yaml"));
  EXPECT_THROW(load_map(dir / "magic.pgm", dir / "m.yaml"), MapFormatError);
  EXPECT_THROW(load_map(dir / "short.pgm", dir / "m.yaml"), MapFormatError);
  EXPECT_THROW(load_map(dir / "short5.pgm", dir / "m.yaml"), MapFormatError);
  EXPECT_THROW(load_map(dir / "header.pgm", dir / "m.yaml"), MapFormatError);
  EXPECT_THROW(load_map(dir / "ok.pgm", dir / "missing.yaml"), MapFormatError);
  EXPECT_THROW(load_map(dir / "ok.pgm", dir / "badres.yaml"), MapFormatError);
  EXPECT_THROW(load_map(dir / "nope.pgm", dir / "m.yaml"), MapFormatError);
}

TEST(SaveMap, RoundTrip) {
  TempDir dir;
  OccupancyGrid g = OccupancyGrid::empty(2.0, 1.0, 0.1, Pose2D(1.5, -2.0, 0.0));
  g.add_border_walls(0.1);
  g.fill_box(0.5, 0.2, 0.8, 0.6);
  save_map(g, dir / "s.pgm", dir / "s.yaml");
  const OccupancyGrid back = load_map(dir / "s.pgm", dir / "s.yaml");
  ASSERT_EQ(back.width(), g.width());
  ASSERT_EQ(back.height(), g.height());
  EXPECT_DOUBLE_EQ(back.resolution(), g.resolution());
  EXPECT_DOUBLE_EQ(back.origin().x(), 1.5);
  EXPECT_DOUBLE_EQ(back.origin().y(), -2.0);
  for (int iy = 0; iy < g.height(); ++iy)
    for (int ix = 0; ix < g.width(); ++ix) EXPECT_EQ(back.occupied(ix, iy), g.occupied(ix, iy));
}

TEST(OccupancyGrid, Invariants) {
  EXPECT_THROW(OccupancyGrid(0, 3, 0.1), std::invalid_argument);
  EXPECT_THROW(OccupancyGrid(3, 3, 0.0), std::invalid_argument);
  EXPECT_THROW(OccupancyGrid(3, 3, 0.1, Pose2D(), 0.65, std::vector<double>(8)), std::invalid_argument);
  const OccupancyGrid g(4, 3, 0.5, Pose2D(10, 20, 0));
  EXPECT_EQ(g.cells().size(), 12u);
  EXPECT_TRUE(g.contains(10.1, 20.1));
  EXPECT_FALSE(g.contains(9.9, 20.1));
  const auto c = g.cell_of(11.6, 21.2);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->ix, 3);
  EXPECT_EQ(c->iy, 2);
}

TEST(RayCast, EmptyMapReturnsMaxRange) {
  const OccupancyGrid g = OccupancyGrid::empty(5.0, 5.0, 0.05);
  EXPECT_EQ(ray_cast(g, Pose2D(2.5, 2.5, 0.3), 0.7, 20.0), 20.0);
  EXPECT_EQ(ray_cast(g, Pose2D(2.5, 2.5, 0.3), 0.7, 1.0), 1.0);
}

TEST(RayCast, AxisAlignedWall) {
  const OccupancyGrid g = wall_map();
  EXPECT_NEAR(ray_cast(g, Pose2D(2.0, 2.5, 0.0), 0.0, 10.0), 1.0, 0.025);
  EXPECT_NEAR(ray_cast(g, Pose2D(2.0, 2.5, kPi / 2), -kPi / 2, 10.0), 1.0, 0.025);
  EXPECT_EQ(ray_cast(g, Pose2D(2.0, 2.5, kPi), 0.0, 10.0), 10.0);
}

TEST(RayCast, FortyFiveDegreeIncidence) {
  const OccupancyGrid g = wall_map();
  EXPECT_NEAR(ray_cast(g, Pose2D(2.0, 1.0, kPi / 4), 0.0, 10.0), std::sqrt(2.0), 0.05);
  EXPECT_NEAR(ray_cast(g, Pose2D(2.3, 1.0, 0.0), -kPi / 4, 10.0), 0.7 * std::sqrt(2.0), 0.05);
}

TEST(RayCast, OriginOutsideGridRejected) {
  const OccupancyGrid g = wall_map();
  EXPECT_THROW(ray_cast(g, Pose2D(-0.1, 1.0, 0.0), 0.0, 5.0), std::invalid_argument);
}

TEST(WorldProperties, RayCastMonotoneInMaxRange) {
  OccupancyGrid g = wall_map();
  g.add_border_walls(0.1);
  g.fill_box(1.0, 1.0, 1.4, 1.3);
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> pos(0.2, 2.9);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> range(0.0, 8.0);
  for (int i = 0; i < 2000; ++i) {
    const Pose2D p(pos(rng), pos(rng), ang(rng));
    const double a = ang(rng);
    double r1 = range(rng), r2 = range(rng);
    if (r1 > r2) std::swap(r1, r2);
    EXPECT_LE(ray_cast(g, p, a, r1), ray_cast(g, p, a, r2));
  }
}

TEST(WorldProperties, RayCastTranslationInvariant) {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> pos(0.2, 2.9);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> shift(-30.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    const double dx = shift(rng), dy = shift(rng);
    const OccupancyGrid a = wall_map();
    const OccupancyGrid b = wall_map(Pose2D(dx, dy, 0.0));
    const Pose2D p(pos(rng), pos(rng), ang(rng));
    const double beam = ang(rng);
    EXPECT_NEAR(ray_cast(a, p, beam, 10.0),
                ray_cast(b, Pose2D(p.x() + dx, p.y() + dy, p.theta()), beam, 10.0), 1e-9);
  }
}

TEST(SimulateScan, NoiseFreeAndDeterministic) {
  OccupancyGrid g = wall_map();
  g.add_border_walls(0.1);
  const Pose2D pose(1.5, 2.0, 0.4);
  const LaserScan clean = simulate_scan(g, pose, 271, 20.0, 0.0, 9);
  ASSERT_EQ(clean.n_beams(), 271);
  EXPECT_NEAR(clean.beam_angle(0), deg_to_rad(-135.0), 1e-12);
  EXPECT_NEAR(clean.beam_angle(270), deg_to_rad(135.0), 1e-12);
  for (int i = 0; i < clean.n_beams(); ++i) {
    EXPECT_EQ(clean.ranges[static_cast<std::size_t>(i)], ray_cast(g, pose, clean.beam_angle(i), 20.0));
  }
  const LaserScan a = simulate_scan(g, pose, 271, 20.0, 0.008, 9);
  const LaserScan b = simulate_scan(g, pose, 271, 20.0, 0.008, 9);
  EXPECT_EQ(a.ranges, b.ranges);
  const LaserScan noisy = simulate_scan(g, pose, 271, 1.0, 0.5, 10);
  for (double r : noisy.ranges) {
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(Mcl, ConsensusAtTruthReturnsTruth) {
  OccupancyGrid g = wall_map();
  g.add_border_walls(0.1);
  const Pose2D truth(1.5, 2.0, 0.4);
  ParticleSet set;
  for (int i = 0; i < 50; ++i) set.particles.push_back({truth, 1.0 / 50});
  MclConfig cfg;
  cfg.jitter_xy = 0.0;
  cfg.jitter_theta = 0.0;
  const LaserScan scan = simulate_scan(g, truth, 271, 20.0, 0.0, 1);
  const MclResult r = mcl_localize(set, scan, g, Pose2D(), 2, cfg);
  ASSERT_TRUE(r.usable);
  EXPECT_NEAR(r.measurement.z(0), truth.x(), 1e-12);
  EXPECT_NEAR(r.measurement.z(1), truth.y(), 1e-12);
  EXPECT_NEAR(r.measurement.z(2), truth.theta(), 1e-12);
  EXPECT_EQ(r.measurement.source, Source::MapPose);
  // Zero spread: R sits exactly at the floor.
  EXPECT_TRUE(r.measurement.R.isApprox(Eigen::Matrix3d(cfg.cov_floor.asDiagonal()), 1e-12));
}

TEST(Mcl, AllZeroLikelihoodIsUnusable) {
  OccupancyGrid g = wall_map();
  ParticleSet set;
  for (int i = 0; i < 10; ++i) set.particles.push_back({Pose2D(3.1, 1.0 + 0.1 * i, 0.0), 0.1});
  MclConfig cfg;
  cfg.jitter_xy = 0.0;
  cfg.jitter_theta = 0.0;
  const LaserScan scan = simulate_scan(g, Pose2D(1.0, 1.0, 0.0), 31, 10.0, 0.0, 1);
  const MclResult r = mcl_localize(set, scan, g, Pose2D(), 3, cfg);
  EXPECT_FALSE(r.usable);
  EXPECT_EQ(r.particles.size(), 10u);
}

TEST(Mcl, CircularMeanHeading) {
  ParticleSet set;
  set.particles.push_back({Pose2D(0, 0, kPi - 0.1), 0.5});
  set.particles.push_back({Pose2D(2, 0, -kPi + 0.1), 0.5});
  const Pose2D m = weighted_mean_pose(set);
  EXPECT_NEAR(m.x(), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(m.theta()), kPi, 1e-12);
}

TEST(WorldProperties, WeightsNormalizedAndCovarianceSpd) {
  OccupancyGrid g = OccupancyGrid::empty(4.0, 4.0, 0.05);
  g.add_border_walls(0.1);
  g.fill_box(2.6, 2.6, 3.9, 3.3);
  ParticleSet set = uniform_particles(g, 300, 5);
  EXPECT_NEAR(set.weight_sum(), 1.0, 1e-9);
  Pose2D prev(1.0, 1.2, 0.3);
  for (int k = 0; k < 10; ++k) {
    const Pose2D truth(1.0 + 0.1 * k, 1.2, 0.3);
    const LaserScan scan = simulate_scan(g, truth, 91, 20.0, 0.008, 100 + k);
    const MclResult r = mcl_localize(set, scan, g, prev.between(truth), 200 + k);
    prev = truth;
    ASSERT_TRUE(r.usable);
    EXPECT_NEAR(r.particles.weight_sum(), 1.0, 1e-9);
    for (const Particle& p : r.particles.particles) EXPECT_GE(p.weight, 0.0);
    Eigen::LLT<Eigen::MatrixXd> llt(r.measurement.R);
    EXPECT_EQ(llt.info(), Eigen::Success);
    EXPECT_TRUE(r.measurement.R.isApprox(r.measurement.R.transpose()));
    EXPECT_GE(r.measurement.R.diagonal().minCoeff(), 1e-4 - 1e-15);
    set = r.particles;
  }
}

TEST(Mcl, DeterministicPerSeed) {
  OccupancyGrid g = OccupancyGrid::empty(4.0, 4.0, 0.05);
  g.add_border_walls(0.1);
  const ParticleSet set = uniform_particles(g, 200, 8);
  const LaserScan scan = simulate_scan(g, Pose2D(1, 1, 0), 91, 20.0, 0.008, 3);
  const MclResult a = mcl_localize(set, scan, g, Pose2D(0.05, 0, 0), 77);
  const MclResult b = mcl_localize(set, scan, g, Pose2D(0.05, 0, 0), 77);
  ASSERT_EQ(a.particles.size(), b.particles.size());
  for (std::size_t i = 0; i < a.particles.size(); ++i) {
    EXPECT_EQ(a.particles.particles[i].pose, b.particles.particles[i].pose);
    EXPECT_EQ(a.particles.particles[i].weight, b.particles.particles[i].weight);
  }
  EXPECT_EQ(a.measurement.z, b.measurement.z);
}
