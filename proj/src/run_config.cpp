#include "ekfloc/run_config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ekfloc {

using nlohmann::json;

void RunConfig::validate() const {
  trajectory.validate();
  wheels.validate();
  sim.validate();
  filter.validate();
  map_pipeline.mcl.validate();
  if (map_pipeline.particles <= 0 || map_pipeline.n_beams <= 0 ||
      !(map_pipeline.max_range > 0.0)) {
    throw std::invalid_argument("RunConfig: invalid map pipeline settings");
  }
  if (map_pgm.empty() != map_meta.empty()) {
    throw std::invalid_argument("RunConfig: map_pgm and map_meta must be given together");
  }
}

RunConfig default_run_config() {
  RunConfig c;
  c.filter.R_map = derive_map_R(c.sim);
  c.filter.R_compass = derive_compass_R(c.sim);
  c.filter.R_encoder = derive_encoder_R(c.wheels, c.sim, c.trajectory.speed);
  return c;
}

namespace {

double as_number(const json& j, const std::string& key) {
  if (!j.is_number()) {
    throw std::invalid_argument("config: '" + key + "' must be a number");
  }
  return j.get<double>();
}

bool as_bool(const json& j, const std::string& key) {
  if (!j.is_boolean()) {
    throw std::invalid_argument("config: '" + key + "' must be true or false");
  }
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& key) {
  if (!j.is_string()) {
    throw std::invalid_argument("config: '" + key + "' must be a string");
  }
  return j.get<std::string>();
}

Eigen::VectorXd as_vector(const json& j, const std::string& key, Eigen::Index n) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    throw std::invalid_argument("config: '" + key + "' must be an array of " + std::to_string(n) +
                                " numbers");
  }
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = as_number(j[static_cast<std::size_t>(i)], key);
  }
  return v;
}

// A diagonal given as an array, or a full square matrix as nested arrays.
Eigen::MatrixXd as_covariance(const json& j, const std::string& key, Eigen::Index n) {
  if (j.is_array() && !j.empty() && j.front().is_array()) {
    Eigen::MatrixXd m(n, n);
    if (static_cast<Eigen::Index>(j.size()) != n) {
      throw std::invalid_argument("config: '" + key + "' must be " + std::to_string(n) + "x" +
                                  std::to_string(n));
    }
    for (Eigen::Index r = 0; r < n; ++r) {
      m.row(r) = as_vector(j[static_cast<std::size_t>(r)], key, n).transpose();
    }
    return m;
  }
  return as_vector(j, key, n).asDiagonal();
}

// null disables a gate.
double as_gate(const json& j, const std::string& key) {
  return j.is_null() ? kNoGate : as_number(j, key);
}

json gate_json(double g) { return g == kNoGate ? json(nullptr) : json(g); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    rows.push_back(row);
  }
  return rows;
}

std::string corner_mode_name(CornerMode m) {
  return m == CornerMode::StopAndTurn ? "stop_and_turn" : "blended_arc";
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("config: top level must be an object");
  }

  RunConfig c = default_run_config();
  bool r_map_set = false;
  bool r_encoder_set = false;
  bool r_compass_set = false;
  double rect_w = 24.0;
  double rect_h = 15.0;
  bool rect_set = false;
  bool waypoints_set = false;

  using Handler = std::function<void(const json&, const std::string&)>;
  const std::map<std::string, Handler> handlers = {
      {"traj_width", [&](const json& v, const std::string& k) { rect_w = as_number(v, k); rect_set = true; }},
      {"traj_height", [&](const json& v, const std::string& k) { rect_h = as_number(v, k); rect_set = true; }},
      {"traj_waypoints",
       [&](const json& v, const std::string& k) {
         if (!v.is_array()) {
           throw std::invalid_argument("config: '" + k + "' must be an array of [x, y]");
         }
         c.trajectory.waypoints.clear();
         for (const json& w : v) {
           c.trajectory.waypoints.emplace_back(as_vector(w, k, 2));
         }
         waypoints_set = true;
       }},
      {"traj_speed", [&](const json& v, const std::string& k) { c.trajectory.speed = as_number(v, k); }},
      {"traj_sample_rate", [&](const json& v, const std::string& k) { c.trajectory.sample_rate = as_number(v, k); }},
      {"traj_corner_mode",
       [&](const json& v, const std::string& k) {
         const std::string s = as_string(v, k);
         if (s == "stop_and_turn") {
           c.trajectory.corner_mode = CornerMode::StopAndTurn;
         } else if (s == "blended_arc") {
           c.trajectory.corner_mode = CornerMode::BlendedArc;
         } else {
           throw std::invalid_argument("config: '" + k + "' must be stop_and_turn or blended_arc");
         }
       }},
      {"traj_turn_rate", [&](const json& v, const std::string& k) { c.trajectory.turn_rate = as_number(v, k); }},
      {"traj_blend_radius", [&](const json& v, const std::string& k) { c.trajectory.blend_radius = as_number(v, k); }},

      {"wheel_radius", [&](const json& v, const std::string& k) { c.wheels.wheel_radius = as_number(v, k); }},
      {"wheel_track_width", [&](const json& v, const std::string& k) { c.wheels.track_width = as_number(v, k); }},
      {"wheel_counts_per_rev", [&](const json& v, const std::string& k) { c.wheels.counts_per_rev = as_number(v, k); }},

      {"encoder_slip_sigma", [&](const json& v, const std::string& k) { c.sim.encoder_slip_sigma = as_number(v, k); }},
      {"encoder_rounding", [&](const json& v, const std::string& k) { c.sim.encoder_rounding = as_bool(v, k); }},
      {"encoder_rate", [&](const json& v, const std::string& k) { c.sim.encoder_rate = as_number(v, k); }},
      {"compass_sigma_deg", [&](const json& v, const std::string& k) { c.sim.compass_sigma = deg_to_rad(as_number(v, k)); }},
      {"compass_step_deg", [&](const json& v, const std::string& k) { c.sim.compass_step = deg_to_rad(as_number(v, k)); }},
      {"compass_gyro_sigma", [&](const json& v, const std::string& k) { c.sim.gyro_sigma = as_number(v, k); }},
      {"compass_rate", [&](const json& v, const std::string& k) { c.sim.compass_rate = as_number(v, k); }},
      {"map_sigma_xy", [&](const json& v, const std::string& k) { c.sim.map_sigma_xy = as_number(v, k); }},
      {"map_sigma_theta_deg", [&](const json& v, const std::string& k) { c.sim.map_sigma_theta = deg_to_rad(as_number(v, k)); }},
      {"map_rate", [&](const json& v, const std::string& k) { c.sim.map_rate = as_number(v, k); }},
      {"map_mode",
       [&](const json& v, const std::string& k) {
         const std::string s = as_string(v, k);
         if (s == "shortcut") {
           c.map_mode = MapMode::Shortcut;
         } else if (s == "full") {
           c.map_mode = MapMode::Full;
         } else {
           throw std::invalid_argument("config: '" + k + "' must be shortcut or full");
         }
       }},
      {"map_pgm", [&](const json& v, const std::string& k) { c.map_pgm = as_string(v, k); }},
      {"map_meta", [&](const json& v, const std::string& k) { c.map_meta = as_string(v, k); }},
      {"laser_sigma_range", [&](const json& v, const std::string& k) { c.sim.laser_sigma_range = as_number(v, k); }},
      {"laser_beams", [&](const json& v, const std::string& k) { c.map_pipeline.n_beams = static_cast<int>(as_number(v, k)); }},
      {"laser_max_range", [&](const json& v, const std::string& k) { c.map_pipeline.max_range = as_number(v, k); }},
      {"mcl_particles", [&](const json& v, const std::string& k) { c.map_pipeline.particles = static_cast<int>(as_number(v, k)); }},
      {"mcl_init_sigma_xy", [&](const json& v, const std::string& k) { c.map_pipeline.init_sigma_xy = as_number(v, k); }},
      {"mcl_init_sigma_theta_deg", [&](const json& v, const std::string& k) { c.map_pipeline.init_sigma_theta = deg_to_rad(as_number(v, k)); }},
      {"mcl_beam_stride", [&](const json& v, const std::string& k) { c.map_pipeline.mcl.beam_stride = static_cast<int>(as_number(v, k)); }},
      {"mcl_sigma_hit", [&](const json& v, const std::string& k) { c.map_pipeline.mcl.sigma_hit = as_number(v, k); }},
      {"mcl_z_hit", [&](const json& v, const std::string& k) { c.map_pipeline.mcl.z_hit = as_number(v, k); }},
      {"mcl_z_rand", [&](const json& v, const std::string& k) { c.map_pipeline.mcl.z_rand = as_number(v, k); }},
      {"mcl_jitter_xy", [&](const json& v, const std::string& k) { c.map_pipeline.mcl.jitter_xy = as_number(v, k); }},
      {"mcl_jitter_theta_deg", [&](const json& v, const std::string& k) { c.map_pipeline.mcl.jitter_theta = deg_to_rad(as_number(v, k)); }},
      {"mcl_resample_ratio", [&](const json& v, const std::string& k) { c.map_pipeline.mcl.resample_ratio = as_number(v, k); }},

      {"filter_q", [&](const json& v, const std::string& k) { c.filter.Q = as_covariance(v, k, 5); }},
      {"filter_q_rate", [&](const json& v, const std::string& k) { c.filter.q_rate_hz = as_number(v, k); }},
      {"filter_p0", [&](const json& v, const std::string& k) { c.filter.P0 = as_covariance(v, k, 5); }},
      {"filter_r_map", [&](const json& v, const std::string& k) { if (!v.is_null()) { c.filter.R_map = as_covariance(v, k, 3); r_map_set = true; } }},
      {"filter_r_encoder", [&](const json& v, const std::string& k) { if (!v.is_null()) { c.filter.R_encoder = as_covariance(v, k, 2); r_encoder_set = true; } }},
      {"filter_r_compass", [&](const json& v, const std::string& k) { if (!v.is_null()) { c.filter.R_compass = as_covariance(v, k, 2); r_compass_set = true; } }},
      {"filter_gating", [&](const json& v, const std::string& k) { c.filter.gating = as_bool(v, k); }},
      {"gate_map", [&](const json& v, const std::string& k) { c.filter.gate.map = as_gate(v, k); }},
      {"gate_encoder", [&](const json& v, const std::string& k) { c.filter.gate.encoder = as_gate(v, k); }},
      {"gate_compass", [&](const json& v, const std::string& k) { c.filter.gate.compass = as_gate(v, k); }},
      {"init_pose",
       [&](const json& v, const std::string& k) {
         const Eigen::VectorXd p = as_vector(v, k, 3);
         c.filter.init_state.pose = Pose2D(p(0), p(1), deg_to_rad(p(2)));
       }},
  };

  for (const auto& [key, value] : j.items()) {
    auto it = handlers.find(key);
    if (it == handlers.end()) {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    it->second(value, key);
  }
  if (rect_set && waypoints_set) {
    throw std::invalid_argument("config: give either traj_width/traj_height or traj_waypoints");
  }
  if (rect_set) {
    c.trajectory.waypoints = TrajectorySpec::rectangle(rect_w, rect_h);
  }
  if (!r_map_set) {
    c.filter.R_map = derive_map_R(c.sim);
  }
  if (!r_compass_set) {
    c.filter.R_compass = derive_compass_R(c.sim);
  }
  if (!r_encoder_set) {
    c.filter.R_encoder = derive_encoder_R(c.wheels, c.sim, c.trajectory.speed);
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  if (path == "default") {
    return default_run_config();
  }
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read config " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::string dump_run_config(const RunConfig& c) {
  json j;
  json wps = json::array();
  for (const auto& w : c.trajectory.waypoints) {
    wps.push_back({w.x(), w.y()});
  }
  j["traj_waypoints"] = wps;
  j["traj_speed"] = c.trajectory.speed;
  j["traj_sample_rate"] = c.trajectory.sample_rate;
  j["traj_corner_mode"] = corner_mode_name(c.trajectory.corner_mode);
  j["traj_turn_rate"] = c.trajectory.turn_rate;
  j["traj_blend_radius"] = c.trajectory.blend_radius;
  j["wheel_radius"] = c.wheels.wheel_radius;
  j["wheel_track_width"] = c.wheels.track_width;
  j["wheel_counts_per_rev"] = c.wheels.counts_per_rev;
  j["encoder_slip_sigma"] = c.sim.encoder_slip_sigma;
  j["encoder_rounding"] = c.sim.encoder_rounding;
  j["encoder_rate"] = c.sim.encoder_rate;
  j["compass_sigma_deg"] = rad_to_deg(c.sim.compass_sigma);
  j["compass_step_deg"] = rad_to_deg(c.sim.compass_step);
  j["compass_gyro_sigma"] = c.sim.gyro_sigma;
  j["compass_rate"] = c.sim.compass_rate;
  j["map_sigma_xy"] = c.sim.map_sigma_xy;
  j["map_sigma_theta_deg"] = rad_to_deg(c.sim.map_sigma_theta);
  j["map_rate"] = c.sim.map_rate;
  j["map_mode"] = c.map_mode == MapMode::Shortcut ? "shortcut" : "full";
  j["map_pgm"] = c.map_pgm;
  j["map_meta"] = c.map_meta;
  j["laser_sigma_range"] = c.sim.laser_sigma_range;
  j["laser_beams"] = c.map_pipeline.n_beams;
  j["laser_max_range"] = c.map_pipeline.max_range;
  j["mcl_particles"] = c.map_pipeline.particles;
  j["mcl_init_sigma_xy"] = c.map_pipeline.init_sigma_xy;
  j["mcl_init_sigma_theta_deg"] = rad_to_deg(c.map_pipeline.init_sigma_theta);
  j["mcl_beam_stride"] = c.map_pipeline.mcl.beam_stride;
  j["mcl_sigma_hit"] = c.map_pipeline.mcl.sigma_hit;
  j["mcl_z_hit"] = c.map_pipeline.mcl.z_hit;
  j["mcl_z_rand"] = c.map_pipeline.mcl.z_rand;
  j["mcl_jitter_xy"] = c.map_pipeline.mcl.jitter_xy;
  j["mcl_jitter_theta_deg"] = rad_to_deg(c.map_pipeline.mcl.jitter_theta);
  j["mcl_resample_ratio"] = c.map_pipeline.mcl.resample_ratio;
  j["filter_q"] = matrix_json(c.filter.Q);
  j["filter_q_rate"] = c.filter.q_rate_hz;
  j["filter_p0"] = matrix_json(c.filter.P0);
  j["filter_r_map"] = matrix_json(c.filter.R_map);
  j["filter_r_encoder"] = matrix_json(c.filter.R_encoder);
  j["filter_r_compass"] = matrix_json(c.filter.R_compass);
  j["filter_gating"] = c.filter.gating;
  j["gate_map"] = gate_json(c.filter.gate.map);
  j["gate_encoder"] = gate_json(c.filter.gate.encoder);
  j["gate_compass"] = gate_json(c.filter.gate.compass);
  const Pose2D& p = c.filter.init_state.pose;
  j["init_pose"] = {p.x(), p.y(), rad_to_deg(p.theta())};
  return j.dump(2) + "\n";
}

}  // namespace ekfloc
