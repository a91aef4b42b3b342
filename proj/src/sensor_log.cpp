#include "ekfloc/sensor_log.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

namespace ekfloc {

using nlohmann::json;

LogFormatError::LogFormatError(std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

double record_time(const LogRecord& r) {
  return std::visit([](const auto& rec) { return rec.t; }, r);
}

std::vector<Measurement> SensorLog::measurements() const {
  std::vector<Measurement> out;
  for (const LogRecord& r : records) {
    if (const auto* m = std::get_if<Measurement>(&r)) {
      out.push_back(*m);
    }
  }
  return out;
}

std::vector<TruthRecord> SensorLog::truth() const {
  std::vector<TruthRecord> out;
  for (const LogRecord& r : records) {
    if (const auto* tr = std::get_if<TruthRecord>(&r)) {
      out.push_back(*tr);
    }
  }
  return out;
}

bool SensorLog::is_sorted() const {
  return std::is_sorted(records.begin(), records.end(), [](const LogRecord& a, const LogRecord& b) {
    return record_time(a) < record_time(b);
  });
}

namespace {

int kind_rank(const LogRecord& r) {
  if (const auto* m = std::get_if<Measurement>(&r)) {
    return 1 + static_cast<int>(m->source);
  }
  return 0;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw LogFormatError(0, std::string("non-finite ") + what + " cannot be written");
  }
}

json vector_json(const Eigen::VectorXd& v, const char* what) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    require_finite(v(i), what);
    arr.push_back(v(i));
  }
  return arr;
}

json matrix_json(const Eigen::MatrixXd& m, const char* what) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    rows.push_back(vector_json(m.row(r).transpose(), what));
  }
  return rows;
}

double number(const json& j, std::size_t line, const char* what) {
  if (!j.is_number()) {
    throw LogFormatError(line, std::string("field '") + what + "' must be a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw LogFormatError(line, std::string("field '") + what + "' is not finite");
  }
  return v;
}

const json& field(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw LogFormatError(line, std::string("missing field '") + key + "'");
  }
  return *it;
}

Eigen::VectorXd parse_vector(const json& j, std::size_t line, const char* what) {
  if (!j.is_array()) {
    throw LogFormatError(line, std::string("field '") + what + "' must be an array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], line, what);
  }
  return v;
}

Eigen::MatrixXd parse_matrix(const json& j, std::size_t line, const char* what) {
  if (!j.is_array() || j.empty()) {
    throw LogFormatError(line, std::string("field '") + what + "' must be a non-empty matrix");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::VectorXd row = parse_vector(j[static_cast<std::size_t>(r)], line, what);
    if (row.size() != rows) {
      throw LogFormatError(line, std::string("field '") + what + "' must be square");
    }
    m.row(r) = row.transpose();
  }
  return m;
}

Source parse_source(const std::string& kind, std::size_t line) {
  if (kind == "map") {
    return Source::MapPose;
  }
  if (kind == "encoder") {
    return Source::EncoderTwist;
  }
  if (kind == "compass") {
    return Source::CompassHeading;
  }
  throw LogFormatError(line, "unknown kind '" + kind + "'");
}

json parse_line(const std::string& text, std::size_t line) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) {
      throw LogFormatError(line, "record must be a JSON object");
    }
    return j;
  } catch (const json::parse_error& e) {
    throw LogFormatError(line, std::string("invalid JSON: ") + e.what());
  }
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot read " + path.string());
  }
  return in;
}

}  // namespace

SensorLog merge_records(std::vector<LogRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const LogRecord& a, const LogRecord& b) {
    const double ta = record_time(a);
    const double tb = record_time(b);
    if (ta != tb) {
      return ta < tb;
    }
    return kind_rank(a) < kind_rank(b);
  });
  return SensorLog{std::move(records)};
}

void write_log(const SensorLog& log, std::ostream& out) {
  for (const LogRecord& r : log.records) {
    json j;
    if (const auto* tr = std::get_if<TruthRecord>(&r)) {
      require_finite(tr->t, "timestamp");
      j["t"] = tr->t;
      j["kind"] = "truth";
      j["pose"] = vector_json(Eigen::Vector3d(tr->pose.x(), tr->pose.y(), tr->pose.theta()),
                              "pose");
    } else {
      const auto& m = std::get<Measurement>(r);
      require_finite(m.t, "timestamp");
      j["t"] = m.t;
      j["kind"] = std::string(source_name(m.source));
      j["z"] = vector_json(m.z, "z");
      j["R"] = matrix_json(m.R, "R");
    }
    out << j.dump() << '\n';
  }
}

void write_log(const SensorLog& log, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  write_log(log, out);
}

SensorLog read_log(std::istream& in) {
  SensorLog log;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) {
      continue;
    }
    const json j = parse_line(text, line);
    const double t = number(field(j, "t", line), line, "t");
    const json& kind = field(j, "kind", line);
    if (!kind.is_string()) {
      throw LogFormatError(line, "field 'kind' must be a string");
    }
    const auto k = kind.get<std::string>();
    if (k == "truth") {
      const Eigen::VectorXd p = parse_vector(field(j, "pose", line), line, "pose");
      if (p.size() != 3) {
        throw LogFormatError(line, "truth pose must have 3 entries");
      }
      log.records.emplace_back(TruthRecord{t, Pose2D(p(0), p(1), p(2))});
      continue;
    }
    const Source source = parse_source(k, line);
    try {
      log.records.emplace_back(make_measurement(t, source,
                                                parse_vector(field(j, "z", line), line, "z"),
                                                parse_matrix(field(j, "R", line), line, "R")));
    } catch (const std::invalid_argument& e) {
      throw LogFormatError(line, e.what());
    }
  }
  return log;
}

SensorLog read_log(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_log(in);
}

void write_trajectory(const std::vector<FilterStep>& steps, std::ostream& out) {
  for (const FilterStep& s : steps) {
    require_finite(s.estimate.t, "timestamp");
    json j;
    j["t"] = s.estimate.t;
    j["kind"] = "estimate";
    j["source"] = std::string(source_name(s.source));
    j["accepted"] = s.accepted;
    j["state"] = vector_json(s.estimate.mean.vector(), "state");
    j["P"] = matrix_json(s.estimate.cov, "P");
    out << j.dump() << '\n';
  }
}

void write_trajectory(const std::vector<FilterStep>& steps, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  write_trajectory(steps, out);
}

std::vector<FilterStep> read_trajectory(std::istream& in) {
  std::vector<FilterStep> steps;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) {
      continue;
    }
    const json j = parse_line(text, line);
    const json& kind = field(j, "kind", line);
    if (!kind.is_string() || kind.get<std::string>() != "estimate") {
      throw LogFormatError(line, "expected kind 'estimate'");
    }
    FilterStep step;
    step.estimate.t = number(field(j, "t", line), line, "t");
    const json& src = field(j, "source", line);
    if (!src.is_string()) {
      throw LogFormatError(line, "field 'source' must be a string");
    }
    step.source = parse_source(src.get<std::string>(), line);
    const json& acc = field(j, "accepted", line);
    if (!acc.is_boolean()) {
      throw LogFormatError(line, "field 'accepted' must be a boolean");
    }
    step.accepted = acc.get<bool>();
    const Eigen::VectorXd state = parse_vector(field(j, "state", line), line, "state");
    const Eigen::MatrixXd P = parse_matrix(field(j, "P", line), line, "P");
    if (state.size() != 5 || P.rows() != 5) {
      throw LogFormatError(line, "estimate must carry a 5-state and a 5x5 covariance");
    }
    step.estimate.mean = State5::from_vector(state);
    step.estimate.cov = P;
    steps.push_back(step);
  }
  return steps;
}

std::vector<FilterStep> read_trajectory(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  return read_trajectory(in);
}

}  // namespace ekfloc
