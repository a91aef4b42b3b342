#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <variant>
#include <vector>

#include "ekfloc/fusion.hpp"
#include "ekfloc/geometry.hpp"
#include "ekfloc/sensors.hpp"

namespace ekfloc {

/// Malformed log content. line() is 1-based, 0 when not line-specific.
class LogFormatError : public std::runtime_error {
 public:
  LogFormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct TruthRecord {
  double t = 0.0;
  Pose2D pose;
};

using LogRecord = std::variant<TruthRecord, Measurement>;

double record_time(const LogRecord& r);

/// Time-ordered mix of sensor readings and optional ground truth.
struct SensorLog {
  std::vector<LogRecord> records;

  std::vector<Measurement> measurements() const;
  std::vector<TruthRecord> truth() const;
  bool is_sorted() const;
};

/// Merges record streams into one log ordered by time; records sharing a
/// timestamp are ordered truth, map, compass, encoder.
SensorLog merge_records(std::vector<LogRecord> records);

// JSON-Lines, one record per line:
//   {"t":..,"kind":"truth","pose":[x,y,theta]}
//   {"t":..,"kind":"map"|"encoder"|"compass","z":[..],"R":[[..],..]}
void write_log(const SensorLog& log, std::ostream& out);
void write_log(const SensorLog& log, const std::filesystem::path& path);
SensorLog read_log(std::istream& in);
SensorLog read_log(const std::filesystem::path& path);

// Fused trajectory, one estimate per line:
//   {"t":..,"kind":"estimate","source":"map","accepted":true,
//    "state":[x,y,theta,v,omega],"P":[[..5..],..]}
void write_trajectory(const std::vector<FilterStep>& steps, std::ostream& out);
void write_trajectory(const std::vector<FilterStep>& steps, const std::filesystem::path& path);
std::vector<FilterStep> read_trajectory(std::istream& in);
std::vector<FilterStep> read_trajectory(const std::filesystem::path& path);

}  // namespace ekfloc
