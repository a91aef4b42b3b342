#pragma once

#include <string>
#include <vector>

#include "ekfloc/geometry.hpp"

namespace ekfloc {

/// Signed reference-minus-estimate errors at one reference timestamp.
struct ErrorSample {
  double t = 0.0;
  double ex = 0.0;      // m
  double ey = 0.0;      // m
  double etheta = 0.0;  // rad, wrapped
};

struct EvalReport {
  double rmse_position_m = 0.0;
  double rmse_heading_deg = 0.0;
  double max_err_x_m = 0.0;
  double max_err_y_m = 0.0;
  double max_err_heading_deg = 0.0;
  std::size_t n_samples = 0;
  std::vector<ErrorSample> series;
};

/// Estimate pose at t: linear in x and y, shortest arc in heading. Repeated
/// timestamps resolve to the last entry. t must lie within the series span.
Pose2D interpolate_pose(const std::vector<TimedPose>& est, double t);

/// Errors at every reference sample that falls inside the estimate's time
/// span. Throws std::invalid_argument if either series is empty or they do
/// not overlap.
std::vector<ErrorSample> error_series(const std::vector<TimedPose>& ref,
                                      const std::vector<TimedPose>& est);

/// sqrt(mean(ex^2 + ey^2)) in meters.
double rmse_position(const std::vector<ErrorSample>& series);
/// sqrt(mean(etheta^2)) in degrees.
double rmse_heading(const std::vector<ErrorSample>& series);

double rmse_position(const std::vector<TimedPose>& ref, const std::vector<TimedPose>& est);
double rmse_heading(const std::vector<TimedPose>& ref, const std::vector<TimedPose>& est);

EvalReport make_report(std::vector<ErrorSample> series);
EvalReport evaluate(const std::vector<TimedPose>& ref, const std::vector<TimedPose>& est);

/// Report summary as a JSON object (without the series), keys sorted.
std::string report_json(const EvalReport& report);

}  // namespace ekfloc
