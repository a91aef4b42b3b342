#include "ekfloc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace ekfloc {

Pose2D interpolate_pose(const std::vector<TimedPose>& est, double t) {
  if (est.empty()) {
    throw std::invalid_argument("interpolate_pose: empty series");
  }
  if (t < est.front().t || t > est.back().t) {
    throw std::invalid_argument("interpolate_pose: time outside the series");
  }
  // First entry strictly after t; the entry before it is the last one at or
  // before t, which also picks the final duplicate of a repeated stamp.
  auto hi = std::upper_bound(est.begin(), est.end(), t,
                             [](double value, const TimedPose& p) { return value < p.t; });
  const TimedPose& a = *std::prev(hi);
  if (hi == est.end() || a.t == t) {
    return a.pose;
  }
  const TimedPose& b = *hi;
  const double u = (t - a.t) / (b.t - a.t);
  return {a.pose.x() + u * (b.pose.x() - a.pose.x()), a.pose.y() + u * (b.pose.y() - a.pose.y()),
          a.pose.theta() + u * angle_diff(b.pose.theta(), a.pose.theta())};
}

std::vector<ErrorSample> error_series(const std::vector<TimedPose>& ref,
                                      const std::vector<TimedPose>& est) {
  if (ref.empty() || est.empty()) {
    throw std::invalid_argument("error_series: empty series");
  }
  std::vector<ErrorSample> out;
  for (const TimedPose& r : ref) {
    if (r.t < est.front().t || r.t > est.back().t) {
      continue;
    }
    const Pose2D e = interpolate_pose(est, r.t);
    out.push_back({r.t, r.pose.x() - e.x(), r.pose.y() - e.y(),
                   angle_diff(r.pose.theta(), e.theta())});
  }
  if (out.empty()) {
    throw std::invalid_argument("error_series: reference and estimate do not overlap in time");
  }
  return out;
}

double rmse_position(const std::vector<ErrorSample>& series) {
  if (series.empty()) {
    throw std::invalid_argument("rmse_position: empty series");
  }
  double sum = 0.0;
  for (const ErrorSample& e : series) {
    sum += e.ex * e.ex + e.ey * e.ey;
  }
  return std::sqrt(sum / static_cast<double>(series.size()));
}

double rmse_heading(const std::vector<ErrorSample>& series) {
  if (series.empty()) {
    throw std::invalid_argument("rmse_heading: empty series");
  }
  double sum = 0.0;
  for (const ErrorSample& e : series) {
    sum += e.etheta * e.etheta;
  }
  return rad_to_deg(std::sqrt(sum / static_cast<double>(series.size())));
}

double rmse_position(const std::vector<TimedPose>& ref, const std::vector<TimedPose>& est) {
  return rmse_position(error_series(ref, est));
}

double rmse_heading(const std::vector<TimedPose>& ref, const std::vector<TimedPose>& est) {
  return rmse_heading(error_series(ref, est));
}

EvalReport make_report(std::vector<ErrorSample> series) {
  EvalReport r;
  r.rmse_position_m = rmse_position(series);
  r.rmse_heading_deg = rmse_heading(series);
  for (const ErrorSample& e : series) {
    r.max_err_x_m = std::max(r.max_err_x_m, std::abs(e.ex));
    r.max_err_y_m = std::max(r.max_err_y_m, std::abs(e.ey));
    r.max_err_heading_deg = std::max(r.max_err_heading_deg, rad_to_deg(std::abs(e.etheta)));
  }
  r.n_samples = series.size();
  r.series = std::move(series);
  return r;
}

EvalReport evaluate(const std::vector<TimedPose>& ref, const std::vector<TimedPose>& est) {
  return make_report(error_series(ref, est));
}

std::string report_json(const EvalReport& report) {
  nlohmann::json j;
  j["rmse_position_m"] = report.rmse_position_m;
  j["rmse_heading_deg"] = report.rmse_heading_deg;
  j["max_err_x_m"] = report.max_err_x_m;
  j["max_err_y_m"] = report.max_err_y_m;
  j["max_err_heading_deg"] = report.max_err_heading_deg;
  j["n_samples"] = report.n_samples;
  return j.dump(2);
}

}  // namespace ekfloc
