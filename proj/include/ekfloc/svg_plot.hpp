#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ekfloc {

struct PlotSeries {
  std::string label;
  std::string color;  // any SVG color
  std::vector<double> x;
  std::vector<double> y;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  /// Same scale on both axes (for x-y trajectory plots).
  bool equal_aspect = false;
};

/// Renders a chart as a standalone SVG document.
std::string render_svg(const LineChart& chart, int width = 800, int height = 500);

void write_svg(const LineChart& chart, const std::filesystem::path& path);

}  // namespace ekfloc
