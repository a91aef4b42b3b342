#include "ekfloc/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ekfloc {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  double span() const { return hi - lo; }
};

}  // namespace

std::string render_svg(const LineChart& chart, int width, int height) {
  constexpr double kLeft = 70.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 50.0;
  const double plot_w = width - kLeft - kRight;
  const double plot_h = height - kTop - kBottom;

  Range xr;
  Range yr;
  for (const PlotSeries& s : chart.series) {
    if (s.x.size() != s.y.size()) {
      throw std::invalid_argument("render_svg: series '" + s.label + "' has mismatched x/y");
    }
    for (double v : s.x) {
      xr.add(v);
    }
    for (double v : s.y) {
      yr.add(v);
    }
  }
  xr.finish();
  yr.finish();
  if (chart.equal_aspect) {
    const double scale = std::max(xr.span() / plot_w, yr.span() / plot_h);
    const double cx = 0.5 * (xr.lo + xr.hi);
    const double cy = 0.5 * (yr.lo + yr.hi);
    xr = {cx - 0.5 * scale * plot_w, cx + 0.5 * scale * plot_w};
    yr = {cy - 0.5 * scale * plot_h, cy + 0.5 * scale * plot_h};
  }
  auto px = [&](double x) { return kLeft + (x - xr.lo) / xr.span() * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - (y - yr.lo) / yr.span() * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << escape(chart.title) << "</text>\n";

  // Axes, ticks and grid.
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xr.lo + xr.span() * i / 5.0;
    const double yv = yr.lo + yr.span() * i / 5.0;
    svg << "<line x1=\"" << coord(px(xv)) << "\" y1=\"" << coord(kTop) << "\" x2=\""
        << coord(px(xv)) << "\" y2=\"" << coord(kTop + plot_h) << "\" stroke=\"#eee\"/>\n";
    svg << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(py(yv)) << "\" x2=\""
        << coord(kLeft + plot_w) << "\" y2=\"" << coord(py(yv)) << "\" stroke=\"#eee\"/>\n";
    svg << "<text x=\"" << coord(px(xv)) << "\" y=\"" << coord(kTop + plot_h + 16)
        << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    svg << "<text x=\"" << coord(kLeft - 6) << "\" y=\"" << coord(py(yv) + 4)
        << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
  svg << "<rect x=\"" << coord(kLeft) << "\" y=\"" << coord(kTop) << "\" width=\""
      << coord(plot_w) << "\" height=\"" << coord(plot_h)
      << "\" fill=\"none\" stroke=\"#333\"/>\n";
  svg << "<text x=\"" << coord(kLeft + plot_w / 2) << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">" << escape(chart.x_label) << "</text>\n";
  svg << "<text transform=\"translate(16," << coord(kTop + plot_h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(chart.y_label) << "</text>\n";
  svg << "</g>\n";

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const PlotSeries& s = chart.series[k];
    svg << "<polyline fill=\"none\" stroke=\"" << escape(s.color)
        << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        svg << coord(px(s.x[i])) << ',' << coord(py(s.y[i])) << ' ';
      }
    }
    svg << "\"/>\n";
    const double ly = kTop + 14 + 16.0 * static_cast<double>(k);
    svg << "<line x1=\"" << coord(kLeft + plot_w - 130) << "\" y1=\"" << coord(ly) << "\" x2=\""
        << coord(kLeft + plot_w - 110) << "\" y2=\"" << coord(ly) << "\" stroke=\""
        << escape(s.color) << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << coord(kLeft + plot_w - 104) << "\" y=\"" << coord(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_svg(const LineChart& chart, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << render_svg(chart);
}

}  // namespace ekfloc
