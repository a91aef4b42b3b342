#include "ekfloc/occupancy_grid.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <yaml-cpp/yaml.h>

namespace ekfloc {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Pose2D origin,
                             double occupied_threshold)
    : OccupancyGrid(width, height, resolution, origin, occupied_threshold,
                    std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                            static_cast<std::size_t>(std::max(height, 0)),
                                        0.0)) {}

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Pose2D origin,
                             double occupied_threshold, std::vector<double> cells)
    : width_(width),
      height_(height),
      resolution_(resolution),
      origin_(origin),
      occupied_threshold_(occupied_threshold),
      cells_(std::move(cells)) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("OccupancyGrid: width and height must be positive");
  }
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw std::invalid_argument("OccupancyGrid: resolution must be > 0");
  }
  if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("OccupancyGrid: cell count does not match width * height");
  }
}

OccupancyGrid OccupancyGrid::empty(double size_x, double size_y, double resolution,
                                   Pose2D origin) {
  const int w = static_cast<int>(std::ceil(size_x / resolution - 1e-9));
  const int h = static_cast<int>(std::ceil(size_y / resolution - 1e-9));
  return OccupancyGrid(w, h, resolution, origin);
}

void OccupancyGrid::set(int ix, int iy, double occupancy) {
  if (!in_bounds(ix, iy)) {
    throw std::out_of_range("OccupancyGrid::set: cell out of range");
  }
  cells_[index(ix, iy)] = occupancy;
}

Eigen::Vector2d OccupancyGrid::to_grid_frame(double wx, double wy) const {
  const double c = std::cos(origin_.theta());
  const double s = std::sin(origin_.theta());
  const double dx = wx - origin_.x();
  const double dy = wy - origin_.y();
  return {c * dx + s * dy, -s * dx + c * dy};
}

std::optional<CellIndex> OccupancyGrid::cell_of(double wx, double wy) const {
  const Eigen::Vector2d g = to_grid_frame(wx, wy) / resolution_;
  if (!g.allFinite()) {
    return std::nullopt;
  }
  const double fx = std::floor(g.x());
  const double fy = std::floor(g.y());
  if (fx < 0.0 || fy < 0.0 || fx >= width_ || fy >= height_) {
    return std::nullopt;
  }
  return CellIndex{static_cast<int>(fx), static_cast<int>(fy)};
}

bool OccupancyGrid::is_free(double wx, double wy) const {
  const auto cell = cell_of(wx, wy);
  return cell && !occupied(cell->ix, cell->iy);
}

void OccupancyGrid::fill_box(double x0, double y0, double x1, double y1, double occupancy) {
  for (int iy = 0; iy < height_; ++iy) {
    const double cy = (iy + 0.5) * resolution_;
    if (cy < y0 || cy > y1) {
      continue;
    }
    for (int ix = 0; ix < width_; ++ix) {
      const double cx = (ix + 0.5) * resolution_;
      if (cx >= x0 && cx <= x1) {
        cells_[index(ix, iy)] = occupancy;
      }
    }
  }
}

void OccupancyGrid::add_border_walls(double thickness) {
  const double sx = width_ * resolution_;
  const double sy = height_ * resolution_;
  fill_box(0.0, 0.0, sx, thickness);
  fill_box(0.0, sy - thickness, sx, sy);
  fill_box(0.0, 0.0, thickness, sy);
  fill_box(sx - thickness, 0.0, sx, sy);
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c = 0;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      if (!tok.empty()) {
        break;
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) {
        break;
      }
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int header_int(std::istream& in, const char* what) {
  const std::string tok = next_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) {
      throw std::invalid_argument(tok);
    }
    return v;
  } catch (const std::exception&) {
    throw MapFormatError(std::string("PGM: bad ") + what + " '" + tok + "'");
  }
}

template <typename T>
T meta_value(const YAML::Node& meta, const char* key) {
  if (!meta[key]) {
    throw MapFormatError(std::string("map metadata: missing key '") + key + "'");
  }
  try {
    return meta[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw MapFormatError(std::string("map metadata: bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

OccupancyGrid load_map(const std::filesystem::path& pgm_path,
                       const std::filesystem::path& meta_path) {
  YAML::Node meta;
  try {
    meta = YAML::LoadFile(meta_path.string());
  } catch (const YAML::Exception& e) {
    throw MapFormatError("map metadata: cannot read " + meta_path.string() + ": " + e.what());
  }
  if (!meta.IsMap()) {
    throw MapFormatError("map metadata: expected key/value pairs in " + meta_path.string());
  }
  const auto resolution = meta_value<double>(meta, "resolution");
  const Pose2D origin(meta_value<double>(meta, "origin_x"), meta_value<double>(meta, "origin_y"),
                      meta_value<double>(meta, "origin_theta"));
  const auto threshold = meta_value<double>(meta, "occupied_threshold");

  std::ifstream in(pgm_path, std::ios::binary);
  if (!in) {
    throw MapFormatError("PGM: cannot open " + pgm_path.string());
  }
  const std::string magic = next_token(in);
  if (magic != "P2" && magic != "P5") {
    throw MapFormatError("PGM: unsupported magic '" + magic + "'");
  }
  const int width = header_int(in, "width");
  const int height = header_int(in, "height");
  const int maxval = header_int(in, "maxval");
  if (maxval > 65535) {
    throw MapFormatError("PGM: maxval out of range");
  }

  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<int> pixels(n);
  if (magic == "P2") {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(in >> pixels[i])) {
        throw MapFormatError("PGM: pixel data shorter than " + std::to_string(width) + "x" +
                             std::to_string(height));
      }
    }
  } else {
    // next_token consumed the single whitespace byte after maxval.
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(n * static_cast<std::size_t>(bytes));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
      throw MapFormatError("PGM: pixel data shorter than " + std::to_string(width) + "x" +
                           std::to_string(height));
    }
    for (std::size_t i = 0; i < n; ++i) {
      pixels[i] = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
    }
  }

  std::vector<double> cells(n);
  for (int row = 0; row < height; ++row) {
    const int iy = height - 1 - row;
    for (int ix = 0; ix < width; ++ix) {
      const int p = pixels[static_cast<std::size_t>(row) * width + ix];
      if (p < 0 || p > maxval) {
        throw MapFormatError("PGM: pixel value exceeds maxval");
      }
      cells[static_cast<std::size_t>(iy) * width + ix] =
          static_cast<double>(maxval - p) / static_cast<double>(maxval);
    }
  }
  return OccupancyGrid(width, height, resolution, origin, threshold, std::move(cells));
}

void save_map(const OccupancyGrid& grid, const std::filesystem::path& pgm_path,
              const std::filesystem::path& meta_path) {
  std::ofstream out(pgm_path, std::ios::binary);
  if (!out) {
    throw MapFormatError("PGM: cannot write " + pgm_path.string());
  }
  out << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  for (int row = 0; row < grid.height(); ++row) {
    const int iy = grid.height() - 1 - row;
    for (int ix = 0; ix < grid.width(); ++ix) {
      const double occ = std::clamp(grid.at(ix, iy), 0.0, 1.0);
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround((1.0 - occ) * 255.0))));
    }
  }

  YAML::Emitter em;
  em.SetDoublePrecision(17);
  em << YAML::BeginMap;
  em << YAML::Key << "resolution" << YAML::Value << grid.resolution();
  em << YAML::Key << "origin_x" << YAML::Value << grid.origin().x();
  em << YAML::Key << "origin_y" << YAML::Value << grid.origin().y();
  em << YAML::Key << "origin_theta" << YAML::Value << grid.origin().theta();
  em << YAML::Key << "occupied_threshold" << YAML::Value << grid.occupied_threshold();
  em << YAML::EndMap;
  std::ofstream meta(meta_path);
  if (!meta) {
    throw MapFormatError("map metadata: cannot write " + meta_path.string());
  }
  meta << em.c_str() << '\n';
}

}  // namespace ekfloc
