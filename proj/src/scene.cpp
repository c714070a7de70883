#include "ghostsim/scene.hpp"

#include <cmath>
#include <stdexcept>

#include "ghostsim/io.hpp"

namespace ghostsim {

namespace {

void check_level(double t, const char* name) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument(std::string(name) +
                                " must lie in [0, 1], got " +
                                std::to_string(t));
  }
}

/// Nearest integer with exact .5 ties resolved downward.
Eigen::Index round_half_down(double x) {
  return static_cast<Eigen::Index>(std::ceil(x - 0.5));
}

}  // namespace

TransmissionMap make_binary_scene(int width, int height, double epsilon,
                                  double t_plus, double t_minus,
                                  SceneLayout layout) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("scene dimensions must be >= 1");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1]");
  }
  check_level(t_plus, "t_plus");
  check_level(t_minus, "t_minus");
  if (t_minus > t_plus) {
    throw std::invalid_argument("t_minus must not exceed t_plus");
  }

  const Eigen::Index cells = static_cast<Eigen::Index>(width) * height;
  Eigen::Index occupied = round_half_down(epsilon * static_cast<double>(cells));
  occupied = std::clamp<Eigen::Index>(occupied, 0, cells);

  TransmissionMap map;
  map.width = width;
  map.height = height;
  map.level_plus = t_plus;
  map.level_minus = t_minus;
  map.t = Eigen::ArrayXd::Constant(cells, t_plus);

  auto set_minus = [&](Eigen::Index x, Eigen::Index y) {
    map.t[y * width + x] = t_minus;
  };

  if (layout == SceneLayout::LeftBlock) {
    // Fill whole columns from the left edge, partial column top-down.
    Eigen::Index placed = 0;
    for (Eigen::Index x = 0; x < width && placed < occupied; ++x) {
      for (Eigen::Index y = 0; y < height && placed < occupied; ++y) {
        set_minus(x, y);
        ++placed;
      }
    }
  } else {
    // Centered block whose aspect follows the grid, row-major fill so the
    // cell count is exact.
    if (occupied > 0) {
      const double aspect = static_cast<double>(width) / height;
      Eigen::Index rect_w = static_cast<Eigen::Index>(
          std::ceil(std::sqrt(static_cast<double>(occupied) * aspect)));
      rect_w = std::clamp<Eigen::Index>(rect_w, 1, width);
      Eigen::Index rect_h = (occupied + rect_w - 1) / rect_w;
      if (rect_h > height) {
        rect_h = height;
        rect_w = (occupied + rect_h - 1) / rect_h;
      }
      const Eigen::Index x0 = (width - rect_w) / 2;
      const Eigen::Index y0 = (height - rect_h) / 2;
      Eigen::Index placed = 0;
      for (Eigen::Index dy = 0; dy < rect_h && placed < occupied; ++dy) {
        for (Eigen::Index dx = 0; dx < rect_w && placed < occupied; ++dx) {
          set_minus(x0 + dx, y0 + dy);
          ++placed;
        }
      }
    }
  }
  return map;
}

TransmissionMap scene_from_mask(const std::string& pgm_path, double t_plus,
                                double t_minus) {
  check_level(t_plus, "t_plus");
  check_level(t_minus, "t_minus");
  if (t_minus > t_plus) {
    throw std::invalid_argument("t_minus must not exceed t_plus");
  }
  const io::PgmImage img = io::read_pgm(pgm_path);
  TransmissionMap map;
  map.width = img.width;
  map.height = img.height;
  map.level_plus = t_plus;
  map.level_minus = t_minus;
  map.t.resize(static_cast<Eigen::Index>(img.width) * img.height);
  const int threshold = img.maxval / 2;
  for (Eigen::Index j = 0; j < map.t.size(); ++j) {
    map.t[j] = img.samples[static_cast<std::size_t>(j)] > threshold ? t_plus
                                                                    : t_minus;
  }
  return map;
}

SceneStats scene_stats(const TransmissionMap& map) {
  if (map.pixels() < 1) {
    throw std::invalid_argument("transmission map is empty");
  }
  if ((map.t < 0.0).any() || (map.t > 1.0).any()) {
    throw std::invalid_argument("transmission values must lie in [0, 1]");
  }
  SceneStats stats;
  const double n = static_cast<double>(map.pixels());
  stats.t_bar = map.t.sum() / n;
  stats.t2_bar = map.t.square().sum() / n;
  if (map.two_level()) {
    stats.binary = true;
    stats.t_plus = map.level_plus;
    stats.t_minus = map.level_minus;
    stats.epsilon = static_cast<double>((map.t == map.level_minus).count()) / n;
  }
  return stats;
}

std::vector<Eigen::Index> minus_cells(const TransmissionMap& map) {
  if (!map.two_level()) {
    throw std::invalid_argument("minus_cells requires a two-level scene");
  }
  std::vector<Eigen::Index> cells;
  for (Eigen::Index j = 0; j < map.t.size(); ++j) {
    if (map.t[j] == map.level_minus) cells.push_back(j);
  }
  return cells;
}

std::vector<Eigen::Index> plus_cells(const TransmissionMap& map) {
  if (!map.two_level()) {
    throw std::invalid_argument("plus_cells requires a two-level scene");
  }
  std::vector<Eigen::Index> cells;
  for (Eigen::Index j = 0; j < map.t.size(); ++j) {
    if (map.t[j] != map.level_minus) cells.push_back(j);
  }
  return cells;
}

}  // namespace ghostsim
