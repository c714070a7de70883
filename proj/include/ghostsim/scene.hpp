#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace ghostsim {

/// Object transmission map on the reconstruction pixel grid, one value per
/// resolution cell, stored row-major (cell j = y * width + x). Two-level
/// scenes additionally carry their construction levels so realized
/// occupation fractions can be recovered exactly.
struct TransmissionMap {
  int width = 0;
  int height = 0;
  Eigen::ArrayXd t;  // size width * height, each value in [0, 1]

  // Set for two-level scenes; NaN otherwise.
  double level_plus = std::numeric_limits<double>::quiet_NaN();
  double level_minus = std::numeric_limits<double>::quiet_NaN();

  Eigen::Index pixels() const { return t.size(); }
  bool two_level() const { return !std::isnan(level_minus); }
};

/// Scene statistics entering the closed-form predictions.
struct SceneStats {
  double t_bar = 0.0;   // mean transmission
  double t2_bar = 0.0;  // mean squared transmission
  bool binary = false;
  double epsilon = 0.0;  // realized fraction of cells at t_minus
  double t_plus = 0.0;
  double t_minus = 0.0;
};

enum class SceneLayout { LeftBlock, Rectangle };

/// Builds a two-level scene with round(epsilon * cells) cells at t_minus
/// (ties on .5 resolved downward) and the rest at t_plus. The realized
/// epsilon is recoverable through scene_stats(), which is what the SNR
/// formulas must use.
TransmissionMap make_binary_scene(int width, int height, double epsilon,
                                  double t_plus, double t_minus,
                                  SceneLayout layout = SceneLayout::LeftBlock);

/// Two-level scene from a PGM mask file: samples above half of maxval map
/// to t_plus (transparent), the rest to t_minus.
TransmissionMap scene_from_mask(const std::string& pgm_path, double t_plus,
                                double t_minus);

SceneStats scene_stats(const TransmissionMap& map);

/// Cell indices at the t_minus / t_plus level of a two-level scene; the
/// masks used by SNR measurements.
std::vector<Eigen::Index> minus_cells(const TransmissionMap& map);
std::vector<Eigen::Index> plus_cells(const TransmissionMap& map);

}  // namespace ghostsim
