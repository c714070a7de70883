#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>

#include "ghostsim/scene.hpp"

namespace ghostsim {

enum class SourceKind { Twin, Thermal };

/// Physical configuration of a correlated-beam source as seen by the
/// detector: mean detected photons per reference pixel per frame (n2),
/// spatio-temporal modes per pixel per frame (M), end-to-end channel
/// efficiency (eta) and detector read noise rms (delta_el).
struct SourceParams {
  SourceKind kind = SourceKind::Twin;
  double n2 = 0.0;
  double modes = 1.0;
  double eta = 1.0;
  double delta_el = 0.0;

  /// Detected photons per mode; the quantity deciding whether quantum
  /// correlation dominates the pair covariance.
  double brightness() const { return n2 / modes; }

  void validate() const;
};

/// Rescales params for a neutral filter of the given transmission placed on
/// the source path: eta and n2 shrink together, preserving the balance
/// between the arms.
SourceParams apply_extra_loss(SourceParams params, double loss_factor);

/// H frames of per-pixel detected signal for one channel, real-valued
/// after electronic noise. Frame h is row h; pixel j = y * width + x is
/// column j.
struct FrameStack {
  int width = 0;
  int height = 0;
  Eigen::MatrixXd values;  // frames x pixels

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index pixels() const { return values.cols(); }
};

/// Generates a correlated (probe, reference) stack pair over the scene.
///
/// Per pixel and frame, twin sources draw a shared pair count from the
/// multi-mode thermal law with mean n2 / eta and thin it independently
/// with probabilities (eta * t, eta); thermal sources draw a source count
/// with mean 2 n2 / eta and route photons multinomially with probabilities
/// (eta/2 * t, eta/2). Both then add read noise per channel. The resulting
/// ensemble means, variances and pair covariances match the source model
/// exactly for the given (n2, M, eta, delta_el, t).
///
/// threads == 0 uses default_thread_count(); results are bit-identical for
/// any worker count.
std::pair<FrameStack, FrameStack> simulate_pair(const SourceParams& params,
                                                const TransmissionMap& scene,
                                                Eigen::Index frames,
                                                std::uint64_t seed,
                                                int threads = 0);

}  // namespace ghostsim
