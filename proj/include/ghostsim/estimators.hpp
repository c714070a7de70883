#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "ghostsim/analytic.hpp"
#include "ghostsim/simulator.hpp"

namespace ghostsim {

/// Per-pixel image produced by one reconstruction protocol, with the
/// weight that was actually applied. Tiled reconstructions additionally
/// record one weight per tile.
struct Reconstruction {
  int width = 0;
  int height = 0;
  Eigen::ArrayXd values;
  Protocol protocol = Protocol::GI;
  double k_used = 0.0;
  Eigen::Index frames_used = 0;
  int tile_rows = 1;
  int tile_cols = 1;
  std::vector<double> tile_k;
};

/// SNR of a two-level reconstruction measured by spatial statistics over
/// the two masks, |m+ - m-| / sqrt(v+ + v-). A reconstruction that is
/// constant over both masks has no noise scale; it is flagged degenerate
/// and the ratio reported as infinite.
struct SnrReport {
  double snr = 0.0;
  bool degenerate = false;
  double mean_plus = 0.0;
  double mean_minus = 0.0;
  double var_plus = 0.0;
  double var_minus = 0.0;
  Eigen::Index n_plus = 0;
  Eigen::Index n_minus = 0;
};

/// Noise reduction factor Var(n1 - n2) / <n1 + n2> averaged over
/// correlated pixel pairs, with its pair-to-pair standard error.
/// Values below one certify non-classical photon-number correlation.
struct NrfReport {
  double nrf = 0.0;
  double std_error = 0.0;
  Eigen::Index pairs = 0;

  bool nonclassical() const { return nrf + 3.0 * std_error < 1.0; }
};

/// Per-frame totals over a pixel region: the software bucket detector.
Eigen::VectorXd bucket_series(const FrameStack& stack,
                              std::span<const Eigen::Index> roi);

/// Sample Cov(N1, N2) / Var(N2) over frames; the measured noise-minimizing
/// bucket weight. In expectation it equals the closed-form k_opt.
double empirical_k(const FrameStack& probe, const FrameStack& reference);

/// Correlation reconstruction S(x_j) = sample Cov(N1 - k N2, n2(x_j)) with
/// sample covariances normalized by H - 1. The weight k is 0 for GI, the
/// ratio of bucket sample means for DGI, the supplied value for Sk, and
/// empirical_k (or the supplied override, e.g. a calibrated closed-form
/// value) for ODGI.
Reconstruction reconstruct(const FrameStack& probe,
                           const FrameStack& reference, Protocol protocol,
                           std::optional<double> k = std::nullopt);

/// Splits the grid into tile_rows x tile_cols rectangular tiles (remainder
/// cells going to the last row/column), applies the protocol to each tile
/// with buckets restricted to that tile, and stitches the results.
Reconstruction tiled_reconstruct(const FrameStack& probe,
                                 const FrameStack& reference,
                                 Protocol protocol, int tile_rows,
                                 int tile_cols,
                                 std::optional<double> k = std::nullopt);

SnrReport measure_snr(const Reconstruction& recon,
                      std::span<const Eigen::Index> mask_plus,
                      std::span<const Eigen::Index> mask_minus);

/// Measures the NRF over a region of unit transmission (the calibration
/// region where probe and reference pixels are directly comparable).
NrfReport measure_nrf(const FrameStack& probe, const FrameStack& reference,
                      std::span<const Eigen::Index> region);

}  // namespace ghostsim
