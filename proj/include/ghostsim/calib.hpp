#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "ghostsim/analytic.hpp"
#include "ghostsim/simulator.hpp"

namespace ghostsim {

/// Channel efficiency recovered from twin-beam data over a
/// unit-transmission region, with its pair-to-pair standard error.
struct EtaEstimate {
  double eta_hat = 0.0;
  double std_error = 0.0;
  Eigen::Index pairs = 0;
};

/// Inverts the twin-beam pair covariance over a t = 1 region:
/// eta_j = Cov(n1, n2) / mean(n2) - mean(n2) / M per pixel pair, averaged.
/// The mean(n2)/M term removes the classical excess-correlation bias,
/// which matters once n2/M is not negligible. Split-thermal data carries
/// no efficiency term separable this way and is rejected.
EtaEstimate estimate_eta_covariance(const FrameStack& probe,
                                    const FrameStack& reference,
                                    std::span<const Eigen::Index> unit_region,
                                    double modes, SourceKind kind);

/// One measured SNR point: abscissa (epsilon or t_minus), value, and its
/// standard error (> 0).
struct FitPoint {
  double x = 0.0;
  double snr = 0.0;
  double sigma = 1.0;
};

enum class CurveKind { SnrVsEpsilon, SnrVsTminus };

/// Everything held fixed while eta is fitted.
struct FitConfig {
  SourceKind kind = SourceKind::Twin;
  double n2 = 0.0;
  double modes = 1.0;
  double delta_el = 0.0;
  double pixels = 0.0;
  double frames = 0.0;
  Protocol protocol = Protocol::GI;
  CurveKind curve = CurveKind::SnrVsEpsilon;
  double t_plus = 1.0;
  double t_minus = 0.0;  // fixed level for SnrVsEpsilon curves
  double epsilon = 0.5;  // fixed fraction for SnrVsTminus curves

  /// Model SNR at abscissa x for a candidate efficiency.
  double model(double x, double eta) const;
};

struct FitResult {
  double eta_hat = 0.0;
  double std_error = 0.0;
  double residual_sum = 0.0;  // weighted squared residual at the minimum
  bool converged = false;
  bool at_boundary = false;
  /// Per input abscissa: {x, fitted curve value, 1-sigma half width}
  /// obtained by first-order propagation of std_error through the model.
  std::vector<std::array<double, 3>> band;
};

/// Weighted least squares for eta in (0, 1] via golden-section search on
/// the residual (tolerance 1e-5 in eta, at most 200 iterations); the
/// standard error comes from the local curvature of the residual.
FitResult fit_eta(std::span<const FitPoint> points, const FitConfig& config);

}  // namespace ghostsim
