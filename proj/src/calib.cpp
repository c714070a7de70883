#include "ghostsim/calib.hpp"

#include <cmath>
#include <stdexcept>

namespace ghostsim {

namespace {

constexpr double kEtaLow = 1e-4;
constexpr double kEtaHigh = 1.0;
constexpr double kEtaTolerance = 1e-5;
constexpr int kMaxIterations = 200;
constexpr double kInvGolden = 0.61803398874989484820;  // 1/phi

}  // namespace

EtaEstimate estimate_eta_covariance(const FrameStack& probe,
                                    const FrameStack& reference,
                                    std::span<const Eigen::Index> unit_region,
                                    double modes, SourceKind kind) {
  if (kind != SourceKind::Twin) {
    throw std::invalid_argument(
        "covariance inversion recovers eta only for twin-beam data");
  }
  if (!(modes >= 1.0)) throw std::invalid_argument("modes must be >= 1");
  if (probe.frames() != reference.frames() ||
      probe.pixels() != reference.pixels()) {
    throw std::invalid_argument("probe and reference stacks are not aligned");
  }
  if (probe.frames() < 2) throw std::invalid_argument("need >= 2 frames");
  if (unit_region.size() < 50) {
    throw std::invalid_argument(
        "calibration region must contain >= 50 unit-transmission pixels");
  }

  const double norm = 1.0 / static_cast<double>(probe.frames() - 1);
  std::vector<double> per_pair;
  per_pair.reserve(unit_region.size());
  for (const Eigen::Index j : unit_region) {
    if (j < 0 || j >= probe.pixels()) {
      throw std::invalid_argument("calibration region out of bounds");
    }
    const auto p = probe.values.col(j);
    const auto r = reference.values.col(j);
    const double mp = p.mean();
    const double mr = r.mean();
    if (mr <= 0.0) {
      throw std::domain_error("reference pixel mean is <= 0");
    }
    const double cov =
        ((p.array() - mp) * (r.array() - mr)).sum() * norm;
    per_pair.push_back(cov / mr - mr / modes);
  }

  EtaEstimate est;
  est.pairs = static_cast<Eigen::Index>(per_pair.size());
  double sum = 0.0;
  for (const double v : per_pair) sum += v;
  est.eta_hat = sum / static_cast<double>(per_pair.size());
  double ss = 0.0;
  for (const double v : per_pair) {
    ss += (v - est.eta_hat) * (v - est.eta_hat);
  }
  const double n = static_cast<double>(per_pair.size());
  est.std_error = std::sqrt(ss / (n - 1.0) / n);
  return est;
}

double FitConfig::model(double x, double eta) const {
  SourceParams params;
  params.kind = kind;
  params.n2 = n2;
  params.modes = modes;
  params.eta = eta;
  params.delta_el = delta_el;
  if (curve == CurveKind::SnrVsEpsilon) {
    return analytic::snr(params, x, t_plus, t_minus, pixels, frames, protocol);
  }
  return analytic::snr(params, epsilon, t_plus, x, pixels, frames, protocol);
}

FitResult fit_eta(std::span<const FitPoint> points, const FitConfig& config) {
  if (points.size() < 3) {
    throw std::invalid_argument(
        "eta fit needs >= 3 points for an error estimate");
  }
  for (const auto& p : points) {
    if (!(p.sigma > 0.0)) {
      throw std::invalid_argument("every point needs sigma > 0");
    }
  }

  auto chi2 = [&](double eta) {
    double sum = 0.0;
    for (const auto& p : points) {
      const double r = (p.snr - config.model(p.x, eta)) / p.sigma;
      sum += r * r;
    }
    return sum;
  };

  // Golden-section minimization on [kEtaLow, kEtaHigh].
  double a = kEtaLow;
  double b = kEtaHigh;
  double x1 = b - kInvGolden * (b - a);
  double x2 = a + kInvGolden * (b - a);
  double f1 = chi2(x1);
  double f2 = chi2(x2);
  int iterations = 0;
  while (b - a > kEtaTolerance && iterations < kMaxIterations) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvGolden * (b - a);
      f1 = chi2(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvGolden * (b - a);
      f2 = chi2(x2);
    }
    ++iterations;
  }

  FitResult result;
  result.converged = (b - a) <= kEtaTolerance;
  result.eta_hat = 0.5 * (a + b);
  result.residual_sum = chi2(result.eta_hat);
  result.at_boundary = result.eta_hat < kEtaLow + 1e-3 ||
                       result.eta_hat > kEtaHigh - 1e-3;

  // 1-sigma from the curvature of the weighted residual: delta chi2 = 1.
  double h = 1e-3;
  double center = result.eta_hat;
  center = std::clamp(center, kEtaLow + h, kEtaHigh - h);
  const double second =
      (chi2(center + h) - 2.0 * chi2(center) + chi2(center - h)) / (h * h);
  result.std_error = second > 0.0 ? std::sqrt(2.0 / second)
                                  : std::numeric_limits<double>::quiet_NaN();

  result.band.reserve(points.size());
  for (const auto& p : points) {
    const double f = config.model(p.x, result.eta_hat);
    double half = 0.0;
    if (std::isfinite(result.std_error)) {
      const double up = std::min(result.eta_hat + result.std_error, kEtaHigh);
      const double dn = std::max(result.eta_hat - result.std_error, kEtaLow);
      half = std::max(std::abs(config.model(p.x, up) - f),
                      std::abs(config.model(p.x, dn) - f));
    }
    result.band.push_back({p.x, f, half});
  }
  return result;
}

}  // namespace ghostsim
