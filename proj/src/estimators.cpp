#include "ghostsim/estimators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace ghostsim {

namespace {

void check_aligned(const FrameStack& probe, const FrameStack& reference) {
  if (probe.width != reference.width || probe.height != reference.height ||
      probe.frames() != reference.frames()) {
    throw std::invalid_argument("probe and reference stacks are not aligned");
  }
}

void check_roi(const FrameStack& stack, std::span<const Eigen::Index> roi) {
  if (roi.empty()) throw std::invalid_argument("empty pixel region");
  for (const Eigen::Index j : roi) {
    if (j < 0 || j >= stack.pixels()) {
      throw std::invalid_argument("pixel region out of bounds");
    }
  }
}

struct SeriesStats {
  double mean = 0.0;
  double var = 0.0;  // sample variance, H - 1
};

SeriesStats series_stats(const Eigen::VectorXd& s) {
  SeriesStats st;
  const Eigen::Index h = s.size();
  st.mean = s.mean();
  st.var = (s.array() - st.mean).square().sum() / static_cast<double>(h - 1);
  return st;
}

/// Sufficient statistics for every k-weighted protocol on one region:
/// bucket series moments plus the per-pixel covariances of each bucket
/// with the reference pixels.
struct CrossStats {
  double mean_probe = 0.0;
  double mean_ref = 0.0;
  double var_probe = 0.0;
  double var_ref = 0.0;
  double cov = 0.0;
  Eigen::ArrayXd cov_probe_pix;  // sample Cov(N1, n2(x_j)) for j in region
  Eigen::ArrayXd cov_ref_pix;    // sample Cov(N2, n2(x_j))
};

CrossStats cross_stats(const FrameStack& probe, const FrameStack& reference,
                       std::span<const Eigen::Index> region) {
  const Eigen::Index h = probe.frames();
  const double norm = 1.0 / static_cast<double>(h - 1);

  Eigen::VectorXd n1 = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd n2 = Eigen::VectorXd::Zero(h);
  for (const Eigen::Index j : region) {
    n1 += probe.values.col(j);
    n2 += reference.values.col(j);
  }

  CrossStats cs;
  cs.mean_probe = n1.mean();
  cs.mean_ref = n2.mean();
  const Eigen::VectorXd a1 = n1.array() - cs.mean_probe;
  const Eigen::VectorXd a2 = n2.array() - cs.mean_ref;
  cs.var_probe = a1.squaredNorm() * norm;
  cs.var_ref = a2.squaredNorm() * norm;
  cs.cov = a1.dot(a2) * norm;

  // With centered bucket series the per-pixel mean term drops out exactly:
  // sum_h a_h y_hj = sum_h a_h (y_hj - ybar_j) since sum_h a_h = 0.
  const Eigen::Index n = static_cast<Eigen::Index>(region.size());
  cs.cov_probe_pix.resize(n);
  cs.cov_ref_pix.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto col = reference.values.col(region[static_cast<std::size_t>(i)]);
    cs.cov_probe_pix[i] = a1.dot(col) * norm;
    cs.cov_ref_pix[i] = a2.dot(col) * norm;
  }
  return cs;
}

double resolve_k(const CrossStats& cs, Protocol protocol,
                 std::optional<double> k) {
  switch (protocol) {
    case Protocol::GI:
      return 0.0;
    case Protocol::DGI:
      if (cs.mean_ref == 0.0) {
        throw std::domain_error("DGI undefined: reference bucket mean is 0");
      }
      return cs.mean_probe / cs.mean_ref;
    case Protocol::Sk:
      if (!k) throw std::invalid_argument("protocol Sk requires k");
      return *k;
    case Protocol::ODGI:
      if (k) return *k;
      if (cs.var_ref == 0.0) {
        throw std::domain_error("degenerate reference bucket: Var(N2) = 0");
      }
      return cs.cov / cs.var_ref;
  }
  throw std::logic_error("unknown protocol");
}

std::vector<Eigen::Index> all_pixels(const FrameStack& stack) {
  std::vector<Eigen::Index> roi(static_cast<std::size_t>(stack.pixels()));
  for (Eigen::Index j = 0; j < stack.pixels(); ++j) {
    roi[static_cast<std::size_t>(j)] = j;
  }
  return roi;
}

}  // namespace

Eigen::VectorXd bucket_series(const FrameStack& stack,
                              std::span<const Eigen::Index> roi) {
  check_roi(stack, roi);
  Eigen::VectorXd series = Eigen::VectorXd::Zero(stack.frames());
  for (const Eigen::Index j : roi) series += stack.values.col(j);
  return series;
}

double empirical_k(const FrameStack& probe, const FrameStack& reference) {
  check_aligned(probe, reference);
  if (probe.frames() < 2) throw std::invalid_argument("need >= 2 frames");
  const auto roi = all_pixels(probe);
  const Eigen::VectorXd n1 = bucket_series(probe, roi);
  const Eigen::VectorXd n2 = bucket_series(reference, roi);
  const SeriesStats s2 = series_stats(n2);
  if (s2.var == 0.0) {
    throw std::domain_error("degenerate reference bucket: Var(N2) = 0");
  }
  const double m1 = n1.mean();
  const double cov = (n1.array() - m1).matrix().dot(
                         (n2.array() - s2.mean).matrix()) /
                     static_cast<double>(n1.size() - 1);
  return cov / s2.var;
}

Reconstruction reconstruct(const FrameStack& probe,
                           const FrameStack& reference, Protocol protocol,
                           std::optional<double> k) {
  check_aligned(probe, reference);
  if (probe.frames() < 2) {
    throw std::invalid_argument(
        "reconstruction needs >= 2 frames (covariance undefined)");
  }
  const auto roi = all_pixels(probe);
  const CrossStats cs = cross_stats(probe, reference, roi);
  const double kk = resolve_k(cs, protocol, k);

  Reconstruction recon;
  recon.width = probe.width;
  recon.height = probe.height;
  recon.protocol = protocol;
  recon.k_used = kk;
  recon.frames_used = probe.frames();
  recon.tile_k = {kk};
  recon.values = cs.cov_probe_pix - kk * cs.cov_ref_pix;
  return recon;
}

Reconstruction tiled_reconstruct(const FrameStack& probe,
                                 const FrameStack& reference,
                                 Protocol protocol, int tile_rows,
                                 int tile_cols, std::optional<double> k) {
  check_aligned(probe, reference);
  if (probe.frames() < 2) {
    throw std::invalid_argument(
        "reconstruction needs >= 2 frames (covariance undefined)");
  }
  if (tile_rows < 1 || tile_cols < 1) {
    throw std::invalid_argument("tile grid must be at least 1x1");
  }
  const int base_h = probe.height / tile_rows;
  const int base_w = probe.width / tile_cols;
  if (base_h < 2 || base_w < 2) {
    throw std::invalid_argument("tiles smaller than 2x2 are rejected");
  }

  Reconstruction recon;
  recon.width = probe.width;
  recon.height = probe.height;
  recon.protocol = protocol;
  recon.frames_used = probe.frames();
  recon.tile_rows = tile_rows;
  recon.tile_cols = tile_cols;
  recon.values.resize(probe.pixels());

  for (int tr = 0; tr < tile_rows; ++tr) {
    const int y0 = tr * base_h;
    const int y1 = (tr == tile_rows - 1) ? probe.height : y0 + base_h;
    for (int tc = 0; tc < tile_cols; ++tc) {
      const int x0 = tc * base_w;
      const int x1 = (tc == tile_cols - 1) ? probe.width : x0 + base_w;
      std::vector<Eigen::Index> tile;
      tile.reserve(static_cast<std::size_t>(y1 - y0) * (x1 - x0));
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          tile.push_back(static_cast<Eigen::Index>(y) * probe.width + x);
        }
      }
      const CrossStats cs = cross_stats(probe, reference, tile);
      const double kk = resolve_k(cs, protocol, k);
      recon.tile_k.push_back(kk);
      const Eigen::ArrayXd s = cs.cov_probe_pix - kk * cs.cov_ref_pix;
      for (std::size_t i = 0; i < tile.size(); ++i) {
        recon.values[tile[i]] = s[static_cast<Eigen::Index>(i)];
      }
    }
  }
  recon.k_used = recon.tile_k.size() == 1
                     ? recon.tile_k.front()
                     : std::numeric_limits<double>::quiet_NaN();
  return recon;
}

SnrReport measure_snr(const Reconstruction& recon,
                      std::span<const Eigen::Index> mask_plus,
                      std::span<const Eigen::Index> mask_minus) {
  if (mask_plus.size() < 2 || mask_minus.size() < 2) {
    throw std::invalid_argument(
        "masks need >= 2 pixels each (variance undefined)");
  }
  std::unordered_set<Eigen::Index> seen;
  auto check_mask = [&](std::span<const Eigen::Index> mask) {
    for (const Eigen::Index j : mask) {
      if (j < 0 || j >= recon.values.size()) {
        throw std::invalid_argument("mask out of bounds");
      }
      if (!seen.insert(j).second) {
        throw std::invalid_argument("masks must be disjoint");
      }
    }
  };
  check_mask(mask_plus);
  check_mask(mask_minus);

  auto mask_stats = [&](std::span<const Eigen::Index> mask, double& mean,
                        double& var) {
    double sum = 0.0;
    for (const Eigen::Index j : mask) sum += recon.values[j];
    mean = sum / static_cast<double>(mask.size());
    double ss = 0.0;
    for (const Eigen::Index j : mask) {
      const double d = recon.values[j] - mean;
      ss += d * d;
    }
    var = ss / static_cast<double>(mask.size() - 1);
  };

  SnrReport report;
  report.n_plus = static_cast<Eigen::Index>(mask_plus.size());
  report.n_minus = static_cast<Eigen::Index>(mask_minus.size());
  mask_stats(mask_plus, report.mean_plus, report.var_plus);
  mask_stats(mask_minus, report.mean_minus, report.var_minus);
  const double pooled = report.var_plus + report.var_minus;
  if (pooled == 0.0) {
    report.degenerate = true;
    report.snr = std::numeric_limits<double>::infinity();
  } else {
    report.snr =
        std::abs(report.mean_plus - report.mean_minus) / std::sqrt(pooled);
  }
  return report;
}

NrfReport measure_nrf(const FrameStack& probe, const FrameStack& reference,
                      std::span<const Eigen::Index> region) {
  check_aligned(probe, reference);
  check_roi(probe, region);
  if (probe.frames() < 2) throw std::invalid_argument("need >= 2 frames");

  std::vector<double> per_pair;
  per_pair.reserve(region.size());
  for (const Eigen::Index j : region) {
    const Eigen::VectorXd diff = probe.values.col(j) - reference.values.col(j);
    const double mean_sum =
        probe.values.col(j).mean() + reference.values.col(j).mean();
    if (mean_sum <= 0.0) {
      throw std::domain_error("NRF undefined: mean photon sum is <= 0");
    }
    per_pair.push_back(series_stats(diff).var / mean_sum);
  }

  NrfReport report;
  report.pairs = static_cast<Eigen::Index>(per_pair.size());
  double sum = 0.0;
  for (const double v : per_pair) sum += v;
  report.nrf = sum / static_cast<double>(per_pair.size());
  if (per_pair.size() > 1) {
    double ss = 0.0;
    for (const double v : per_pair) ss += (v - report.nrf) * (v - report.nrf);
    const double n = static_cast<double>(per_pair.size());
    report.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return report;
}

}  // namespace ghostsim
