#include "ghostsim/experiment.hpp"

#include <cmath>
#include <stdexcept>

#include "ghostsim/rng.hpp"

namespace ghostsim {

SampleSummary summarize(const std::vector<double>& values) {
  SampleSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    s.std_error = s.stddev / std::sqrt(static_cast<double>(values.size()));
  }
  return s;
}

std::vector<ProtocolMeasurement> measure_protocols(
    const SourceParams& params, const TransmissionMap& scene,
    Eigen::Index frames, std::uint64_t seed,
    const std::vector<Protocol>& protocols, KSource k_source, int threads) {
  const auto mask_plus = plus_cells(scene);
  const auto mask_minus = minus_cells(scene);
  const auto [probe, reference] =
      simulate_pair(params, scene, frames, seed, threads);

  const SceneStats stats = scene_stats(scene);
  std::vector<ProtocolMeasurement> out;
  out.reserve(protocols.size());
  for (const Protocol protocol : protocols) {
    std::optional<double> k;
    if (protocol == Protocol::ODGI && k_source == KSource::Analytic) {
      k = analytic::k_opt(params, stats.t_bar);
    }
    const Reconstruction recon = reconstruct(probe, reference, protocol, k);
    const SnrReport report = measure_snr(recon, mask_plus, mask_minus);
    out.push_back({protocol, report.snr, recon.k_used});
  }
  return out;
}

std::vector<std::vector<double>> snr_over_seeds(
    const SourceParams& params, const TransmissionMap& scene,
    Eigen::Index frames, std::uint64_t master_seed, int seeds,
    const std::vector<Protocol>& protocols, KSource k_source, int threads) {
  if (seeds < 1) throw std::invalid_argument("need >= 1 seed");
  std::vector<std::vector<double>> snr(protocols.size());
  for (auto& column : snr) column.reserve(static_cast<std::size_t>(seeds));
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t seed =
        derive_seed(master_seed, static_cast<std::uint64_t>(s));
    const auto measured = measure_protocols(params, scene, frames, seed,
                                            protocols, k_source, threads);
    for (std::size_t p = 0; p < protocols.size(); ++p) {
      snr[p].push_back(measured[p].snr);
    }
  }
  return snr;
}

}  // namespace ghostsim
