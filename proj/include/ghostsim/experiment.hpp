#pragma once

#include <cstdint>
#include <vector>

#include "ghostsim/estimators.hpp"

namespace ghostsim {

/// Summary of repeated values: mean, seed-to-seed standard deviation and
/// the standard error of the mean.
struct SampleSummary {
  double mean = 0.0;
  double stddev = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

SampleSummary summarize(const std::vector<double>& values);

/// How the ODGI weight is obtained: measured from the data (needs no
/// calibration) or evaluated from calibrated source parameters.
enum class KSource { Empirical, Analytic };

/// One repetition of the simulate -> reconstruct -> measure pipeline for a
/// set of protocols on the same stack pair.
struct ProtocolMeasurement {
  Protocol protocol = Protocol::GI;
  double snr = 0.0;
  double k_used = 0.0;
};

/// Runs the full pipeline once and measures the SNR of every requested
/// protocol on the scene's own t+/t- masks.
std::vector<ProtocolMeasurement> measure_protocols(
    const SourceParams& params, const TransmissionMap& scene,
    Eigen::Index frames, std::uint64_t seed,
    const std::vector<Protocol>& protocols,
    KSource k_source = KSource::Empirical, int threads = 0);

/// Repeats measure_protocols over derived seeds; result indexed
/// [protocol][seed].
std::vector<std::vector<double>> snr_over_seeds(
    const SourceParams& params, const TransmissionMap& scene,
    Eigen::Index frames, std::uint64_t master_seed, int seeds,
    const std::vector<Protocol>& protocols,
    KSource k_source = KSource::Empirical, int threads = 0);

}  // namespace ghostsim
