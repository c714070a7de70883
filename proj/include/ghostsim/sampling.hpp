#pragma once

#include <cstdint>
#include <utility>

#include "ghostsim/rng.hpp"

namespace ghostsim {

/// Photon-number statistics of a multi-mode thermal field integrated over
/// one pixel and one frame: M spatio-temporal modes, each with the same
/// mean occupation. The integrated count has mean mu = M * occupation and
/// variance mu * (1 + mu / M).
struct ModeStatistics {
  double mean_photons_per_mode = 0.0;
  double mode_count = 1.0;  // real-valued; can be as large as ~5e10

  ModeStatistics(double mean_per_mode, double modes);

  double mean() const { return mode_count * mean_photons_per_mode; }
  double variance() const {
    const double mu = mean();
    return mu * (1.0 + mean_photons_per_mode);
  }
};

/// Sampling regime crossovers. Below kPoissonRegimeBrightness photons per
/// mode the negative binomial is replaced by a Poisson law (relative moment
/// error < 1e-3); Poisson means above kGaussianPoissonMean use a rounded
/// Gaussian with continuity handling; binomials with more than
/// kExactBinomialMaxTrials trials switch to a clamped Gaussian when the
/// variance supports it.
constexpr double kPoissonRegimeBrightness = 1e-3;
constexpr double kGaussianPoissonMean = 1e5;
constexpr std::uint64_t kExactBinomialMaxTrials = 10000;

/// Standard normal variate (Box-Muller, no state carried between calls).
double sample_standard_normal(RngStream& rng);

/// Gamma variate with unit scale; requires shape >= 1 (Marsaglia-Tsang
/// squeeze method).
double sample_gamma(double shape, RngStream& rng);

/// Poisson variate. Knuth product below mean 10, Hoermann's PTRS
/// transformed rejection up to kGaussianPoissonMean, rounded Gaussian above.
std::uint64_t sample_poisson(double mean, RngStream& rng);

/// Binomial variate. Exact (CDF inversion or Hoermann's BTRD) for
/// n <= kExactBinomialMaxTrials; above that a continuity-corrected Gaussian
/// clamped to [0, n] when n p (1-p) >= 25, exact inversion otherwise (the
/// tiny-mean tail where a Gaussian would be invalid).
std::uint64_t sample_binomial(std::uint64_t trials, double p, RngStream& rng);

/// ln(k!) via table lookup below 1024 and a Stirling series above.
double log_factorial(std::uint64_t k);

/// Draws one multi-mode thermal count: negative binomial with shape
/// mode_count and mean mode_count * mean_photons_per_mode, realized as a
/// gamma-Poisson mixture. Deep in the low-brightness regime the gamma
/// mixing step is skipped (see kPoissonRegimeBrightness).
std::uint64_t sample_generated_count(const ModeStatistics& stats,
                                     RngStream& rng);

/// Thins a shared pair count into two conditionally independent binomials:
/// d1 ~ B(g, p1), d2 ~ B(g, p2). Over the compound law
/// Cov(d1, d2) = p1 p2 Var(g), the twin-beam covariance structure.
std::pair<std::uint64_t, std::uint64_t> thin_independent(std::uint64_t g,
                                                         double p1, double p2,
                                                         RngStream& rng);

/// Routes each of g source photons to arm 1 (probability q1), arm 2 (q2)
/// or loss (1 - q1 - q2); requires q1 + q2 <= 1. Over the compound law
/// Cov(d1, d2) = q1 q2 (Var(g) - E[g]), the split-thermal covariance
/// structure.
std::pair<std::uint64_t, std::uint64_t> thin_partition(std::uint64_t g,
                                                       double q1, double q2,
                                                       RngStream& rng);

/// CCD analog readout model: returns count + Gaussian read noise of rms
/// delta_el electrons. delta_el == 0 returns the count unchanged and
/// consumes no randomness.
double add_electronic_noise(double count, double delta_el, RngStream& rng);

}  // namespace ghostsim
