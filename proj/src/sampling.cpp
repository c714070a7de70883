#include "ghostsim/sampling.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ghostsim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kHalfLnTwoPi = 0.91893853320467274178032973640562;

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(name) +
                                " must lie in [0, 1], got " +
                                std::to_string(p));
  }
}

/// Stirling tail delta(k+1) = ln((k+1)!) - Stirling((k+1)), as used by BTRD.
double stirling_tail(std::uint64_t k) {
  static constexpr std::array<double, 10> kTable = {
      0.08106146679532726, 0.04134069595540929, 0.02767792568499834,
      0.02079067210376509, 0.01664469118982119, 0.01387612882307075,
      0.01189670994589177, 0.01041126526197209, 0.009255462182712733,
      0.008330563433362871};
  if (k < kTable.size()) return kTable[k];
  const double v = 1.0 / static_cast<double>(k + 1);
  const double v2 = v * v;
  return (1.0 / 12.0 - (1.0 / 360.0 - v2 / 1260.0) * v2) * v;
}

/// Knuth's product-of-uniforms method; cost grows linearly with the mean.
std::uint64_t poisson_knuth(double mean, RngStream& rng) {
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double prod = rng.uniform_pos();
  while (prod > limit) {
    prod *= rng.uniform_pos();
    ++k;
  }
  return k;
}

/// Hoermann's PTRS transformed rejection (W. Hoermann, "The transformed
/// rejection method for generating Poisson random variables", Insurance:
/// Mathematics and Economics 12, 1993). Exact for mean >= 10, O(1) cost.
std::uint64_t poisson_ptrs(double mean, RngStream& rng) {
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    const double u = rng.uniform01() - 0.5;
    double v = rng.uniform01();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const auto k = static_cast<std::uint64_t>(kf);
    const double lhs =
        std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = kf * log_mean - mean - log_factorial(k);
    if (lhs <= rhs) return k;
  }
}

/// CDF inversion by sequential search from zero; expected cost O(n p).
std::uint64_t binomial_inversion(std::uint64_t n, double p, RngStream& rng) {
  const double q_ratio = p / (1.0 - p);
  double pmf = std::exp(static_cast<double>(n) * std::log1p(-p));
  double cdf = pmf;
  const double u = rng.uniform01();
  std::uint64_t k = 0;
  while (u > cdf) {
    if (k >= n) return n;  // guards fp residue in the extreme tail
    ++k;
    pmf *= q_ratio * (static_cast<double>(n - k + 1) / static_cast<double>(k));
    cdf += pmf;
  }
  return k;
}

/// Hoermann's BTRD rejection for binomials (W. Hoermann, "The generation of
/// binomial random variates", J. Statistical Computation and Simulation 46,
/// 1993). Exact, O(1); requires p <= 0.5 and n p (1-p) >= 10.
std::uint64_t binomial_btrd(std::uint64_t n, double p, RngStream& rng) {
  const double nd = static_cast<double>(n);
  const double q = 1.0 - p;
  const double npq = nd * p * q;
  const double sqrt_npq = std::sqrt(npq);
  const double m = std::floor((nd + 1.0) * p);
  const double r = p / q;
  const double nr = (nd + 1.0) * r;
  const double b = 1.15 + 2.53 * sqrt_npq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nd * p + 0.5;
  const double alpha = (2.83 + 5.1 / b) * sqrt_npq;
  const double v_r = 0.92 - 4.2 / b;
  const double u_rv_r = 0.86 * v_r;
  for (;;) {
    double v = rng.uniform01();
    double u;
    if (v <= u_rv_r) {
      u = v / v_r - 0.43;
      const double us = 0.5 - std::abs(u);
      return static_cast<std::uint64_t>(
          std::floor((2.0 * a / us + b) * u + c));
    }
    if (v >= v_r) {
      u = rng.uniform01() - 0.5;
    } else {
      u = v / v_r - 0.93;
      u = (u < 0.0 ? -0.5 : 0.5) - u;
      v = rng.uniform01() * v_r;
    }
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + c);
    if (kf < 0.0 || kf > nd) continue;
    v = v * alpha / (a / (us * us) + b);
    const double km = std::abs(kf - m);
    if (km <= 15.0) {
      // Evaluate the pmf ratio by direct recursion around the mode.
      double f = 1.0;
      if (m < kf) {
        for (double i = m + 1.0; i <= kf; i += 1.0) f *= nr / i - r;
      } else if (m > kf) {
        for (double i = kf + 1.0; i <= m; i += 1.0) v *= nr / i - r;
      }
      if (v <= f) return static_cast<std::uint64_t>(kf);
      continue;
    }
    // Squeeze acceptance on the log scale, then the exact Stirling test.
    v = std::log(v);
    const double rho =
        (km / npq) * (((km / 3.0 + 0.625) * km + 1.0 / 6.0) / npq + 0.5);
    const double t = -km * km / (2.0 * npq);
    if (v < t - rho) return static_cast<std::uint64_t>(kf);
    if (v > t + rho) continue;
    const double nm = nd - m + 1.0;
    const double h = (m + 0.5) * std::log((m + 1.0) / (r * nm)) +
                     stirling_tail(static_cast<std::uint64_t>(m)) +
                     stirling_tail(static_cast<std::uint64_t>(nd - m));
    const double nk = nd - kf + 1.0;
    const double rhs = h + (nd + 1.0) * std::log(nm / nk) +
                       (kf + 0.5) * std::log(nk * r / (kf + 1.0)) -
                       stirling_tail(static_cast<std::uint64_t>(kf)) -
                       stirling_tail(static_cast<std::uint64_t>(nd - kf));
    if (v <= rhs) return static_cast<std::uint64_t>(kf);
  }
}

std::uint64_t binomial_p_le_half(std::uint64_t n, double p, RngStream& rng) {
  const double nd = static_cast<double>(n);
  const double mean = nd * p;
  if (n > kExactBinomialMaxTrials) {
    const double var = mean * (1.0 - p);
    if (var >= 25.0) {
      const double g = mean + std::sqrt(var) * sample_standard_normal(rng);
      if (g < 0.5) return 0;
      if (g > nd - 0.5) return n;
      return static_cast<std::uint64_t>(std::llround(g));
    }
    // Huge n with tiny mean: inversion stays cheap and exact.
    return binomial_inversion(n, p, rng);
  }
  if (mean <= 30.0) return binomial_inversion(n, p, rng);
  return binomial_btrd(n, p, rng);
}

}  // namespace

ModeStatistics::ModeStatistics(double mean_per_mode, double modes)
    : mean_photons_per_mode(mean_per_mode), mode_count(modes) {
  if (!(mean_photons_per_mode >= 0.0)) {
    throw std::invalid_argument("mean photons per mode must be >= 0");
  }
  if (!(mode_count >= 1.0)) {
    throw std::invalid_argument("mode count must be >= 1");
  }
}

double sample_standard_normal(RngStream& rng) {
  const double u1 = rng.uniform_pos();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double sample_gamma(double shape, RngStream& rng) {
  if (!(shape >= 1.0)) {
    throw std::invalid_argument("sample_gamma requires shape >= 1");
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = sample_standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::uint64_t sample_poisson(double mean, RngStream& rng) {
  if (!(mean >= 0.0)) {
    throw std::invalid_argument("Poisson mean must be >= 0");
  }
  if (mean == 0.0) return 0;
  if (mean < 10.0) return poisson_knuth(mean, rng);
  if (mean <= kGaussianPoissonMean) return poisson_ptrs(mean, rng);
  const double g = mean + std::sqrt(mean) * sample_standard_normal(rng);
  return g < 0.5 ? 0 : static_cast<std::uint64_t>(std::llround(g));
}

std::uint64_t sample_binomial(std::uint64_t trials, double p, RngStream& rng) {
  check_probability(p, "binomial p");
  if (trials == 0 || p == 0.0) return 0;
  if (p == 1.0) return trials;
  if (p > 0.5) return trials - binomial_p_le_half(trials, 1.0 - p, rng);
  return binomial_p_le_half(trials, p, rng);
}

double log_factorial(std::uint64_t k) {
  static const std::vector<double> table = [] {
    std::vector<double> t(1024);
    t[0] = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
      t[i] = t[i - 1] + std::log(static_cast<double>(i));
    }
    return t;
  }();
  if (k < table.size()) return table[k];
  const double x = static_cast<double>(k) + 1.0;
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return (x - 0.5) * std::log(x) - x + kHalfLnTwoPi +
         inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

std::uint64_t sample_generated_count(const ModeStatistics& stats,
                                     RngStream& rng) {
  const double mu = stats.mean();
  if (mu == 0.0) return 0;
  if (stats.mean_photons_per_mode <= kPoissonRegimeBrightness) {
    return sample_poisson(mu, rng);
  }
  const double lambda =
      sample_gamma(stats.mode_count, rng) * stats.mean_photons_per_mode;
  return sample_poisson(lambda, rng);
}

std::pair<std::uint64_t, std::uint64_t> thin_independent(std::uint64_t g,
                                                         double p1, double p2,
                                                         RngStream& rng) {
  check_probability(p1, "p1");
  check_probability(p2, "p2");
  const std::uint64_t d1 = sample_binomial(g, p1, rng);
  const std::uint64_t d2 = sample_binomial(g, p2, rng);
  return {d1, d2};
}

std::pair<std::uint64_t, std::uint64_t> thin_partition(std::uint64_t g,
                                                       double q1, double q2,
                                                       RngStream& rng) {
  check_probability(q1, "q1");
  check_probability(q2, "q2");
  if (q1 + q2 > 1.0 + 1e-12) {
    throw std::invalid_argument("thin_partition requires q1 + q2 <= 1");
  }
  const std::uint64_t d1 = sample_binomial(g, q1, rng);
  const std::uint64_t rest = g - d1;
  if (rest == 0 || q2 == 0.0) return {d1, 0};
  const double cond = q1 >= 1.0 ? 1.0 : std::min(1.0, q2 / (1.0 - q1));
  return {d1, sample_binomial(rest, cond, rng)};
}

double add_electronic_noise(double count, double delta_el, RngStream& rng) {
  if (!(delta_el >= 0.0)) {
    throw std::invalid_argument("delta_el must be >= 0");
  }
  if (delta_el == 0.0) return count;
  return count + delta_el * sample_standard_normal(rng);
}

}  // namespace ghostsim
