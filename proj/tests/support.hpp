#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

// Shared statistical helpers for the Monte-Carlo tests. Tolerances are
// expressed in standard errors estimated from the samples themselves, so
// heavy-tailed distributions get correspondingly wide bands.

namespace testsupport {

struct MomentSummary {
  double mean = 0.0;
  double var = 0.0;      // sample variance (n - 1)
  double se_mean = 0.0;  // standard error of the mean
  double se_var = 0.0;   // standard error of the variance estimate
  std::size_t n = 0;
};

inline MomentSummary summarize_moments(const std::vector<double>& xs) {
  MomentSummary s;
  s.n = xs.size();
  double sum = 0.0;
  for (const double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double m2 = 0.0;
  double m4 = 0.0;
  for (const double x : xs) {
    const double d = x - s.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  const double n = static_cast<double>(xs.size());
  s.var = m2 / (n - 1.0);
  m2 /= n;
  m4 /= n;
  s.se_mean = std::sqrt(s.var / n);
  // Var(s^2) ~ (m4 - m2^2) / n to first order.
  s.se_var = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  return s;
}

struct CovSummary {
  double cov = 0.0;
  double se = 0.0;
};

/// Sample covariance with an empirical standard error (the scatter of the
/// centered cross products).
inline CovSummary covariance_with_se(const std::vector<double>& xs,
                                     const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double p = (xs[i] - mx) * (ys[i] - my);
    sum += p;
    sum2 += p * p;
  }
  CovSummary c;
  c.cov = sum / (n - 1.0);
  const double mean_p = sum / n;
  c.se = std::sqrt(std::max(sum2 / n - mean_p * mean_p, 0.0) / n);
  return c;
}

inline double zscore(double estimate, double expected, double se) {
  return (estimate - expected) / se;
}

/// Chi-square of empirical counts against an exact log-pmf, merging bins
/// until each holds at least min_expected. Returns the statistic and the
/// bin count through out parameters.
inline double chisq_vs_log_pmf(const std::map<std::uint64_t, int>& counts,
                               const std::function<double(std::uint64_t)>&
                                   log_pmf,
                               std::uint64_t k_max, int n_samples,
                               double min_expected, int* bins_out) {
  double chi = 0.0;
  int bins = 0;
  double expected = 0.0;
  double observed = 0.0;
  for (std::uint64_t k = 0; k <= k_max; ++k) {
    expected += std::exp(log_pmf(k)) * n_samples;
    const auto it = counts.find(k);
    observed += it == counts.end() ? 0.0 : it->second;
    if (expected >= min_expected) {
      chi += (observed - expected) * (observed - expected) / expected;
      ++bins;
      expected = 0.0;
      observed = 0.0;
    }
  }
  if (expected > 0.5) {
    chi += (observed - expected) * (observed - expected) / expected;
    ++bins;
  }
  *bins_out = bins;
  return chi;
}

/// Loose acceptance threshold for a chi-square statistic: mean + 5 sigma.
inline double chisq_limit(int dof) {
  return dof + 5.0 * std::sqrt(2.0 * static_cast<double>(dof));
}

}  // namespace testsupport
