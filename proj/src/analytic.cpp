#include "ghostsim/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace ghostsim::analytic {

namespace {

constexpr double kHighBrightnessFactor = 1e2;
constexpr double kLowBrightnessFactor = 1e-2;

/// n2^2 / M with the division first, keeping the term well-scaled for
/// mode counts around 5e10.
double excess_variance(const SourceParams& p) {
  return (p.n2 / p.modes) * p.n2;
}

void check_binary_scene(double epsilon, double t_plus, double t_minus) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument(
        "epsilon in {0, 1} leaves no contrast region; SNR is undefined");
  }
  if (!(t_minus >= 0.0 && t_minus <= t_plus && t_plus <= 1.0)) {
    throw std::invalid_argument("need 0 <= t_minus <= t_plus <= 1");
  }
}

SceneStats binary_stats(double epsilon, double t_plus, double t_minus) {
  SceneStats s;
  s.binary = true;
  s.epsilon = epsilon;
  s.t_plus = t_plus;
  s.t_minus = t_minus;
  s.t_bar = (1.0 - epsilon) * t_plus + epsilon * t_minus;
  s.t2_bar = (1.0 - epsilon) * t_plus * t_plus + epsilon * t_minus * t_minus;
  return s;
}

}  // namespace

Moments moments(const SourceParams& params, double t) {
  params.validate();
  Moments m;
  m.mean_ref = params.n2;
  m.mean_probe = params.n2 * t;
  const double noise2 = params.delta_el * params.delta_el;
  m.var_ref = params.n2 * (1.0 + params.brightness()) + noise2;
  m.var_probe = params.n2 * t * (1.0 + params.brightness() * t) + noise2;
  m.covariance = t * pair_covariance_t1(params);
  return m;
}

double pair_covariance_t1(const SourceParams& params) {
  const double shared = excess_variance(params);
  return params.kind == SourceKind::Twin ? shared + params.eta * params.n2
                                         : shared;
}

double reference_variance(const SourceParams& params) {
  return params.n2 * (1.0 + params.brightness()) +
         params.delta_el * params.delta_el;
}

double bucket_nk_variance(const SourceParams& params, const SceneStats& scene,
                          double pixels, double k) {
  const double noise2 = params.delta_el * params.delta_el;
  const double var_n1 =
      pixels * (params.n2 * scene.t_bar + excess_variance(params) * scene.t2_bar +
                noise2);
  const double var_n2 = pixels * reference_variance(params);
  const double cov = pixels * scene.t_bar * pair_covariance_t1(params);
  return var_n1 + k * k * var_n2 - 2.0 * k * cov;
}

double k_opt(const SourceParams& params, double t_bar) {
  if (!(t_bar >= 0.0 && t_bar <= 1.0)) {
    throw std::invalid_argument("t_bar must lie in [0, 1]");
  }
  return t_bar * pair_covariance_t1(params) / reference_variance(params);
}

Brightness k_opt_regime(const SourceParams& params) {
  const double b = params.brightness();
  if (b >= kHighBrightnessFactor) return Brightness::High;
  if (b <= kLowBrightnessFactor * params.eta) return Brightness::Low;
  return Brightness::General;
}

double k_opt_limit(const SourceParams& params, double t_bar,
                   Brightness regime) {
  switch (regime) {
    case Brightness::High:
      return t_bar;
    case Brightness::Low:
      return params.eta * params.n2 * t_bar /
             (params.n2 + params.delta_el * params.delta_el);
    case Brightness::General:
      break;
  }
  return k_opt(params, t_bar);
}

double protocol_k(const SourceParams& params, double t_bar, Protocol protocol,
                  std::optional<double> k) {
  switch (protocol) {
    case Protocol::GI:
      return 0.0;
    case Protocol::DGI:
      return t_bar;
    case Protocol::ODGI:
      return k ? *k : k_opt(params, t_bar);
    case Protocol::Sk:
      if (!k) throw std::invalid_argument("protocol Sk requires k");
      return *k;
  }
  throw std::logic_error("unknown protocol");
}

double signal_profile(const SourceParams& params, const SceneStats& scene,
                      double t_pixel, Protocol protocol,
                      std::optional<double> k) {
  const double kk = protocol_k(params, scene.t_bar, protocol, k);
  return t_pixel * pair_covariance_t1(params) -
         kk * reference_variance(params);
}

double snr(const SourceParams& params, double epsilon, double t_plus,
           double t_minus, double pixels, double frames, Protocol protocol,
           std::optional<double> k) {
  params.validate();
  check_binary_scene(epsilon, t_plus, t_minus);
  if (!(pixels >= 2.0)) throw std::invalid_argument("need >= 2 pixels");
  if (!(frames >= 2.0)) throw std::invalid_argument("need >= 2 frames");
  const SceneStats scene = binary_stats(epsilon, t_plus, t_minus);
  const double kk = protocol_k(params, scene.t_bar, protocol, k);
  const double signal = (t_plus - t_minus) * pair_covariance_t1(params);
  const double noise = 2.0 * bucket_nk_variance(params, scene, pixels, kk) *
                       reference_variance(params);
  return std::sqrt(frames) * signal / std::sqrt(noise);
}

SnrRatios snr_ratios(const SourceParams& params, double epsilon) {
  params.validate();
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  SnrRatios r;
  const double b = params.brightness();
  if (b * epsilon >= kHighBrightnessFactor) {
    r.regime = Brightness::High;
    r.dgi_over_gi = 1.0 / std::sqrt(epsilon);
    r.odgi_over_gi = r.dgi_over_gi;
  } else if (b <= kLowBrightnessFactor * params.eta) {
    r.regime = Brightness::Low;
    r.dgi_over_gi =
        1.0 / std::sqrt(2.0 * (params.eta - 0.5) * (epsilon - 1.0) + 1.0);
    r.odgi_over_gi =
        1.0 / std::sqrt(params.eta * params.eta * (epsilon - 1.0) + 1.0);
  } else {
    r.regime = Brightness::General;
    r.dgi_over_gi =
        snr_ratio_exact(params, epsilon, 1.0, 0.0, Protocol::DGI, Protocol::GI);
    r.odgi_over_gi = snr_ratio_exact(params, epsilon, 1.0, 0.0,
                                     Protocol::ODGI, Protocol::GI);
  }
  return r;
}

double snr_ratio_exact(const SourceParams& params, double epsilon,
                       double t_plus, double t_minus, Protocol numerator,
                       Protocol denominator) {
  check_binary_scene(epsilon, t_plus, t_minus);
  const SceneStats scene = binary_stats(epsilon, t_plus, t_minus);
  const double k_num = protocol_k(params, scene.t_bar, numerator);
  const double k_den = protocol_k(params, scene.t_bar, denominator);
  // The signal and the reference variance cancel in the quotient.
  return std::sqrt(bucket_nk_variance(params, scene, 1.0, k_den) /
                   bucket_nk_variance(params, scene, 1.0, k_num));
}

double nrf_prediction(const SourceParams& params, double t) {
  params.validate();
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("t must lie in [0, 1]");
  }
  const double noise2 = params.delta_el * params.delta_el;
  const double one_minus_t = 1.0 - t;
  double var_diff = params.n2 * (1.0 + t) +
                    excess_variance(params) * one_minus_t * one_minus_t +
                    2.0 * noise2;
  if (params.kind == SourceKind::Twin) {
    var_diff -= 2.0 * t * params.eta * params.n2;
  }
  return var_diff / (params.n2 * (1.0 + t));
}

}  // namespace ghostsim::analytic
