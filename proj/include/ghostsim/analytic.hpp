#pragma once

#include <optional>

#include "ghostsim/scene.hpp"
#include "ghostsim/simulator.hpp"

namespace ghostsim {

enum class Protocol { GI, DGI, Sk, ODGI };

namespace analytic {

enum class Brightness { General, High, Low };

/// Per-pixel moments of the detected signals at object transmission t.
struct Moments {
  double mean_probe = 0.0;
  double mean_ref = 0.0;
  double var_probe = 0.0;
  double var_ref = 0.0;
  double covariance = 0.0;
};

Moments moments(const SourceParams& params, double t);

/// Pair covariance at unit transmission: n2^2/M + eta n2 for twin beams,
/// n2^2/M for split thermal light. The n2^2/M term is evaluated as
/// (n2/M) * n2 so extreme mode counts cannot underflow the sum.
double pair_covariance_t1(const SourceParams& params);

/// Per-pixel reference variance n2 (1 + n2/M) + delta_el^2.
double reference_variance(const SourceParams& params);

/// Variance of the weighted bucket N_k = N_1 - k N_2 over a scene with
/// the given statistics and pixel count.
double bucket_nk_variance(const SourceParams& params, const SceneStats& scene,
                          double pixels, double k);

/// Noise-minimizing bucket weight. Twin beams:
/// k = n2 (n2 + M eta) tbar / (n2^2 + M (n2 + delta_el^2)); the thermal
/// variant lacks the M eta term.
double k_opt(const SourceParams& params, double t_bar);

/// Which closed-form limit of k_opt applies: High for brightness >= 1e2
/// (k -> tbar), Low for brightness <= 1e-2 eta (k -> eta n2 tbar /
/// (n2 + delta_el^2)), General otherwise.
Brightness k_opt_regime(const SourceParams& params);
double k_opt_limit(const SourceParams& params, double t_bar,
                   Brightness regime);

/// Bucket weight implied by a protocol: 0 (GI), tbar (DGI), k_opt (ODGI),
/// or the supplied value (Sk).
double protocol_k(const SourceParams& params, double t_bar, Protocol protocol,
                  std::optional<double> k = std::nullopt);

/// Expected reconstruction value at a pixel of transmission t_pixel:
/// S_k = Cov(n1, n2) - k Var(n2).
double signal_profile(const SourceParams& params, const SceneStats& scene,
                      double t_pixel, Protocol protocol,
                      std::optional<double> k = std::nullopt);

/// Closed-form SNR of a reconstruction of a two-level object, assembled
/// from the per-pixel and bucket moments:
///   SNR = sqrt(H) (t+ - t-) C1 / sqrt(2 Var(N_k) Var(n2)).
/// For t+ = 1, t- = 0, delta_el = 0 and protocol GI this reduces exactly
/// to the known thermal/twin closed forms. Degenerate scenes
/// (epsilon 0 or 1) are rejected.
double snr(const SourceParams& params, double epsilon, double t_plus,
           double t_minus, double pixels, double frames, Protocol protocol,
           std::optional<double> k = std::nullopt);

/// Closed-form SNR ratios against conventional GI in the regime implied by
/// the source brightness. High brightness (brightness * epsilon >= 1e2):
/// both ratios equal 1/sqrt(epsilon). Low brightness (brightness <=
/// 1e-2 eta):
///   DGI/GI  = 1/sqrt(2 (eta - 1/2)(epsilon - 1) + 1)
///   ODGI/GI = 1/sqrt(eta^2 (epsilon - 1) + 1).
/// Between the two, the exact general-model quotient is returned.
struct SnrRatios {
  double dgi_over_gi = 0.0;
  double odgi_over_gi = 0.0;
  Brightness regime = Brightness::General;
};

SnrRatios snr_ratios(const SourceParams& params, double epsilon);

/// Exact general-model SNR quotient of two protocols on the same binary
/// scene (used to cross-check the regime formulas).
double snr_ratio_exact(const SourceParams& params, double epsilon,
                       double t_plus, double t_minus, Protocol numerator,
                       Protocol denominator);

/// Noise reduction factor Var(n1 - n2) / <n1 + n2> for a correlated pixel
/// pair at transmission t (default: the unit-transmission calibration
/// region). Twin beams at t = 1 give 1 - eta + delta_el^2 / n2; thermal
/// light never drops below 1.
double nrf_prediction(const SourceParams& params, double t = 1.0);

}  // namespace analytic
}  // namespace ghostsim
