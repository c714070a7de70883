#include "ghostsim/simulator.hpp"

#include <cmath>
#include <stdexcept>

#include "ghostsim/parallel.hpp"
#include "ghostsim/rng.hpp"
#include "ghostsim/sampling.hpp"

namespace ghostsim {

void SourceParams::validate() const {
  if (!(n2 > 0.0)) throw std::invalid_argument("n2 must be > 0");
  if (!(modes >= 1.0)) throw std::invalid_argument("modes must be >= 1");
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("eta must lie in (0, 1]");
  }
  if (!(delta_el >= 0.0)) throw std::invalid_argument("delta_el must be >= 0");
}

SourceParams apply_extra_loss(SourceParams params, double loss_factor) {
  if (!(loss_factor > 0.0 && loss_factor <= 1.0)) {
    throw std::invalid_argument("loss_factor must lie in (0, 1]");
  }
  params.eta *= loss_factor;
  params.n2 *= loss_factor;
  return params;
}

std::pair<FrameStack, FrameStack> simulate_pair(const SourceParams& params,
                                                const TransmissionMap& scene,
                                                Eigen::Index frames,
                                                std::uint64_t seed,
                                                int threads) {
  params.validate();
  if (frames < 1) throw std::invalid_argument("frame count must be >= 1");
  const Eigen::Index pixels = scene.pixels();
  if (pixels < 1) throw std::invalid_argument("scene is empty");
  if ((scene.t < 0.0).any() || (scene.t > 1.0).any()) {
    throw std::invalid_argument("transmission values must lie in [0, 1]");
  }

  const bool twin = params.kind == SourceKind::Twin;
  const double arm_prob = twin ? params.eta : params.eta / 2.0;
  if (!twin) {
    const double total = arm_prob * (1.0 + scene.t.maxCoeff());
    if (total > 1.0 + 1e-12) {
      throw std::invalid_argument(
          "thermal routing probabilities exceed 1; reduce eta");
    }
  }
  const ModeStatistics generated(params.n2 / (arm_prob * params.modes),
                                 params.modes);

  // Per-pixel thinning probability on the probe arm.
  Eigen::ArrayXd probe_prob = (arm_prob * scene.t).min(1.0);

  FrameStack probe;
  probe.width = scene.width;
  probe.height = scene.height;
  probe.values.resize(frames, pixels);
  FrameStack reference = probe;

  const bool noisy = params.delta_el > 0.0;
  const double delta_el = params.delta_el;

  parallel_for_chunks(
      frames, 256, threads,
      [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t h = begin; h < end; ++h) {
          for (Eigen::Index j = 0; j < pixels; ++j) {
            RngStream pair_rng(seed, static_cast<std::uint64_t>(h),
                               static_cast<std::uint64_t>(j),
                               RngChannel::PairSampling);
            const std::uint64_t g = sample_generated_count(generated, pair_rng);
            std::uint64_t d_probe;
            std::uint64_t d_ref;
            if (twin) {
              std::tie(d_probe, d_ref) =
                  thin_independent(g, probe_prob[j], arm_prob, pair_rng);
            } else {
              std::tie(d_probe, d_ref) =
                  thin_partition(g, probe_prob[j], arm_prob, pair_rng);
            }
            double vp = static_cast<double>(d_probe);
            double vr = static_cast<double>(d_ref);
            if (noisy) {
              RngStream probe_noise(seed, static_cast<std::uint64_t>(h),
                                    static_cast<std::uint64_t>(j),
                                    RngChannel::ProbeNoise);
              RngStream ref_noise(seed, static_cast<std::uint64_t>(h),
                                  static_cast<std::uint64_t>(j),
                                  RngChannel::ReferenceNoise);
              vp = add_electronic_noise(vp, delta_el, probe_noise);
              vr = add_electronic_noise(vr, delta_el, ref_noise);
            }
            probe.values(h, j) = vp;
            reference.values(h, j) = vr;
          }
        }
      });

  return {std::move(probe), std::move(reference)};
}

}  // namespace ghostsim
