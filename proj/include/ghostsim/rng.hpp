#pragma once

#include <array>
#include <cstdint>

namespace ghostsim {

/// Philox-4x32-10 keyed counter permutation (Salmon, Moraes, Dror, Shaw,
/// "Parallel random numbers: as easy as 1, 2, 3", SC'11).
///
/// Being a pure function of (counter, key), it gives every (frame, pixel,
/// channel) tuple its own independent stream with no per-stream state to
/// seed or skip ahead, which is what makes parallel frame generation
/// reproducible for any worker count.
namespace philox {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(kMult0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kMult1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace philox

/// Channel tags distinguishing the independent draw streams used per
/// (frame, pixel). Keeping electronic noise on its own channels means the
/// photon counts of a run do not change when only delta_el changes.
enum class RngChannel : std::uint32_t {
  PairSampling = 0,
  ProbeNoise = 1,
  ReferenceNoise = 2,
  Derive = 0xFFu,
};

/// One logical random stream, keyed by (seed, frame, pixel, channel).
/// Identical keys yield bit-identical sequences regardless of evaluation
/// order or degree of parallelism.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t frame, std::uint64_t pixel,
            RngChannel channel = RngChannel::PairSampling)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        frame_(static_cast<std::uint32_t>(frame)),
        pixel_(static_cast<std::uint32_t>(pixel)),
        channel_(static_cast<std::uint32_t>(channel)) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      buf_ = philox::block({block_++, frame_, pixel_, channel_}, key_);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t frame_;
  std::uint32_t pixel_;
  std::uint32_t channel_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
};

/// Derives a fresh 64-bit seed from a master seed and a tuple of indices
/// (sweep point, repetition, ...) so that sub-experiments get decorrelated,
/// reproducible seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  RngStream s(master, a, b, RngChannel::Derive);
  return s.next_u64();
}

}  // namespace ghostsim
