#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace lnmix {

// Philox 4x32-10 counter-based generator. A draw is a pure function of
// (key, counter), so independent streams are cheap and results do not
// depend on evaluation order or worker count.
struct Philox4x32 {
  static std::array<uint32_t, 4> block(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
    constexpr uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const uint64_t p0 = static_cast<uint64_t>(M0) * ctr[0];
      const uint64_t p1 = static_cast<uint64_t>(M1) * ctr[2];
      const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
      const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += W0;
      key[1] += W1;
    }
    return ctr;
  }
};

// One logical random stream, identified by (seed, stream id). Stream ids
// are assigned per gene so per-gene simulation is reproducible under any
// parallel schedule. Each 128-bit block yields two doubles.
class RandomStream {
 public:
  RandomStream(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

  // uniform in [0, 1), 53 random bits
  double uniform() {
    if (have_ == 0) refill();
    --have_;
    const uint64_t bits = word_[have_];
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  // uniform in (0, 1), safe as input to logs and quantile functions
  double uniform_open() {
    const double u = uniform();
    return u > 0.0 ? (u < 1.0 ? u : 1.0 - 0x1.0p-53) : 0x1.0p-53;
  }

  // standard normal via Box-Muller; consumes two uniforms per call
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  void refill() {
    const std::array<uint32_t, 4> ctr = {static_cast<uint32_t>(counter_), static_cast<uint32_t>(counter_ >> 32),
                                         static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)};
    const std::array<uint32_t, 2> key = {static_cast<uint32_t>(seed_), static_cast<uint32_t>(seed_ >> 32)};
    const auto out = Philox4x32::block(ctr, key);
    word_[0] = (static_cast<uint64_t>(out[0]) << 32) | out[1];
    word_[1] = (static_cast<uint64_t>(out[2]) << 32) | out[3];
    have_ = 2;
    ++counter_;
  }

  uint64_t seed_;
  uint64_t stream_;
  uint64_t counter_ = 0;
  uint64_t word_[2] = {0, 0};
  int have_ = 0;
};

}  // namespace lnmix
