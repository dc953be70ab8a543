#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace secperc {

// A (master, stream) pair identifies one reproducible random stream. Trials
// derive their stream from the trial index so parallel runs never share state.
struct Seed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;

  constexpr Seed substream(std::uint64_t s) const noexcept { return {master, s}; }
  friend constexpr bool operator==(const Seed&, const Seed&) = default;
};

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256** (Blackman & Vigna). The four state words are filled by
// SplitMix64 from the master seed perturbed by a SplitMix64 hash of the
// stream index.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(Seed seed) noexcept {
    std::uint64_t h = seed.stream ^ 0xD1B54A32D192ED03ULL;
    const std::uint64_t stream_hash = splitmix64(h);
    std::uint64_t sm = seed.master ^ stream_hash;
    for (auto& w : s_) w = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe to take the log of.
  double uniform_pos() noexcept { return 1.0 - uniform(); }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  double exponential() noexcept { return -std::log(uniform_pos()); }

  // Number of failures before the first success, success probability p.
  // One uniform per draw (inverse CDF).
  std::uint64_t geometric(double p) noexcept {
    if (p >= 1.0) return 0;
    const double k = std::floor(std::log(uniform_pos()) / std::log1p(-p));
    return k >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max()
                       : static_cast<std::uint64_t>(k);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

}  // namespace secperc
