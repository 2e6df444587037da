#pragma once

#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace slicegauss {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256** keyed by (seed, index). Every logical sample index owns an
// independent stream, so any partition of an index range across workers
// reproduces the single-threaded sequence.
class StreamEngine {
 public:
  using result_type = std::uint64_t;

  StreamEngine(std::uint64_t seed, std::uint64_t index) noexcept {
    std::uint64_t sm = seed;
    std::uint64_t key = splitmix64(sm);
    sm = key ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    for (auto& word : s_) word = splitmix64(sm);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

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

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Standard normal variates for one sample index (ziggurat via Boost.Random).
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t index) : engine_(seed, index) {}
  double operator()() { return dist_(engine_); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  StreamEngine engine_;
  boost::random::normal_distribution<double> dist_;
};

// Distinct purposes draw from decorrelated streams of the same user seed.
enum class StreamDomain : std::uint64_t {
  kSlice = 0x51,
  kGaussian = 0x6A,
  kPerturbation = 0x7F,
};

inline std::uint64_t domain_seed(std::uint64_t seed, StreamDomain domain) noexcept {
  std::uint64_t sm = seed ^ (static_cast<std::uint64_t>(domain) << 56);
  return splitmix64(sm);
}

}  // namespace slicegauss
