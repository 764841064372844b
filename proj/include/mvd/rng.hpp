#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace mvd {

// Deterministic random streams.
//
// Every randomized routine in this library draws from an Rng that is
// instantiated from a 64-bit stream key. Keys are derived from a master
// seed by folding in purpose tags and indices (splittable-stream style):
//
//   auto s = RngStream::master(seed).fork("train").fork(n);
//   Rng rng = s.rng();
//
// Two streams with different derivation paths are statistically
// independent, and the same path always yields the same stream. This is
// what makes parallel generation bit-identical to serial generation:
// sample i uses fork(i) regardless of which worker computes it.

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x00000100000001b3ull;
  }
  return h;
}

inline std::uint64_t mix(std::uint64_t key, std::uint64_t salt) {
  std::uint64_t s = key ^ (salt + 0x9e3779b97f4a7c15ull);
  return splitmix64(s);
}

}  // namespace detail

// xoshiro256++ with Box-Muller normals. Value type, cheap to copy.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // Expand the 64-bit key into the full state via SplitMix64, as
    // recommended by the xoshiro authors.
    for (auto& word : state_) word = detail::splitmix64(seed);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; generates pairs, caches the second.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Derivation key for a family of independent streams.
struct RngStream {
  std::uint64_t key = 0;

  static RngStream master(std::uint64_t seed) { return RngStream{detail::mix(0, seed)}; }

  RngStream fork(std::string_view tag) const {
    return RngStream{detail::mix(key, detail::fnv1a64(tag))};
  }
  RngStream fork(std::uint64_t index) const { return RngStream{detail::mix(key, index)}; }

  Rng rng() const { return Rng(key); }
};

}  // namespace mvd
