#pragma once

#include <cstdint>
#include <initializer_list>

namespace qroute {

/// Stream tags that keep the external and internal phases independent.
enum class Stream : std::uint64_t {
  kExternal = 0x45585445524e414cULL,
  kSwap = 0x53574150ULL,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: every draw is a pure function of the seed and a
/// key tuple, so runs that visit the same keys see the same randomness no
/// matter how many other draws they make.
class KeyedRng {
 public:
  explicit KeyedRng(std::uint64_t seed) : seed_(seed), base_(splitmix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(Stream stream, std::initializer_list<std::uint64_t> key) const {
    std::uint64_t h = splitmix64(base_ ^ static_cast<std::uint64_t>(stream));
    for (std::uint64_t k : key) h = splitmix64(h ^ k);
    return h;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform(Stream stream, std::initializer_list<std::uint64_t> key) const {
    return static_cast<double>(bits(stream, key) >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p, Stream stream, std::initializer_list<std::uint64_t> key) const {
    return uniform(stream, key) < p;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t base_;
};

}  // namespace qroute
