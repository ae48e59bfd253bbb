#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace prpca {

// Draw purposes. Each (seed, rep, purpose) triple gets its own independent stream.
enum class Purpose : std::uint64_t {
  LowrankU = 1,
  LowrankV = 2,
  SparseSupport = 3,
  SparseValue = 4,
  Noise = 5,
  ImageNoise = 6,
  Test = 7,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Counter-based generator: draw i of a stream is splitmix64(key + i * golden), so any draw can be
// addressed directly and the output never depends on evaluation order.
// Uniforms use the top 53 bits; Gaussians use Box-Muller (cosine branch only) on draws 2i and 2i+1.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t rep, Purpose purpose)
      : key_(splitmix64(splitmix64(seed) ^ splitmix64(rep ^ (static_cast<std::uint64_t>(purpose) << 56)))) {}

  std::uint64_t bits(std::uint64_t i) const { return splitmix64(key_ + i * 0x9E3779B97F4A7C15ull); }

  // In [0, 1).
  double uniform(std::uint64_t i) const { return static_cast<double>(bits(i) >> 11) * 0x1.0p-53; }

  double gaussian(std::uint64_t i) const {
    const double u1 = 1.0 - uniform(2 * i);  // (0, 1]
    const double u2 = uniform(2 * i + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Sequential convenience API over the same addressable draws.
  double next_uniform() { return uniform(counter_++); }
  double next_gaussian() { return gaussian(counter_++); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace prpca
