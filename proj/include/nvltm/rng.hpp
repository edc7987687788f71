#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace nvltm {

// SplitMix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Substream key: each (seed, source, block) triple maps to an independent
// generator state, so enabling one noise source never shifts another's draws
// and chunked synthesis is independent of worker layout.
inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t source,
                                    std::uint64_t block = 0) {
  std::uint64_t k = splitmix64(seed ^ splitmix64(source));
  return splitmix64(k ^ splitmix64(block + 0x51a9d3c7b2e6f401ull));
}

// Gaussian draws via Box-Muller on top of mt19937_64. std::normal_distribution
// is implementation-defined; this keeps traces bit-identical across toolchains.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

  double uniform() {
    // 53-bit mantissa uniform in [0,1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nvltm
