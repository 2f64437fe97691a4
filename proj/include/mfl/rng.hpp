#pragma once

#include <cstdint>

namespace mfl {

// splitmix64: tiny deterministic generator. Used instead of <random> engines so
// that seeded runs are bit-identical across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Rejection-free multiply-shift; bias is negligible for
  // the n used here (n << 2^32) and the result is fully deterministic.
  std::uint64_t below(std::uint64_t n) {
    return (static_cast<unsigned __int128>(next()) * n) >> 64;
  }

 private:
  std::uint64_t state_;
};

}  // namespace mfl
