#pragma once

#include <cmath>
#include <cstdint>

namespace unmix::detail {

// splitmix64. Hand-rolled so generated data is identical across standard
// library implementations; std:: distributions do not guarantee that.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  std::uint64_t below(std::uint64_t n) noexcept { return next() % n; }

  // Box-Muller; the sine branch is discarded to keep the stream position
  // independent of call pairing.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t state_;
};

// Decorrelated stream for item `tag` under a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) noexcept {
  Rng mix(base ^ (0x9e3779b97f4a7c15ULL * (tag + 1)));
  return mix.next();
}

}  // namespace unmix::detail
