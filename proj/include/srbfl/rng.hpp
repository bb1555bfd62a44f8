#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace srbfl {

// Deterministic, platform-independent PRNG (splitmix64). std:: distributions
// are implementation-defined across standard libraries, so everything that
// must reproduce bit-exactly draws from this.
//
// Streams are derived by counter-based mixing of (seed, purpose, a, b), so
// adding a device or reordering draws for one purpose never perturbs the
// draws of another.
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  static Rng seeded(std::uint64_t seed) { return Rng(mix(seed ^ kInit)); }

  // Independent substream for (purpose, a, b).
  Rng stream(std::string_view purpose, std::uint64_t a = 0,
             std::uint64_t b = 0) const {
    std::uint64_t h = state_;
    for (char c : purpose) h = mix(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    h = mix(h ^ a);
    h = mix(h ^ b);
    return Rng(h);
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return scramble(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in {0, ..., n-1}; n must be > 0.
  std::uint64_t next_below(std::uint64_t n) {
    // Rejection sampling keeps the result unbiased and reproducible.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % n;
  }

  // Standard normal via Box-Muller; draws two uniforms per call.
  double next_normal() {
    double u1 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    // Fisher-Yates with our own index draws.
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

 private:
  static constexpr std::uint64_t kInit = 0x243F6A8885A308D3ULL;

  static std::uint64_t scramble(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t mix(std::uint64_t z) {
    return scramble(z + 0x9E3779B97F4A7C15ULL);
  }

  std::uint64_t state_;
};

}  // namespace srbfl
