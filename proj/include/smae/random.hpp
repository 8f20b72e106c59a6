#ifndef SMAE_RANDOM_HPP
#define SMAE_RANDOM_HPP

#include <array>
#include <cmath>
#include <cstdint>

#include "smae/common.hpp"

namespace smae {

// splitmix64 finalizer; used to derive independent stream ids from small
// integers (purpose tags, step numbers, sample ids).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
  return mix64(a ^ mix64(b ^ mix64(c)));
}

// Counter-based generator (Philox4x32-10). A (seed, stream) pair names an
// independent sequence; identical (seed, stream, call sequence) reproduces
// identical draws on every platform, which is what makes corpora, masking
// and augmentation bitwise replayable.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint32_t next_u32() {
    if (pos_ >= 4) refill();
    return block_[static_cast<std::size_t>(pos_++)];
  }

  std::uint64_t next_u64() {
    std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // [0, 1), 53-bit resolution
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw ParamError("uniform_index: n must be positive");
    std::size_t i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  // Box-Muller; the paired draw is cached so one call consumes one pair of
  // uniforms every other invocation.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * kPi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double exponential(double mean) {
    if (mean < 0) throw ParamError("exponential: mean must be >= 0");
    if (mean == 0) return 0.0;
    return -mean * std::log(1.0 - uniform());
  }

  // Marsaglia-Tsang squeeze for shape >= 1, boosted through shape+1 below 1.
  double gamma(double shape, double scale) {
    if (shape <= 0 || scale < 0) {
      throw ParamError("gamma: shape must be > 0 and scale >= 0");
    }
    if (scale == 0) return 0.0;
    if (shape < 1.0) {
      double u = 1.0 - uniform();  // (0, 1]
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0) continue;
      double v = t * t * t;
      double u = uniform();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
      if (u > 0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
        return d * v * scale;
      }
    }
  }

  double rayleigh(double sigma) {
    if (sigma < 0) throw ParamError("rayleigh: sigma must be >= 0");
    if (sigma == 0) return 0.0;
    return sigma * std::sqrt(-2.0 * std::log(1.0 - uniform()));
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                      std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
  }

  void refill() {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_),
        static_cast<std::uint32_t>(stream_ >> 32)};
    std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                        static_cast<std::uint32_t>(seed_ >> 32)};
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0, lo0, hi1, lo1;
      mulhilo(0xD2511F53u, ctr[0], hi0, lo0);
      mulhilo(0xCD9E8D57u, ctr[2], hi1, lo1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    block_ = ctr;
    pos_ = 0;
    ++counter_;
  }

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int pos_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace smae

#endif  // SMAE_RANDOM_HPP
