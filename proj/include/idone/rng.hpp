#pragma once

#include <cstdint>
#include <random>

namespace idone {

// Seeded random stream with platform-independent draws. std distributions are
// implementation-defined, so uniform/integer draws are derived from the raw
// 64-bit engine output directly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream derived from (seed, stream) through SplitMix64 mixing.
  static Rng Substream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1).
  double Uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }

  // Uniform integer on the closed range [lo, hi].
  std::int64_t UniformInt(std::int64_t lo, std::int64_t hi);

  bool Bernoulli(double p) { return Uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t SplitMix64(std::uint64_t x);

// Fixed substream ids. Problem noise lives on its own stream so solver
// decisions never shift the noise sequence.
namespace stream {
inline constexpr std::uint64_t kInitialPoint = 1;
inline constexpr std::uint64_t kSolver = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kInstance = 4;
}  // namespace stream

}  // namespace idone
