#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace tailsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic seeded random stream. All draws go through explicit
/// formulas (no std::*_distribution) so a (seed) pair reproduces the exact
/// same byte sequence on every platform.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; two uniforms per draw.
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

/// Stream purposes keep the noise draws of a dispatch independent from its
/// runtime draw, so modes that sample runtimes at different moments still
/// consume identical noise sequences.
enum class StreamPurpose : std::uint64_t { Noise = 1, Runtime = 2 };

/// Derives the seed of the sub-stream owned by (client, dispatch, purpose).
/// Statistically independent streams; the same master seed yields the same
/// complete experiment regardless of host parallelism.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t client_id,
                                        std::uint64_t dispatch_index, StreamPurpose purpose) {
  std::uint64_t s = splitmix64(master_seed);
  s = splitmix64(s ^ splitmix64(client_id + 0x1000));
  s = splitmix64(s ^ splitmix64(dispatch_index + 0x2000));
  s = splitmix64(s ^ static_cast<std::uint64_t>(purpose));
  return s;
}

/// Factory for the per-client per-dispatch streams of one simulation run.
class StreamFactory {
 public:
  explicit StreamFactory(std::uint64_t master_seed) : master_(master_seed) {}

  RngStream noise_stream(int client_id, long dispatch_index) const {
    return RngStream(derive_stream_seed(master_, static_cast<std::uint64_t>(client_id),
                                        static_cast<std::uint64_t>(dispatch_index),
                                        StreamPurpose::Noise));
  }

  RngStream runtime_stream(int client_id, long dispatch_index) const {
    return RngStream(derive_stream_seed(master_, static_cast<std::uint64_t>(client_id),
                                        static_cast<std::uint64_t>(dispatch_index),
                                        StreamPurpose::Runtime));
  }

  std::uint64_t master_seed() const { return master_; }

 private:
  std::uint64_t master_;
};

}  // namespace tailsim
