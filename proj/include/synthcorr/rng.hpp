#pragma once

#include <cstdint>
#include <random>

namespace synthcorr {

/// SplitMix64 finalizer; used to hash seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of the independent stream for column `stream`:
/// splitmix64(seed XOR splitmix64(stream)).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Deterministic generator with fully specified output on every platform.
///
/// The engine is std::mt19937_64, whose sequence the C++ standard fixes.
/// The distributions are implemented here rather than taken from <random>
/// (whose algorithms are implementation-defined):
///   uniform01  top 53 bits of one engine word, scaled by 2^-53
///   below(k)   Lemire's multiply-shift with rejection, unbiased
///   normal     Marsaglia polar method, second variate cached
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  std::uint64_t below(std::uint64_t bound);
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace synthcorr
