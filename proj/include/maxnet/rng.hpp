#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace maxnet {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the stream identified by (master, n, run_seed, stream).
/// Depends on nothing else, so runs can execute in any order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t n,
                                    std::uint64_t run_seed,
                                    std::uint64_t stream = 0) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ n);
  h = mix64(h ^ run_seed);
  return mix64(h ^ stream);
}

/// Uniform on (0, 1]. Safe to take the log of.
inline double uniform_open0(Rng &rng) {
  // 53 random bits -> k/2^53 in [0,1); 1 - that is in (0,1].
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 1.0 - u;
}

/// Uniform on [0, 1).
inline double uniform01(Rng &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Geometric waiting time with support {1, 2, ...}: trials up to and
/// including the first success.
inline std::int64_t sample_geometric(double success, Rng &rng) {
  if (success >= 1.0) {
    return 1;
  }
  const double u = uniform_open0(rng);
  return 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log1p(-success)));
}

/// Number of failures before the first success when the per-trial failure
/// probability is exp(log_fail). Support {0, 1, ...}.
inline std::int64_t sample_failures(double log_fail, Rng &rng) {
  if (log_fail == 0.0) {
    return INT64_MAX;
  }
  if (log_fail == -INFINITY) {
    return 0;
  }
  const double u = uniform_open0(rng);
  const double g = std::floor(std::log(u) / log_fail);
  return g >= 9.0e18 ? INT64_MAX : static_cast<std::int64_t>(g);
}

} // namespace maxnet
