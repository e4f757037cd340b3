#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vpem::rng {

/// splitmix64 finalizer; good avalanching for seed derivation.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Counter-based seed derivation: independent of scheduling, so grids can be
/// evaluated in any order or in parallel with reproducible streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view scenario_id,
                                 std::uint64_t grid_index) {
  return mix64(mix64(base ^ fnv1a64(scenario_id)) ^ grid_index);
}

/// Mean of n_shots i.i.d. +-1 outcomes with P(+1) = (1 + expectation)/2,
/// drawn as a single binomial — the same sampling distribution as per-shot
/// draws, at O(1) cost per mean.
double sample_outcome_mean(double expectation, long long n_shots, std::mt19937_64& gen);

}  // namespace vpem::rng
