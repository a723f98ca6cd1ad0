#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace medcal {

/// SplitMix64 step. Used to expand a 64-bit seed into generator state.
std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256** seeded from SplitMix64.
///
/// Every random decision in the toolkit goes through this class so that
/// selections are reproducible across implementations:
///   - state: four successive SplitMix64 outputs starting from
///     `seed ^ (stream * 0xD1B54A32D192ED03)`;
///   - uniform_below(n): rejection sampling, reject r < (2^64 - n) mod n,
///     return r mod n;
///   - uniform01(): (next() >> 11) * 2^-53;
///   - normal(): Box-Muller, u1 = 1 - uniform01(), u2 = uniform01(),
///     returns sqrt(-2 ln u1) cos(2 pi u2), no caching of the sine branch.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next();
  std::uint64_t uniform_below(std::uint64_t n);
  double uniform01();
  double normal();

  /// Index drawn with probability proportional to `weights[i]`. Returns
  /// weights.size() when the total weight is zero.
  std::size_t weighted_index(std::span<const double> weights);

 private:
  std::array<std::uint64_t, 4> state_{};
};

/// Fisher-Yates shuffle of 0..n-1, swapping from the highest position down:
/// for i = n-1 .. 1, j = uniform_below(i + 1), swap(a[i], a[j]).
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace medcal
