#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>

namespace tark {

/// One splitmix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent stream seed from a master seed and a tuple of
/// indices, e.g. (master, method_index, trial).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts);

/// xoshiro256** generator seeded through splitmix64. Single owner; not
/// thread safe. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random mantissa bits.
  double uniform();
  /// Uniform index in [0, n), unbiased.
  std::size_t below(std::size_t n);
  /// Standard normal via Box-Muller (second variate cached).
  double normal();

 private:
  std::array<std::uint64_t, 4> s_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tark
