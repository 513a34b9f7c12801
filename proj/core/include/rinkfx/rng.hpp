#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace rinkfx {

/// Stable stream derivation: one master seed, one independent stream per
/// purpose, so adding a consumer never perturbs existing streams.
std::uint64_t derive_seed(std::uint64_t base, std::string_view purpose);

/// mt19937_64 with hand-rolled transforms instead of <random> distributions,
/// which are implementation-defined. Identical seeds give identical draws on
/// every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (no cached spare, two draws per value).
  double normal();

  /// Unbiased uniform integer in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace rinkfx
