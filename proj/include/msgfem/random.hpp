#pragma once

#include <cstdint>
#include <random>

namespace msgfem {

/**
 * @brief Seeded generator used for every random quantity in the library.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Doubles are produced from the top 53 bits of each draw instead of
 * std::uniform_real_distribution, whose algorithm is implementation-defined,
 * so the same seed yields the same numbers on every toolchain.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) { return engine_() % n; }

private:
  std::mt19937_64 engine_;
};

} // namespace msgfem
