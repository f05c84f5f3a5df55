#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace tado {

std::uint64_t splitmix64(std::uint64_t x);

/// Seeded generator with platform-independent transforms. The standard
/// distributions are implementation-defined, so uniform and normal draws are
/// derived from the raw 64-bit engine output here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

  template <class T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

  /// Independent stream derived from this generator's seed lineage.
  Rng fork(std::uint64_t stream) { return Rng(next() ^ splitmix64(stream + 0x9e3779b97f4a7c15ULL)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tado
