#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace cvse::num {

/// Seeded generator whose derived draws are identical on every platform.
///
/// std::mt19937_64 is bit-specified by the standard, but the standard
/// distributions are not, so uniform/normal/shuffle are implemented here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller (one draw per call, two uniforms consumed).
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Mixes a seed with a stream tag so sub-components get independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const void* data, std::size_t length, std::uint64_t state = 0xcbf29ce484222325ULL);

}  // namespace cvse::num
