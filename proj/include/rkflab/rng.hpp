#ifndef RKFLAB_RNG_HPP_
#define RKFLAB_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace rkflab {

// SplitMix64 finalizer; used to derive well-separated child seeds.
std::uint64_t mix64(std::uint64_t x);

// Deterministic child-seed derivation: folds each path element into the
// master seed through mix64. Identical (master, path) always yields the
// same seed, distinct paths yield unrelated streams.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

// Random stream with hand-rolled distributions. The mt19937_64 engine output
// is pinned by the C++ standard and every transform below is explicit, so a
// given seed produces the same draws on every platform and on every rerun.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : eng_(seed) {}

  static RandomStream derived(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return RandomStream(derive_seed(master, path));
  }

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform on [0,1) with 53 random bits.
  double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1]; never returns zero (safe under log and pow).
  double u01_open() {
    const double u = u01();
    return u > 0.0 ? u : 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  /// Standard normal via Box-Muller; the second draw of each pair is cached.
  double normal();

  double exponential() { return -std::log(u01_open()); }

  /// Gamma(shape, rate) via Marsaglia-Tsang, with the U^(1/shape) boost for
  /// shape < 1.
  double gamma(double shape, double rate);

 private:
  std::mt19937_64 eng_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace rkflab

#endif  // RKFLAB_RNG_HPP_
