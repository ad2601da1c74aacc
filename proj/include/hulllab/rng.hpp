#pragma once

#include <cstdint>
#include <limits>

#include "hulllab/linalg.hpp"

namespace hulllab {

/// Counter-based 64-bit generator.
///
/// Output k of a stream is the SplitMix64 finalizer applied to
/// key + k·γ, so a stream is fully described by its key and any output can
/// be recomputed without replaying the stream. `split(id)` derives an
/// independent child key; replication r of master seed s is
/// `CounterRng(s).split(r)` regardless of which thread runs it.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * kGamma); }

  CounterRng split(std::uint64_t id) const {
    CounterRng child(0);
    child.key_ = mix(key_ ^ mix(id + 0xbb67ae8584caa73bULL));
    child.counter_ = 0;
    return child;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1].
  double uniform_pos() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

  /// Standard normal via Box–Muller; the second variate is cached.
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Uniform point on S^{d-1} written into out[0..d).
void uniform_on_sphere(CounterRng& rng, Eigen::Index d, double* out);

Vec uniform_on_sphere(CounterRng& rng, Eigen::Index d);

}  // namespace hulllab
