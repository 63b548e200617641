#pragma once

#include <cstdint>
#include <limits>

namespace sdid {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for stream `index` under `master`. Pure function of its arguments, so
/// replicate r gets the same stream whichever thread runs it and in whatever
/// order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

/// Counter-based generator: the k-th output is mix64(seed + k * golden gamma).
/// Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : counter_(seed) {}
  RandomStream(std::uint64_t master, std::uint64_t index)
      : counter_(derive_seed(master, index)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(counter_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased (Lemire's multiply-and-reject).
  std::uint64_t below(std::uint64_t n);

  double normal();
  double gamma(double shape);
  double student_t(double df);

 private:
  std::uint64_t counter_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sdid
