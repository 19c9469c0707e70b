#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "painet/array.hpp"

namespace painet {

/// Seeded generator with hand-rolled distributions so that identical seeds
/// give bit-identical streams on every standard-conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() {
    return (gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (pairs cached).
  double gaussian();

  /// Uniform integer in [0, bound), rejection-sampled (bound > 0).
  std::uint64_t integer(std::uint64_t bound);

  /// In-place Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(integer(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  Array gaussian_array(Shape shape, double stddev = 1.0);
  Array uniform_array(Shape shape, double lo, double hi);

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace painet
