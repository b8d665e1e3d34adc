#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace bgd {

// Seeded random stream. Built on mt19937_64, whose output sequence is fixed by
// the standard; the derived draws below avoid std:: distributions so that
// results do not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::span<T> xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      std::swap(xs[i - 1], xs[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Mixes a sequence of words into one seed. Used to give every experiment cell
// an independent stream that does not move when the grid is extended.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

std::uint64_t double_bits(double x);

}  // namespace bgd
