#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace riesz2w {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: output i of a stream is a pure function of
/// (key, i), so streams can be derived per trial and replayed independently
/// of scheduling. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed = 0) noexcept : key_(splitmix64(seed)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    return splitmix64(key_ ^ splitmix64(counter_++ + 0x632be59bd9b4e019ULL));
  }

  /// Independent child stream, e.g. one per Monte-Carlo trial.
  CounterRng derive(std::uint64_t stream) const noexcept {
    CounterRng child;
    child.key_ = splitmix64(key_ ^ splitmix64(stream ^ 0xd1b54a32d192ed03ULL));
    return child;
  }

  /// Uniform on [0,1) with 53 random bits. Platform independent, unlike
  /// std::uniform_real_distribution.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal by Box-Muller (one draw per call).
  double normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept {
    if (n <= 1) return 0;
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x = (*this)();
    while (x >= limit) x = (*this)();
    return x % n;
  }

  bool bit() noexcept { return ((*this)() >> 63) != 0; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace riesz2w
