#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "riesz2w/riesz2w.hpp"

namespace riesz2w::testing {

/// Atoms uniform in [lo, hi)^n with masses uniform in [0.5, 1.5).
inline DiscreteMeasure random_measure(int n, std::size_t atoms, std::uint64_t seed, double lo = 0.0,
                                      double hi = 1.0) {
  CounterRng rng(seed);
  std::vector<double> c, m;
  for (std::size_t i = 0; i < atoms; ++i) {
    for (int a = 0; a < n; ++a) c.push_back(rng.uniform(lo, hi));
    m.push_back(rng.uniform(0.5, 1.5));
  }
  return DiscreteMeasure(n, std::move(c), std::move(m));
}

inline std::vector<double> random_values(std::size_t count, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
  CounterRng rng(seed);
  std::vector<double> v(count);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline double rel_err(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline DiscreteMeasure uniform_grid(int per_axis, double side = 1.0) {
  return lebesgue_sample(2, per_axis, Cube::from_corner({0.0, 0.0}, side));
}

}  // namespace riesz2w::testing
