#pragma once

// Random shifted dyadic lattices over a finite scale window, with
// admissibility and (ε, r)-goodness.
//
// Level k has cubes of side λ·2^{-k}. Along each axis the level-k faces sit
// at λ·(o_k + 2^{-k}ℤ) with o_k = Σ_{m>k} ξ_m 2^{-m}. Bits ξ_m are stored for
// k_min < m <= k_max and for `tail_bits` further levels below k_max that
// stand in for the infinite tail of the shift sequence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "riesz2w/error.hpp"
#include "riesz2w/geometry.hpp"
#include "riesz2w/parallel.hpp"
#include "riesz2w/rng.hpp"

namespace riesz2w {

struct GridCube {
  int level = 0;
  std::vector<std::int64_t> index;

  friend bool operator==(const GridCube&, const GridCube&) = default;
  friend bool operator<(const GridCube& a, const GridCube& b) {
    if (a.level != b.level) return a.level < b.level;
    return a.index < b.index;
  }
};

struct GoodnessParams {
  double epsilon = 0.1;
  int r = 8;

  GoodnessParams() = default;
  GoodnessParams(double eps, int r_) : epsilon(eps), r(r_) { validate(); }

  void validate() const {
    require(epsilon > 0.0 && epsilon < 1.0, ErrorKind::input, "goodness requires 0 < epsilon < 1");
    require(r >= 1, ErrorKind::input, "goodness requires r >= 1");
  }
};

class ShiftedGrid {
 public:
  /// Random grid: every shift bit drawn from the seeded stream.
  ShiftedGrid(int dim, int k_min, int k_max, std::uint64_t seed, double lambda = 1.0)
      : dim_(dim), k_min_(k_min), k_max_(k_max), seed_(seed), lambda_(lambda) {
    validate();
    CounterRng rng(seed);
    bits_.assign(dim_, std::vector<std::uint8_t>(stored_levels(), 0));
    for (auto& axis : bits_)
      for (auto& b : axis) b = rng.bit() ? 1 : 0;
    build_offsets();
  }

  /// The standard lattice (all shift bits zero).
  static ShiftedGrid zero(int dim, int k_min, int k_max, double lambda = 1.0) {
    ShiftedGrid g;
    g.dim_ = dim;
    g.k_min_ = k_min;
    g.k_max_ = k_max;
    g.lambda_ = lambda;
    g.validate();
    g.bits_.assign(dim, std::vector<std::uint8_t>(g.stored_levels(), 0));
    g.build_offsets();
    return g;
  }

  /// Explicit bits, one string per axis, covering levels k_min+1 .. k_max+tail.
  static ShiftedGrid from_bits(int dim, int k_min, int k_max, const std::vector<std::string>& bits,
                               std::uint64_t seed = 0, double lambda = 1.0) {
    ShiftedGrid g;
    g.dim_ = dim;
    g.k_min_ = k_min;
    g.k_max_ = k_max;
    g.seed_ = seed;
    g.lambda_ = lambda;
    g.validate();
    require(static_cast<int>(bits.size()) == dim, ErrorKind::input, "grid: one bit string per axis");
    g.bits_.assign(dim, std::vector<std::uint8_t>(g.stored_levels(), 0));
    for (int a = 0; a < dim; ++a) {
      require(static_cast<int>(bits[a].size()) == g.stored_levels(), ErrorKind::input,
              "grid: bit string length must be " + std::to_string(g.stored_levels()));
      for (int i = 0; i < g.stored_levels(); ++i) {
        require(bits[a][i] == '0' || bits[a][i] == '1', ErrorKind::input, "grid: bits must be 0/1");
        g.bits_[a][i] = bits[a][i] == '1';
      }
    }
    g.build_offsets();
    return g;
  }

  int dim() const noexcept { return dim_; }
  int k_min() const noexcept { return k_min_; }
  int k_max() const noexcept { return k_max_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double lambda() const noexcept { return lambda_; }

  /// Extra random levels below k_max; chosen so that every face coordinate
  /// of magnitude up to 8·2^{-k_min} is an exact double.
  int tail_bits() const noexcept { return std::max(0, 49 - (k_max_ - k_min_)); }

  bool in_range(int level) const noexcept { return level >= k_min_ && level <= k_max_; }

  double side(int level) const { return lambda_ * std::ldexp(1.0, -level); }

  /// ξ_m for axis a; zero outside the stored levels.
  int bit(int axis, int level) const {
    const int i = level - (k_min_ + 1);
    if (i < 0 || i >= stored_levels()) return 0;
    return bits_[axis][i];
  }

  /// o_k in unscaled units.
  double offset(int axis, int level) const {
    check_level(level);
    return offsets_[axis][level - k_min_];
  }

  GridCube cube_containing(std::span<const double> x, int level) const {
    check_level(level);
    require(static_cast<int>(x.size()) == dim_, ErrorKind::dimension_mismatch,
            "grid: point dimension differs");
    GridCube c{level, std::vector<std::int64_t>(dim_)};
    for (int a = 0; a < dim_; ++a) {
      const double t = std::ldexp(x[a] / lambda_ - offsets_[a][level - k_min_], level);
      c.index[a] = static_cast<std::int64_t>(std::floor(t));
    }
    return c;
  }

  Cube cube(const GridCube& q) const {
    check_level(q.level);
    Point lo(dim_);
    for (int a = 0; a < dim_; ++a)
      lo[a] = lambda_ * (offsets_[a][q.level - k_min_] +
                         std::ldexp(static_cast<double>(q.index[a]), -q.level));
    return Cube::from_corner(std::move(lo), side(q.level));
  }

  GridCube parent(const GridCube& q) const {
    require(q.level - 1 >= k_min_, ErrorKind::range, "grid: parent outside the scale window");
    GridCube p{q.level - 1, std::vector<std::int64_t>(dim_)};
    for (int a = 0; a < dim_; ++a) {
      const std::int64_t t = q.index[a] - bit(a, q.level);
      p.index[a] = t >= 0 ? t / 2 : -((-t + 1) / 2);
    }
    return p;
  }

  GridCube ancestor(GridCube q, int level) const {
    require(level <= q.level, ErrorKind::range, "grid: ancestor level below the cube");
    while (q.level > level) q = parent(q);
    return q;
  }

  /// The 2^n children, in lexicographic bit order of the per-axis choice.
  std::vector<GridCube> children(const GridCube& q) const {
    require(q.level + 1 <= k_max_, ErrorKind::range, "grid: children outside the scale window");
    std::vector<GridCube> out;
    out.reserve(std::size_t{1} << dim_);
    for (unsigned mask = 0; mask < (1u << dim_); ++mask) {
      GridCube c{q.level + 1, std::vector<std::int64_t>(dim_)};
      for (int a = 0; a < dim_; ++a)
        c.index[a] = 2 * q.index[a] + bit(a, q.level + 1) + ((mask >> a) & 1u);
      out.push_back(std::move(c));
    }
    return out;
  }

  /// anc ⊇ desc within the lattice.
  bool is_ancestor(const GridCube& anc, const GridCube& desc) const {
    if (anc.level > desc.level) return false;
    return ancestor(desc, anc.level) == anc;
  }

  nlohmann::json to_json() const {
    std::vector<std::string> shift(dim_);
    for (int a = 0; a < dim_; ++a)
      for (auto b : bits_[a]) shift[a].push_back(b ? '1' : '0');
    return {{"seed", seed_},          {"dim", dim_},     {"k_min", k_min_},
            {"k_max", k_max_},        {"lambda", lambda_}, {"tail_bits", tail_bits()},
            {"shift_bits", shift}};
  }

  static ShiftedGrid from_json(const nlohmann::json& j) {
    try {
      return from_bits(j.at("dim").get<int>(), j.at("k_min").get<int>(), j.at("k_max").get<int>(),
                       j.at("shift_bits").get<std::vector<std::string>>(),
                       j.value("seed", std::uint64_t{0}), j.value("lambda", 1.0));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::input, std::string("grid descriptor: ") + e.what());
    }
  }

 private:
  ShiftedGrid() = default;

  int stored_levels() const { return k_max_ - k_min_ + tail_bits(); }

  void validate() const {
    require(dim_ >= 1, ErrorKind::input, "grid dimension must be positive");
    require(k_min_ < k_max_, ErrorKind::input, "grid scale range requires k_min < k_max");
    require(k_max_ - k_min_ <= 48, ErrorKind::input, "grid scale window wider than 48 levels");
    require(lambda_ >= 1.0 && lambda_ <= 2.0, ErrorKind::input, "grid dilation must lie in [1, 2]");
  }

  void check_level(int level) const {
    if (!in_range(level)) [[unlikely]]
      fail(ErrorKind::range, "grid: level " + std::to_string(level) + " outside window [" +
                                 std::to_string(k_min_) + ", " + std::to_string(k_max_) + "]");
  }

  void build_offsets() {
    offsets_.assign(dim_, std::vector<double>(k_max_ - k_min_ + 1, 0.0));
    const int last = k_max_ + tail_bits();
    for (int a = 0; a < dim_; ++a) {
      double o = 0.0;
      // Sum from the finest bit upward; every partial sum is exact.
      for (int m = last; m > k_min_; --m) {
        if (m <= k_max_) offsets_[a][m - k_min_] = o;
        if (bit(a, m)) o += std::ldexp(1.0, -m);
      }
      offsets_[a][0] = o;
    }
  }

  int dim_ = 1;
  int k_min_ = 0;
  int k_max_ = 1;
  std::uint64_t seed_ = 0;
  double lambda_ = 1.0;
  std::vector<std::vector<std::uint8_t>> bits_;
  std::vector<std::vector<double>> offsets_;
};

/// No atom lies on a face of any window cube. Faces of coarser levels are
/// faces of the finest level, so only k_max is checked.
inline bool is_admissible(const DiscreteMeasure& mu, const ShiftedGrid& grid) {
  require(mu.dim() == grid.dim(), ErrorKind::dimension_mismatch, "grid and measure dimensions differ");
  const int k = grid.k_max();
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (int a = 0; a < grid.dim(); ++a) {
      const double t = std::ldexp(mu.point(i)[a] / grid.lambda() - grid.offset(a, k), k);
      if (t == std::floor(t)) return false;
    }
  return true;
}

/// (ε, r)-goodness of a grid cube relative to every larger window cube J with
/// ℓ(J) > 2^r ℓ(I). Only ancestors of I need to be examined: a cube J not
/// containing I is no closer to I than the boundary of I's own ancestor at
/// J's level.
inline bool is_good(const GridCube& i, const ShiftedGrid& grid, const GoodnessParams& gp) {
  gp.validate();
  const Cube ci = grid.cube(i);
  const double li = ci.side();
  for (int kj = i.level - gp.r - 1; kj >= grid.k_min(); --kj) {
    const Cube cj = grid.cube(grid.ancestor(i, kj));
    const double lj = cj.side();
    if (boundary_distance(ci, cj) < std::pow(li, gp.epsilon) * std::pow(lj, 1.0 - gp.epsilon))
      return false;
  }
  return true;
}

/// Finest window cube holding every atom of μ, if any level does.
inline std::optional<GridCube> common_cube(const ShiftedGrid& grid, const DiscreteMeasure& mu) {
  require(mu.dim() == grid.dim(), ErrorKind::dimension_mismatch, "grid and measure dimensions differ");
  if (mu.empty()) return std::nullopt;
  for (int k = grid.k_max(); k >= grid.k_min(); --k) {
    const GridCube c = grid.cube_containing(mu.point(0), k);
    bool all = true;
    for (std::size_t i = 1; i < mu.size() && all; ++i) all = grid.cube_containing(mu.point(i), k) == c;
    if (all) return c;
  }
  return std::nullopt;
}

/// Window [k_min, k_min + span] whose coarsest cubes are 2^margin times
/// the enclosing cube of the given measures.
inline std::pair<int, int> auto_window(const Cube& enclosing, int margin = 12, int span = 40) {
  const int top = -static_cast<int>(std::ceil(std::log2(enclosing.side()))) - margin;
  return {top, top + span};
}

struct ProportionEstimate {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t trials = 0;
  std::size_t hits = 0;
};

/// Wilson score interval at 95%.
inline ProportionEstimate wilson(std::size_t hits, std::size_t trials) {
  ProportionEstimate e;
  e.trials = trials;
  e.hits = hits;
  if (trials == 0) return e;
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(trials);
  const double p = hits / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  e.value = p;
  e.ci_low = hits == 0 ? 0.0 : std::max(0.0, centre - half);
  e.ci_high = hits == trials ? 1.0 : std::min(1.0, centre + half);
  return e;
}

/// Monte-Carlo estimate of p_bad: the probability that the level-`window`
/// cube containing the origin is (ε, r)-bad in a random grid with window
/// [0, window]. Trial t uses grid seed derived from (seed, t), so estimates
/// for different r share their grids and are monotone in r.
inline ProportionEstimate p_bad_mc(const GoodnessParams& gp, int dim, std::size_t trials,
                                   std::uint64_t seed, int window = 32) {
  gp.validate();
  require(trials >= 1, ErrorKind::input, "p_bad_mc: trials must be positive");
  const CounterRng master(seed);
  const Point origin(dim, 0.0);
  const std::size_t bad = map_reduce(
      trials, 64, std::size_t{0},
      [&](std::size_t t) -> std::size_t {
        const ShiftedGrid g(dim, 0, window, master.derive(t)());
        return is_good(g.cube_containing(origin, window), g, gp) ? 0 : 1;
      },
      [](std::size_t a, std::size_t b) { return a + b; });
  return wilson(bad, trials);
}

}  // namespace riesz2w
