#pragma once

// Martingale (Haar) decomposition of a vector-valued function against a
// discrete measure and a shifted dyadic grid, and its good/bad projections.

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "riesz2w/grid.hpp"

namespace riesz2w {

/// A mass-carrying child of a splitting cube. Its atoms occupy
/// order()[begin, end) of the owning decomposition.
struct HaarChild {
  GridCube cube;
  std::size_t begin = 0, end = 0;
  double mass = 0.0;
  std::vector<double> average;
};

/// A cube with at least two mass-carrying children; all other cubes have
/// Δ_Q f = 0 and are not stored.
struct HaarCell {
  GridCube cube;
  std::size_t begin = 0, end = 0;
  double mass = 0.0;
  std::vector<double> average;
  std::vector<HaarChild> children;
  std::vector<double> diff_norm2;  ///< ‖Δ_Q f_c‖² per component
  int parent = -1;                 ///< nearest splitting ancestor, -1 at the top

  double total_diff_norm2() const {
    return std::accumulate(diff_norm2.begin(), diff_norm2.end(), 0.0);
  }
};

class HaarCoefficients {
 public:
  const GridCube& root() const noexcept { return root_; }
  const Cube& root_cube() const noexcept { return root_cube_; }
  int components() const noexcept { return comps_; }
  double root_mass() const noexcept { return root_mass_; }
  const std::vector<double>& coarse_average() const noexcept { return coarse_; }
  const std::vector<HaarCell>& cells() const noexcept { return cells_; }
  const std::vector<std::size_t>& order() const noexcept { return order_; }
  std::size_t atom_count() const noexcept { return order_.size(); }

  /// Masses and values of the atoms, indexed like the decomposed measure.
  double mass(std::size_t atom) const { return masses_[atom]; }
  double value(std::size_t atom, int comp) const { return values_[atom * comps_ + comp]; }

  /// ‖f‖²_σ summed over components.
  double norm2() const {
    double s = 0.0;
    for (std::size_t i = 0; i < masses_.size(); ++i)
      for (int c = 0; c < comps_; ++c) s += masses_[i] * values_[i * comps_ + c] * values_[i * comps_ + c];
    return s;
  }

  double sum_diff_norm2() const {
    double s = 0.0;
    for (const auto& c : cells_) s += c.total_diff_norm2();
    return s;
  }

  /// [f]²·σ(root) summed over components.
  double coarse_norm2() const {
    double s = 0.0;
    for (double a : coarse_) s += a * a * root_mass_;
    return s;
  }

  /// Σ over the listed cells of Δ_Q f, evaluated at every atom (atom-major,
  /// `components()` values per atom).
  std::vector<double> partial_sum(std::span<const std::size_t> cell_ids) const {
    std::vector<double> out(masses_.size() * comps_, 0.0);
    for (std::size_t id : cell_ids) add_difference(id, out);
    return out;
  }

  /// Δ_Q f for one cell at every atom.
  std::vector<double> difference(std::size_t cell_id) const {
    std::vector<double> out(masses_.size() * comps_, 0.0);
    add_difference(cell_id, out);
    return out;
  }

  /// [f]_root + Σ_Q Δ_Q f at every atom.
  std::vector<double> reconstruct() const {
    std::vector<std::size_t> all(cells_.size());
    std::iota(all.begin(), all.end(), 0);
    std::vector<double> out = partial_sum(all);
    for (std::size_t i = 0; i < masses_.size(); ++i)
      for (int c = 0; c < comps_; ++c) out[i * comps_ + c] += coarse_[c];
    return out;
  }

 private:
  void add_difference(std::size_t id, std::vector<double>& out) const {
    const HaarCell& cell = cells_[id];
    for (const auto& ch : cell.children)
      for (std::size_t p = ch.begin; p < ch.end; ++p) {
        const std::size_t atom = order_[p];
        for (int c = 0; c < comps_; ++c) out[atom * comps_ + c] += ch.average[c] - cell.average[c];
      }
  }

  friend HaarCoefficients martingale_decompose(const DiscreteMeasure&, const ShiftedGrid&,
                                               const GridCube&, std::span<const double>, int);

  GridCube root_;
  Cube root_cube_;
  int comps_ = 1;
  double root_mass_ = 0.0;
  std::vector<double> coarse_;
  std::vector<HaarCell> cells_;
  std::vector<std::size_t> order_;
  std::vector<double> masses_;
  std::vector<double> values_;
};

/// Decomposes f (atom-major, `components` values per atom; empty means
/// f ≡ 1) over the grid cubes inside `root`, down to the level at which every
/// mass-carrying cube holds a single atom. The whole support must lie in
/// the root and the grid must be admissible for μ.
inline HaarCoefficients martingale_decompose(const DiscreteMeasure& mu, const ShiftedGrid& grid,
                                             const GridCube& root, std::span<const double> f,
                                             int components = 1) {
  require(components >= 1, ErrorKind::input, "martingale_decompose: components must be positive");
  require(f.empty() || f.size() == mu.size() * components, ErrorKind::dimension_mismatch,
          "martingale_decompose: function values must be atoms x components");
  require(is_admissible(mu, grid), ErrorKind::admissibility,
          "martingale_decompose: measure charges a face of the grid");
  const int n = grid.dim();
  const int kmax = grid.k_max();
  const std::size_t natoms = mu.size();

  HaarCoefficients hc;
  hc.root_ = root;
  hc.root_cube_ = grid.cube(root);
  hc.comps_ = components;
  hc.masses_ = mu.masses();
  hc.values_.assign(natoms * components, 1.0);
  if (!f.empty()) hc.values_.assign(f.begin(), f.end());

  // Index chains from the finest level up to the root; coarser levels are
  // derived by integer parent steps so nesting is exact.
  const int depth = kmax - root.level;
  std::vector<std::int64_t> chain(natoms * (depth + 1) * n);
  auto at = [&](std::size_t atom, int level) {
    return chain.data() + (atom * (depth + 1) + (level - root.level)) * n;
  };
  for (std::size_t i = 0; i < natoms; ++i) {
    GridCube c = grid.cube_containing(mu.point(i), kmax);
    for (int lv = kmax; lv >= root.level; --lv) {
      std::copy(c.index.begin(), c.index.end(), at(i, lv));
      if (lv > root.level) c = grid.parent(c);
    }
    require(std::equal(root.index.begin(), root.index.end(), at(i, root.level)), ErrorKind::input,
            "martingale_decompose: atom " + std::to_string(i) + " lies outside the root cube");
  }

  hc.order_.resize(natoms);
  std::iota(hc.order_.begin(), hc.order_.end(), 0);

  auto average = [&](std::size_t b, std::size_t e, double& mass) {
    std::vector<double> avg(components, 0.0);
    mass = 0.0;
    for (std::size_t p = b; p < e; ++p) {
      const std::size_t a = hc.order_[p];
      mass += hc.masses_[a];
      for (int c = 0; c < components; ++c) avg[c] += hc.masses_[a] * hc.values_[a * components + c];
    }
    for (double& v : avg) v /= mass;
    return avg;
  };

  hc.coarse_ = natoms ? average(0, natoms, hc.root_mass_) : std::vector<double>(components, 0.0);

  struct Frame {
    int level;
    std::size_t b, e;
    int parent;
  };
  std::vector<Frame> stack{{root.level, 0, natoms, -1}};
  while (!stack.empty()) {
    const Frame fr = stack.back();
    stack.pop_back();
    if (fr.e - fr.b <= 1) continue;
    require(fr.level < kmax, ErrorKind::range,
            "martingale_decompose: atoms not separated within the grid window");
    const int lv = fr.level + 1;
    auto key = [&](std::size_t a) { return at(a, lv); };
    std::stable_sort(hc.order_.begin() + fr.b, hc.order_.begin() + fr.e,
                     [&](std::size_t x, std::size_t y) {
                       return std::lexicographical_compare(key(x), key(x) + n, key(y), key(y) + n);
                     });
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    for (std::size_t p = fr.b; p < fr.e;) {
      std::size_t q = p + 1;
      while (q < fr.e && std::equal(key(hc.order_[p]), key(hc.order_[p]) + n, key(hc.order_[q]))) ++q;
      groups.emplace_back(p, q);
      p = q;
    }
    int parent = fr.parent;
    if (groups.size() >= 2) {
      HaarCell cell;
      const std::size_t a0 = hc.order_[fr.b];
      cell.cube = GridCube{fr.level, std::vector<std::int64_t>(at(a0, fr.level), at(a0, fr.level) + n)};
      cell.begin = fr.b;
      cell.end = fr.e;
      cell.average = average(fr.b, fr.e, cell.mass);
      cell.diff_norm2.assign(components, 0.0);
      cell.parent = fr.parent;
      for (auto [gb, ge] : groups) {
        HaarChild ch;
        const std::size_t a = hc.order_[gb];
        ch.cube = GridCube{lv, std::vector<std::int64_t>(at(a, lv), at(a, lv) + n)};
        ch.begin = gb;
        ch.end = ge;
        ch.average = average(gb, ge, ch.mass);
        for (int c = 0; c < components; ++c) {
          const double t = ch.average[c] - cell.average[c];
          cell.diff_norm2[c] += ch.mass * t * t;
        }
        cell.children.push_back(std::move(ch));
      }
      parent = static_cast<int>(hc.cells_.size());
      hc.cells_.push_back(std::move(cell));
    }
    for (auto it = groups.rbegin(); it != groups.rend(); ++it)
      stack.push_back({lv, it->first, it->second, parent});
  }
  return hc;
}

/// Decompositions over every level-`level` grid cube that carries mass.
inline std::vector<HaarCoefficients> martingale_forest(const DiscreteMeasure& mu,
                                                       const ShiftedGrid& grid, int level,
                                                       std::span<const double> f,
                                                       int components = 1) {
  std::map<GridCube, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < mu.size(); ++i) groups[grid.cube_containing(mu.point(i), level)].push_back(i);
  std::vector<HaarCoefficients> out;
  for (const auto& [root, atoms] : groups) {
    std::vector<double> c, m, fv;
    for (std::size_t i : atoms) {
      c.insert(c.end(), mu.point(i).begin(), mu.point(i).end());
      m.push_back(mu.mass(i));
      if (!f.empty())
        fv.insert(fv.end(), f.begin() + i * components, f.begin() + (i + 1) * components);
    }
    out.push_back(martingale_decompose(DiscreteMeasure(mu.dim(), std::move(c), std::move(m)), grid,
                                       root, fv, components));
  }
  return out;
}

struct GoodBadSplit {
  std::vector<std::size_t> good;
  std::vector<std::size_t> bad;
  double good_norm2 = 0.0;
  double bad_norm2 = 0.0;
};

/// f - [f]_root = P_good f + P_bad f, split by (ε, r)-goodness of each cube.
inline GoodBadSplit project_good_bad(const HaarCoefficients& hc, const ShiftedGrid& grid,
                                     const GoodnessParams& gp) {
  GoodBadSplit s;
  for (std::size_t i = 0; i < hc.cells().size(); ++i) {
    const auto& cell = hc.cells()[i];
    if (is_good(cell.cube, grid, gp)) {
      s.good.push_back(i);
      s.good_norm2 += cell.total_diff_norm2();
    } else {
      s.bad.push_back(i);
      s.bad_norm2 += cell.total_diff_norm2();
    }
  }
  return s;
}

struct BadEnergyEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t trials = 0;
};

/// Mean over random grids of ‖P_bad f‖²_σ / ‖f‖²_σ. Trial t uses a grid on
/// window [k_min, k_max] seeded from (seed, t); the decomposition is the
/// forest of level-k_min cubes.
inline BadEnergyEstimate bad_energy_mc(const DiscreteMeasure& mu, std::span<const double> f,
                                       const GoodnessParams& gp, std::size_t trials,
                                       std::uint64_t seed, int k_min, int k_max) {
  require(trials >= 1, ErrorKind::input, "bad_energy_mc: trials must be positive");
  const CounterRng master(seed);
  std::vector<double> frac(trials, 0.0);
  for_chunks(trials, 4, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t t = b; t < e; ++t) {
      const ShiftedGrid g(mu.dim(), k_min, k_max, master.derive(t)());
      double bad = 0.0, total = 0.0;
      for (const auto& hc : martingale_forest(mu, g, k_min, f)) {
        bad += project_good_bad(hc, g, gp).bad_norm2;
        total += hc.norm2();
      }
      frac[t] = total > 0.0 ? bad / total : 0.0;
    }
  });
  BadEnergyEstimate est;
  est.trials = trials;
  for (double v : frac) est.mean += v;
  est.mean /= trials;
  double var = 0.0;
  for (double v : frac) var += (v - est.mean) * (v - est.mean);
  est.stderr_ = trials > 1 ? std::sqrt(var / (trials - 1) / trials) : 0.0;
  return est;
}

}  // namespace riesz2w
