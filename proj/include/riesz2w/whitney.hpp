#pragma once

// Whitney collections W_Q: maximal dual-grid cubes K ⊆ Q that are in good
// position relative to every dyadic subcube Q′ of Q containing them, plus
// bounded-overlap bookkeeping for families of dilated cubes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "riesz2w/grid.hpp"

namespace riesz2w {

struct WhitneyOptions {
  double C0 = 16.0;
  /// Finest level searched; the dual grid's k_max when larger.
  int max_level = std::numeric_limits<int>::max();
  /// When nonempty, only dual cubes D with probe_dilation·D containing a
  /// probe are visited. The result is then every cell of W_Q whose
  /// probe_dilation-dilate meets a probe.
  std::vector<Point> probes;
  double probe_dilation = 1.0;
  std::size_t max_visits = 50'000'000;
};

/// The good-position test for K against Q and its dyadic subcubes Q′ ⊇ K
/// with ℓ(Q′) >= 2^r ℓ(K).
inline bool whitney_qualifies(const Cube& k, const Cube& q, const GoodnessParams& gp) {
  if (!q.contains(k)) return false;
  const int n = k.dim();
  const double lk = k.side();
  const double floor_side = std::ldexp(lk, gp.r) * (1.0 - 1e-12);
  if (q.side() < floor_side) return false;
  const double lk_eps = std::pow(lk, gp.epsilon);
  Point lo = q.corner();
  for (double s = q.side(); s >= floor_side; s *= 0.5) {
    double gap = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      const double below = k.lo(a) - lo[a], above = (lo[a] + s) - k.hi(a);
      if (below < 0.0 || above < 0.0) return true;
      gap = std::min({gap, below, above});
    }
    if (gap < lk_eps * std::pow(s, 1.0 - gp.epsilon)) return false;
    const double h = 0.5 * s;
    for (int a = 0; a < n; ++a)
      if (k.lo(a) >= lo[a] + h) lo[a] += h;
  }
  return true;
}

/// Coarsest dual level whose cubes satisfy 2^r ℓ(K) <= ℓ(Q).
inline int whitney_top_level(const Cube& q, const ShiftedGrid& dual, const GoodnessParams& gp) {
  const double target = q.side() * (1.0 + 1e-12);
  int k = static_cast<int>(std::floor(std::log2(dual.lambda() / q.side()))) + gp.r - 2;
  while (std::ldexp(dual.side(k), gp.r) > target) ++k;
  while (std::ldexp(dual.side(k - 1), gp.r) <= target) --k;
  return k;
}

/// W_Q as dual-grid cubes, sorted.
inline std::vector<GridCube> whitney(const Cube& q, const ShiftedGrid& dual, const GoodnessParams& gp,
                                     const WhitneyOptions& opt = {}) {
  gp.validate();
  require(q.dim() == dual.dim(), ErrorKind::dimension_mismatch, "whitney: dimension mismatch");
  require(opt.C0 >= 1.0, ErrorKind::input, "whitney: C0 must be at least 1");
  require(std::exp2(gp.r * (1.0 - gp.epsilon)) > 4.0 * opt.C0, ErrorKind::configuration,
          "whitney: requires 2^{r(1-eps)} > 4 C0");
  require(opt.probe_dilation >= 1.0, ErrorKind::input, "whitney: probe dilation must be >= 1");
  const int n = q.dim();
  const int top = whitney_top_level(q, dual, gp);
  const int cap = std::min(dual.k_max(), opt.max_level);
  require(top >= dual.k_min() && top <= dual.k_max(), ErrorKind::range,
          "whitney: level " + std::to_string(top) + " of the largest cells lies outside the dual window");

  struct Item {
    GridCube cube;
    std::vector<std::uint32_t> probes;
  };
  const bool pruned = !opt.probes.empty();
  auto probe_hits = [&](const Cube& c, const std::vector<std::uint32_t>& from) {
    std::vector<std::uint32_t> hits;
    const Cube big = dilate(c, opt.probe_dilation);
    for (std::uint32_t p : from) {
      const auto& x = opt.probes[p];
      bool in = true;
      for (int a = 0; a < n && in; ++a) in = x[a] >= big.lo(a) && x[a] < big.hi(a);
      if (in) hits.push_back(p);
    }
    return hits;
  };

  std::vector<Item> stack;
  const double s = dual.side(top);
  if (pruned) {
    std::map<GridCube, std::vector<std::uint32_t>> start;
    const auto h = static_cast<std::int64_t>(std::ceil(0.5 * (opt.probe_dilation - 1.0))) + 1;
    for (std::uint32_t p = 0; p < opt.probes.size(); ++p) {
      const auto& x = opt.probes[p];
      require(static_cast<int>(x.size()) == n, ErrorKind::dimension_mismatch,
              "whitney: probe dimension differs");
      const GridCube base = dual.cube_containing(x, top);
      std::vector<std::int64_t> off(n, -h);
      while (true) {
        GridCube c{top, base.index};
        for (int a = 0; a < n; ++a) c.index[a] += off[a];
        const Cube cc = dual.cube(c);
        if (cc.intersects(q) && dilate(cc, opt.probe_dilation).contains(x)) start[c].push_back(p);
        int a = 0;
        while (a < n && ++off[a] > h) off[a++] = -h;
        if (a == n) break;
      }
    }
    for (auto& [c, ps] : start) stack.push_back({c, std::move(ps)});
  } else {
    std::vector<std::int64_t> lo(n), hi(n);
    double count = 1.0;
    for (int a = 0; a < n; ++a) {
      const double o = dual.lambda() * dual.offset(a, top);
      lo[a] = static_cast<std::int64_t>(std::floor((q.lo(a) - o) / s));
      hi[a] = static_cast<std::int64_t>(std::ceil((q.hi(a) - o) / s)) - 1;
      count *= static_cast<double>(hi[a] - lo[a] + 1);
    }
    require(count <= static_cast<double>(opt.max_visits), ErrorKind::resource,
            "whitney: too many starting cubes; supply probes");
    std::vector<std::int64_t> idx = lo;
    while (true) {
      stack.push_back({GridCube{top, idx}, {}});
      int a = 0;
      while (a < n && ++idx[a] > hi[a]) idx[a] = lo[a], ++a;
      if (a == n) break;
    }
  }

  std::vector<GridCube> out;
  std::size_t visits = 0;
  while (!stack.empty()) {
    Item it = std::move(stack.back());
    stack.pop_back();
    require(++visits <= opt.max_visits, ErrorKind::resource, "whitney: visit budget exhausted");
    const Cube c = dual.cube(it.cube);
    if (!c.intersects(q)) continue;
    if (whitney_qualifies(c, q, gp)) {
      out.push_back(std::move(it.cube));
      continue;
    }
    if (it.cube.level >= cap) continue;
    for (auto& ch : dual.children(it.cube)) {
      if (pruned) {
        auto hits = probe_hits(dual.cube(ch), it.probes);
        if (hits.empty()) continue;
        stack.push_back({std::move(ch), std::move(hits)});
      } else {
        stack.push_back({std::move(ch), {}});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<Cube> to_cubes(const std::vector<GridCube>& cells, const ShiftedGrid& grid) {
  std::vector<Cube> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(grid.cube(c));
  return out;
}

/// Point counts of Σ_K 1_{c·K}(x) for an arbitrary finite family of cubes.
class OverlapIndex {
 public:
  OverlapIndex(const std::vector<Cube>& cells, double c) {
    require(c > 0.0, ErrorKind::input, "overlap: dilation must be positive");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      Cube big = dilate(cells[i], c);
      Group& g = groups_[big.side()];
      const int n = big.dim();
      std::vector<std::int64_t> lo(n), hi(n);
      for (int a = 0; a < n; ++a) {
        lo[a] = static_cast<std::int64_t>(std::floor(big.lo(a) / big.side()));
        hi[a] = static_cast<std::int64_t>(std::floor(big.hi(a) / big.side()));
      }
      std::vector<std::int64_t> k = lo;
      while (true) {
        g.buckets[k].push_back(g.cubes.size());
        int a = 0;
        while (a < n && ++k[a] > hi[a]) k[a] = lo[a], ++a;
        if (a == n) break;
      }
      g.cubes.push_back(std::move(big));
    }
  }

  int count(std::span<const double> x) const {
    int total = 0;
    std::vector<std::int64_t> key(x.size());
    for (const auto& [side, g] : groups_) {
      for (std::size_t a = 0; a < x.size(); ++a)
        key[a] = static_cast<std::int64_t>(std::floor(x[a] / side));
      auto it = g.buckets.find(key);
      if (it == g.buckets.end()) continue;
      for (std::size_t i : it->second)
        if (g.cubes[i].contains(x)) ++total;
    }
    return total;
  }

 private:
  struct Group {
    std::vector<Cube> cubes;
    std::map<std::vector<std::int64_t>, std::vector<std::size_t>> buckets;
  };
  std::map<double, Group> groups_;
};

/// First intersecting pair, if any (sweep along the first axis).
inline std::optional<std::pair<std::size_t, std::size_t>> find_overlap(const std::vector<Cube>& cells) {
  std::vector<std::size_t> order(cells.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return cells[a].lo(0) < cells[b].lo(0); });
  std::vector<std::size_t> active;
  for (std::size_t i : order) {
    const double x = cells[i].lo(0);
    std::erase_if(active, [&](std::size_t j) { return cells[j].hi(0) <= x; });
    for (std::size_t j : active)
      if (cells[i].intersects(cells[j])) return std::pair{std::min(i, j), std::max(i, j)};
    active.push_back(i);
  }
  return std::nullopt;
}

}  // namespace riesz2w
