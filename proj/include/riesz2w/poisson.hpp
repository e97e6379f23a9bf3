#pragma once

// Poisson-type averages, the energy functional E(w, K), the dyadic Poisson
// surrogate over the 3^n shifted-triple families, and the energy-constant
// witness for a bounded-overlap partition.

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "riesz2w/haar.hpp"
#include "riesz2w/kernel.hpp"
#include "riesz2w/whitney.hpp"

namespace riesz2w {

enum class PoissonKind { reproducing, gradient, gradient_plus };

inline const char* to_string(PoissonKind k) {
  switch (k) {
    case PoissonKind::reproducing: return "reproducing";
    case PoissonKind::gradient: return "gradient";
    case PoissonKind::gradient_plus: return "gradient_plus";
  }
  return "?";
}

/// Kernel of the average at distance t from a cube of side l.
inline double poisson_weight(PoissonKind kind, double d, double l, double t) {
  switch (kind) {
    case PoissonKind::reproducing:
      return std::pow(l, d) / (std::pow(l, 2.0 * d) + std::pow(t, 2.0 * d));
    case PoissonKind::gradient:
      return l / (std::pow(l, d + 1.0) + std::pow(t, d + 1.0));
    case PoissonKind::gradient_plus:
      return l * l / (std::pow(l, d + 2.0) + std::pow(t, d + 2.0));
  }
  return 0.0;
}

/// ∫ |f| P(x) dμ over atoms in `region` (all of R^n when null). Atoms on
/// the closed cube have distance 0.
inline double poisson_avg(PoissonKind kind, const RieszDimension& rd, const DiscreteMeasure& mu,
                          std::span<const double> f, const Cube& q, const Region* region = nullptr) {
  require(mu.dim() == rd.n() && q.dim() == rd.n(), ErrorKind::dimension_mismatch,
          "poisson_avg: dimension mismatch");
  detail::check_fvals(f, mu, "poisson_avg");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (region && !region->contains(mu.point(i))) continue;
    const double fv = std::abs(detail::fval(f, i));
    if (fv == 0.0) continue;
    s += fv * mu.mass(i) * poisson_weight(kind, rd.d(), q.side(), dist(mu.point(i), q));
  }
  return s;
}

struct EnergyValue {
  double squared = 0.0;
  double value = 0.0;
};

namespace detail {
inline EnergyValue make_energy(double e2) { return {e2, std::sqrt(std::max(e2, 0.0))}; }

/// Level of `grid` whose cubes have side ℓ(K), if K is one of them.
inline std::optional<GridCube> as_grid_cube(const Cube& k, const ShiftedGrid& g) {
  const int level = static_cast<int>(std::lround(std::log2(g.lambda() / k.side())));
  if (!g.in_range(level) || g.side(level) != k.side()) return std::nullopt;
  GridCube c = g.cube_containing(k.center(), level);
  if (!(g.cube(c) == k)) return std::nullopt;
  return c;
}
}  // namespace detail

/// E(w, K)² by form 1 (pair double sum), 2 (variance about the center of
/// mass) or 3 (Haar differences of x/ℓ(K) on grid cubes below K).
inline EnergyValue energy(const DiscreteMeasure& w, const Cube& k, int form,
                          const ShiftedGrid* grid = nullptr) {
  check_dim(w, k);
  require(form >= 1 && form <= 3, ErrorKind::input, "energy: form must be 1, 2 or 3");
  const auto idx = atoms_in(w, k);
  if (idx.size() <= 1) {
    require(form != 3 || grid, ErrorKind::input, "energy: form 3 requires a grid");
    return {};
  }
  const int n = w.dim();
  const double l2 = k.side() * k.side();
  double wk = 0.0;
  for (std::size_t i : idx) wk += w.mass(i);

  if (form == 1) {
    double s = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      double row = 0.0;
      for (std::size_t b = 0; b < idx.size(); ++b) {
        double r2 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double t = w.point(idx[a])[j] - w.point(idx[b])[j];
          r2 += t * t;
        }
        row += w.mass(idx[b]) * r2;
      }
      s += w.mass(idx[a]) * row;
    }
    return detail::make_energy(s / (wk * wk * l2));
  }
  if (form == 2) {
    Point c(n, 0.0);
    for (std::size_t i : idx)
      for (int j = 0; j < n; ++j) c[j] += w.mass(i) * w.point(i)[j];
    for (double& v : c) v /= wk;
    double s = 0.0;
    for (std::size_t i : idx) s += w.mass(i) * distance(w.point(i), c) * distance(w.point(i), c);
    return detail::make_energy(2.0 * s / (wk * l2));
  }
  require(grid != nullptr, ErrorKind::input, "energy: form 3 requires a grid");
  const auto gc = detail::as_grid_cube(k, *grid);
  require(gc.has_value(), ErrorKind::input, "energy: form 3 requires K to be a cube of the grid");
  const DiscreteMeasure wk_mu = restrict(w, Region::cube(k));
  std::vector<double> f(wk_mu.coords());
  for (double& v : f) v /= k.side();
  const HaarCoefficients hc = martingale_decompose(wk_mu, *grid, *gc, f, n);
  return detail::make_energy(2.0 * hc.sum_diff_norm2() / wk);
}

/// 3^n shifted-triple families. Family u contains, at level k, the cubes
/// 3I for grid cubes I of level k whose index is ≡ c_k(u) mod 3 per axis,
/// with c_{k_max}(u) = u and c_{k-1} = 2(c_k + 1 - ξ_k) mod 3. Members of a
/// level tile R^n and each is the union of 2^n members of the next level.
class TripleFamilies {
 public:
  explicit TripleFamilies(const ShiftedGrid& g) : g_(g) {}

  int count() const {
    int c = 1;
    for (int a = 0; a < g_.dim(); ++a) c *= 3;
    return c;
  }

  /// Residue of family coordinate u at `level` on `axis`.
  int residue(int axis, int u, int level) const {
    require(level <= g_.k_max(), ErrorKind::range, "families: level finer than the grid window");
    int c = u;
    for (int k = g_.k_max(); k > level; --k) c = (2 * (c + 1 - g_.bit(axis, k)) % 3 + 3) % 3;
    return c;
  }

  /// Member of family `u` (base-3 digits per axis, axis 0 least significant)
  /// at `level` containing x.
  Cube member(int u, int level, std::span<const double> x) const {
    const int n = g_.dim();
    const double s = g_.side(level);
    Point lo(n);
    for (int a = 0; a < n; ++a) {
      const int ua = digit(u, a);
      const double o = g_.lambda() * offset_ext(a, level);
      const auto t = static_cast<std::int64_t>(std::floor((x[a] - o) / s));
      const int c = residue(a, ua, level);
      std::int64_t i = t - 1;
      while (((i % 3) + 3) % 3 != c) ++i;
      lo[a] = o + static_cast<double>(i - 1) * s;
    }
    return Cube::from_corner(std::move(lo), 3.0 * s);
  }

  static int digit(int u, int axis) {
    for (int a = 0; a < axis; ++a) u /= 3;
    return u % 3;
  }

 private:
  double offset_ext(int axis, int level) const {
    return g_.offset(axis, std::clamp(level, g_.k_min(), g_.k_max()));
  }

  const ShiftedGrid& g_;
};

struct DyadicPoissonResult {
  /// Q_u(φ, π_u R) per family; empty where π_u R is undefined.
  std::vector<std::optional<double>> per_family;
  double total = 0.0;
  /// P̃(φ, R) = ∫ |φ| / (ℓ(R)^{d+1} + dist(x, R)^{d+1}) dμ.
  double continuous = 0.0;
  /// Bound on the omitted terms j > J_max summed over defined families.
  double tail_bound = 0.0;
};

/// π_u R is the member of family u with side 12ℓ(R) containing 3R; Q_u sums
/// (2^j ℓ(π_u R))^{-(d+1)} ∫_{(π_u R)^{(j)}} |φ| dμ for j = 0..J_max.
inline DyadicPoissonResult dyadic_poisson(const RieszDimension& rd, const DiscreteMeasure& mu,
                                          std::span<const double> phi, const GridCube& r,
                                          const ShiftedGrid& grid, int j_max = 60) {
  require(mu.dim() == rd.n() && grid.dim() == rd.n(), ErrorKind::dimension_mismatch,
          "dyadic_poisson: dimension mismatch");
  detail::check_fvals(phi, mu, "dyadic_poisson");
  require(j_max >= 0, ErrorKind::input, "dyadic_poisson: J_max must be nonnegative");
  const double d = rd.d();
  const Cube rc = grid.cube(r);
  const double l = rc.side();
  const Cube r3 = dilate(rc, 3.0);
  const Point centre = rc.center();
  const TripleFamilies fam(grid);

  DyadicPoissonResult out;
  double total_phi = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double v = std::abs(detail::fval(phi, i)) * mu.mass(i);
    total_phi += v;
    out.continuous += v / (std::pow(l, d + 1.0) + std::pow(dist(mu.point(i), rc), d + 1.0));
  }
  out.per_family.resize(fam.count());
  for (int u = 0; u < fam.count(); ++u) {
    const Cube top = fam.member(u, r.level - 2, centre);
    if (!top.contains(r3)) continue;
    const double lt = top.side();
    const Point c = top.center();
    double q = 0.0;
    for (int j = 0; j <= j_max; ++j) {
      const Cube anc = fam.member(u, r.level - 2 - j, c);
      double m = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i)
        if (anc.contains(mu.point(i))) m += std::abs(detail::fval(phi, i)) * mu.mass(i);
      q += m / std::pow(std::ldexp(lt, j), d + 1.0);
    }
    out.per_family[u] = q;
    out.total += q;
    out.tail_bound +=
        total_phi / std::pow(std::ldexp(lt, j_max + 1), d + 1.0) / (1.0 - std::exp2(-(d + 1.0)));
  }
  bool any = false;
  for (const auto& v : out.per_family) any = any || v.has_value();
  require(any, ErrorKind::range, "dyadic_poisson: pi_u R undefined for every family");
  return out;
}

/// (Q₀, 𝒦, C₀, C₁): a partition of Q₀ into cells whose C₀-dilates overlap
/// at most C₁ times.
struct PartitionSpec {
  Cube root;
  std::vector<Cube> cells;
  double C0 = 16.0;
  double C1 = std::numeric_limits<double>::infinity();
};

struct EnergyAudit {
  double value = 0.0;  ///< Σ_K P^g(σ·(Q₀∖C₀K), K)² E(w,K)² w(K) / σ(Q₀)
  double dual = 0.0;   ///< roles of σ and w swapped; 0 when w(Q₀) = 0
  double numerator = 0.0;
  double dual_numerator = 0.0;
  int max_overlap = 0;  ///< largest Σ 1_{C₀K} seen at the sample points
};

/// Sample points for the overlap check: atoms of both measures in Q₀, cell
/// centers and `extra` seeded uniform points of Q₀.
inline std::vector<Point> overlap_samples(const PartitionSpec& spec, const DiscreteMeasure& a,
                                          const DiscreteMeasure& b, std::size_t extra,
                                          std::uint64_t seed) {
  std::vector<Point> pts;
  for (const auto* mu : {&a, &b})
    for (std::size_t i = 0; i < mu->size(); ++i)
      if (spec.root.contains(mu->point(i))) pts.emplace_back(mu->point(i).begin(), mu->point(i).end());
  for (const auto& c : spec.cells) pts.push_back(c.center());
  CounterRng rng(seed);
  for (std::size_t t = 0; t < extra; ++t) {
    Point x(spec.root.dim());
    for (int j = 0; j < spec.root.dim(); ++j) x[j] = rng.uniform(spec.root.lo(j), spec.root.hi(j));
    pts.push_back(std::move(x));
  }
  return pts;
}

inline EnergyAudit energy_constant_audit(const RieszDimension& rd, const DiscreteMeasure& sigma,
                                         const DiscreteMeasure& w, const PartitionSpec& spec,
                                         std::uint64_t seed = 0, std::size_t extra_samples = 1000) {
  require(sigma.dim() == rd.n() && w.dim() == rd.n() && spec.root.dim() == rd.n(),
          ErrorKind::dimension_mismatch, "energy_constant_audit: dimension mismatch");
  require(spec.C0 >= 1.0, ErrorKind::input, "energy_constant_audit: C0 must be at least 1");
  for (std::size_t i = 0; i < spec.cells.size(); ++i)
    require(spec.root.contains(spec.cells[i]), ErrorKind::invalid_partition,
            "energy_constant_audit: cell " + std::to_string(i) + " is not contained in the root");
  if (auto bad = find_overlap(spec.cells))
    fail(ErrorKind::invalid_partition, "energy_constant_audit: cells " + std::to_string(bad->first) +
                                           " and " + std::to_string(bad->second) + " intersect");
  EnergyAudit out;
  const OverlapIndex overlap(spec.cells, spec.C0);
  for (const auto& x : overlap_samples(spec, sigma, w, extra_samples, seed))
    out.max_overlap = std::max(out.max_overlap, overlap.count(x));
  require(out.max_overlap <= spec.C1, ErrorKind::invalid_partition,
          "energy_constant_audit: dilated cells overlap " + std::to_string(out.max_overlap) +
              " times, above C1");

  const double s0 = cube_mass(sigma, spec.root);
  require(s0 > 0.0, ErrorKind::empty_cube, "energy_constant_audit: sigma(Q0) = 0");
  const double w0 = cube_mass(w, spec.root);

  auto side = [&](const DiscreteMeasure& pois, const DiscreteMeasure& en) {
    return map_reduce(
        spec.cells.size(), 16, 0.0,
        [&](std::size_t c) {
          const Cube& k = spec.cells[c];
          const EnergyValue e = energy(en, k, 2);
          if (e.squared == 0.0) return 0.0;
          const Region reg = Region::difference(spec.root, dilate(k, spec.C0));
          const double p = poisson_avg(PoissonKind::gradient, rd, pois, {}, k, &reg);
          return p * p * e.squared * cube_mass(en, k);
        },
        [](double a, double b) { return a + b; });
  };
  out.numerator = side(sigma, w);
  out.value = out.numerator / s0;
  out.dual_numerator = side(w, sigma);
  out.dual = w0 > 0.0 ? out.dual_numerator / w0 : 0.0;
  return out;
}

}  // namespace riesz2w
