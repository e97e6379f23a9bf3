#pragma once

// Characterization constants over finite cube families: A₂ (with and
// without holes), testing constants T and T*, the full-dimension constant
// η, the monotonicity ratio audit, and the end-to-end theorem audit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "riesz2w/kernel.hpp"
#include "riesz2w/poisson.hpp"

namespace riesz2w {

struct CubeFamily {
  std::vector<Cube> cubes;
  std::string provenance = "user";
};

/// Best value over a family with its witness. Ties go to the smallest cube
/// in Cube ordering.
struct Witness {
  double value = 0.0;
  std::optional<Cube> cube;
  std::size_t evaluated = 0;
};

namespace detail {

inline void offer(Witness& w, double v, const Cube& q, bool maximize) {
  const bool better = !w.cube || (maximize ? v > w.value : v < w.value) ||
                      (v == w.value && q < *w.cube);
  if (better) {
    w.value = v;
    w.cube = q;
  }
}

inline nlohmann::json cube_json(const std::optional<Cube>& q) {
  if (!q) return nullptr;
  return {{"center", q->center()}, {"side", q->side()}};
}

/// Atom indices of both measures inside Q, used to skip cubes that select
/// the same atoms as one already evaluated.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> signature(
    const DiscreteMeasure& a, const DiscreteMeasure& b, const Cube& q) {
  return {atoms_in(a, q), atoms_in(b, q)};
}

}  // namespace detail

struct FamilyOptions {
  int grids = 4;
  std::uint64_t seed = 0;
  bool atom_centered = true;
};

/// Cubes of `grids` random grids that carry mass, from the level whose cubes
/// have side twice the enclosing cube down to the level where every cube
/// holds at most one atom; plus cubes centered at every atom at each dyadic
/// scale of that range.
inline CubeFamily default_family(const DiscreteMeasure& sigma, const DiscreteMeasure& w,
                                 const FamilyOptions& opt = {}) {
  require(sigma.dim() == w.dim(), ErrorKind::dimension_mismatch, "family: dimension mismatch");
  CubeFamily fam;
  fam.provenance = "grid-cubes";
  if (sigma.empty() && w.empty()) return fam;
  const Cube enc = enclosing_cube(sigma, w);
  const int n = sigma.dim();
  const int top = -static_cast<int>(std::lround(std::log2(enc.side()))) - 1;

  std::vector<Point> pts;
  for (const auto* mu : {&sigma, &w})
    for (std::size_t i = 0; i < mu->size(); ++i) pts.emplace_back(mu->point(i).begin(), mu->point(i).end());

  std::set<Cube> seen;
  int finest = top;
  for (int g = 0; g < opt.grids; ++g) {
    const ShiftedGrid grid(n, top, top + 48, CounterRng(opt.seed).derive(1000 + g)());
    std::vector<std::vector<std::size_t>> groups{std::vector<std::size_t>(pts.size())};
    std::iota(groups[0].begin(), groups[0].end(), 0);
    for (int level = top; level <= grid.k_max() && !groups.empty(); ++level) {
      std::map<GridCube, std::vector<std::size_t>> next;
      for (const auto& grp : groups)
        for (std::size_t p : grp) next[grid.cube_containing(pts[p], level)].push_back(p);
      groups.clear();
      for (auto& [c, members] : next) {
        if (seen.insert(grid.cube(c)).second) fam.cubes.push_back(grid.cube(c));
        std::set<Point> distinct;
        for (std::size_t p : members) distinct.insert(pts[p]);
        if (distinct.size() > 1) groups.push_back(std::move(members));
      }
      finest = std::max(finest, level);
    }
  }
  if (opt.atom_centered) {
    fam.provenance = "grid-cubes+atom-centered";
    for (const auto& x : pts)
      for (int level = top; level <= finest; ++level) {
        Cube q(x, std::ldexp(1.0, -level));
        if (seen.insert(q).second) fam.cubes.push_back(std::move(q));
      }
  }
  return fam;
}

/// With holes: sup [σ(Q)/ℓ^d]·P^r(w·Qᶜ, Q) + [w(Q)/ℓ^d]·P^r(σ·Qᶜ, Q).
/// Without holes the Poisson integrals run over all of R^n.
inline Witness a2_constant(const RieszDimension& rd, const DiscreteMeasure& sigma,
                           const DiscreteMeasure& w, const CubeFamily& family, bool holes) {
  require(!family.cubes.empty(), ErrorKind::input, "a2_constant: empty cube family");
  require(sigma.dim() == rd.n() && w.dim() == rd.n(), ErrorKind::dimension_mismatch,
          "a2_constant: dimension mismatch");
  const double d = rd.d();
  std::vector<double> vals(family.cubes.size());
  for_chunks(family.cubes.size(), 32, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t c = b; c < e; ++c) {
      const Cube& q = family.cubes[c];
      const double ld = std::pow(q.side(), d);
      const double sq = cube_mass(sigma, q), wq = cube_mass(w, q);
      const Region out = holes ? Region::complement(q) : Region::everything();
      double v = 0.0;
      if (sq > 0.0) v += sq / ld * poisson_avg(PoissonKind::reproducing, rd, w, {}, q, &out);
      if (wq > 0.0) v += wq / ld * poisson_avg(PoissonKind::reproducing, rd, sigma, {}, q, &out);
      vals[c] = v;
    }
  });
  Witness best;
  for (std::size_t c = 0; c < vals.size(); ++c) detail::offer(best, vals[c], family.cubes[c], true);
  best.evaluated = vals.size();
  return best;
}

/// sqrt of sup over σ-charged cubes of ∫_Q |R_σ 1_Q|² dw / σ(Q).
inline Witness testing_constant(const RieszDimension& rd, const DiscreteMeasure& sigma,
                                const DiscreteMeasure& w, const CubeFamily& family,
                                std::optional<Truncation> truncation = std::nullopt) {
  require(sigma.dim() == rd.n() && w.dim() == rd.n(), ErrorKind::dimension_mismatch,
          "testing_constant: dimension mismatch");
  require(truncation || !share_atom(sigma, w), ErrorKind::precondition,
          "testing_constant: weights share an atom; a truncation is required");
  const KernelParams kp(rd, truncation);
  const int n = rd.n();
  const std::size_t ns = sigma.size(), nw = w.size();
  require(static_cast<double>(ns) * nw * n <= 2e8, ErrorKind::resource,
          "testing_constant: kernel table too large");
  std::vector<double> table(nw * ns * n, 0.0);
  for_chunks(nw, 16, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t k = b; k < e; ++k)
      for (std::size_t i = 0; i < ns; ++i)
        detail::kernel_axpy(kp, w.point(k), sigma.point(i), 1.0, &table[(k * ns + i) * n]);
  });

  // Cubes selecting the same atoms share a value; keep the smallest cube.
  std::map<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>, std::size_t> unique;
  for (std::size_t c = 0; c < family.cubes.size(); ++c) {
    auto s = detail::signature(sigma, w, family.cubes[c]);
    if (s.first.empty()) continue;
    auto [it, fresh] = unique.emplace(std::move(s), c);
    if (!fresh && family.cubes[c] < family.cubes[it->second]) it->second = c;
  }
  std::vector<std::size_t> picks;
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> sigs;
  for (auto& [s, c] : unique) {
    sigs.push_back(s);
    picks.push_back(c);
  }
  require(!picks.empty(), ErrorKind::undefined_sup, "testing_constant: every family cube is sigma-null");

  std::vector<double> vals(picks.size(), -1.0);
  for_chunks(picks.size(), 16, [&](std::size_t b, std::size_t e, std::size_t) {
    std::vector<double> acc(n);
    for (std::size_t t = b; t < e; ++t) {
      const auto& [si, wi] = sigs[t];
      double sq = 0.0;
      for (std::size_t i : si) sq += sigma.mass(i);
      double num = 0.0;
      for (std::size_t k : wi) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t i : si)
          for (int j = 0; j < n; ++j) acc[j] += table[(k * ns + i) * n + j] * sigma.mass(i);
        num += w.mass(k) * norm2(acc);
      }
      vals[t] = num / sq;
    }
  });
  Witness best;
  for (std::size_t t = 0; t < picks.size(); ++t) detail::offer(best, vals[t], family.cubes[picks[t]], true);
  best.value = std::sqrt(best.value);
  best.evaluated = picks.size();
  return best;
}

struct EtaOptions {
  int angles = 720;         ///< n = 2 scan resolution
  int directions = 512;     ///< n >= 3 random starts
  int descent_steps = 50;   ///< n >= 3 projected descent steps
  std::uint64_t seed = 0;
  std::size_t min_atoms = 1;  ///< cubes with fewer w-atoms are skipped
  double max_pairs = 5e7;
};

struct EtaResult {
  double value = 0.0;
  std::optional<Cube> cube;
  Point normal;
  std::size_t evaluated = 0;
};

namespace detail {

struct PairSet {
  int n = 0;
  std::vector<double> u;  ///< unit pair directions, canonical half-space
  std::vector<double> wt; ///< 2 m_i m_j / w(Q)²
};

inline PairSet pair_directions(const DiscreteMeasure& w, const std::vector<std::size_t>& idx) {
  PairSet ps;
  ps.n = w.dim();
  double wq = 0.0;
  for (std::size_t i : idx) wq += w.mass(i);
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      Point v(ps.n);
      for (int j = 0; j < ps.n; ++j) v[j] = w.point(idx[b])[j] - w.point(idx[a])[j];
      const double r = std::sqrt(norm2(v));
      if (r == 0.0) continue;
      int lead = ps.n - 1;
      while (lead > 0 && v[lead] == 0.0) --lead;
      const double sgn = v[lead] < 0.0 ? -1.0 : 1.0;
      for (double x : v) ps.u.push_back(sgn * x / r);
      ps.wt.push_back(2.0 * w.mass(idx[a]) * w.mass(idx[b]) / (wq * wq));
    }
  return ps;
}

inline double eta_at(const PairSet& ps, std::span<const double> nu) {
  double s = 0.0;
  for (std::size_t p = 0; p < ps.wt.size(); ++p) {
    double dot = 0.0;
    for (int j = 0; j < ps.n; ++j) dot += nu[j] * ps.u[p * ps.n + j];
    s += ps.wt[p] * std::abs(dot);
  }
  return s;
}

/// Exact minimum over unit normals in the plane. The objective is a sum of
/// |cos| terms, concave between breakpoints ν ⟂ u_p, so the minimum sits
/// at a breakpoint; every breakpoint plus the regular scan is evaluated with
/// prefix sums over pairs sorted by angle.
inline std::pair<double, Point> eta_plane(const PairSet& ps, int angles) {
  const std::size_t m = ps.wt.size();
  if (m == 0) return {0.0, Point{0.0, 1.0}};
  std::vector<std::size_t> ord(m);
  std::iota(ord.begin(), ord.end(), 0);
  std::vector<double> ang(m);
  for (std::size_t p = 0; p < m; ++p) ang[p] = std::atan2(ps.u[2 * p + 1], ps.u[2 * p]);
  std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return ang[a] < ang[b]; });
  std::vector<double> sa(m), px(m + 1, 0.0), py(m + 1, 0.0);
  for (std::size_t t = 0; t < m; ++t) {
    const std::size_t p = ord[t];
    sa[t] = ang[p];
    px[t + 1] = px[t] + ps.wt[p] * ps.u[2 * p];
    py[t + 1] = py[t] + ps.wt[p] * ps.u[2 * p + 1];
  }
  // For ν at angle θ ∈ [0, π), ν·u >= 0 iff angle(u) ∈ [θ - π/2, θ + π/2].
  auto eval = [&](double nx, double ny) {
    double th = std::atan2(ny, nx);
    if (th < 0.0) th += std::numbers::pi;
    const double lo = th - 0.5 * std::numbers::pi, hi = th + 0.5 * std::numbers::pi;
    const std::size_t a = std::lower_bound(sa.begin(), sa.end(), lo) - sa.begin();
    const std::size_t b = std::upper_bound(sa.begin(), sa.end(), hi) - sa.begin();
    const double plus_x = px[b] - px[a], plus_y = py[b] - py[a];
    const double minus_x = px[m] - plus_x, minus_y = py[m] - plus_y;
    return std::abs(nx * (plus_x - minus_x) + ny * (plus_y - minus_y));
  };
  double best = std::numeric_limits<double>::infinity();
  Point arg{0.0, 1.0};
  auto consider = [&](double nx, double ny) {
    const double v = eval(nx, ny);
    if (v < best) best = v, arg = Point{nx, ny};
  };
  for (int t = 0; t < angles; ++t) {
    const double th = std::numbers::pi * t / angles;
    consider(std::cos(th), std::sin(th));
  }
  for (std::size_t p = 0; p < m; ++p) consider(-ps.u[2 * p + 1], ps.u[2 * p]);
  // The prefix-sum value can carry rounding; confirm the winner directly.
  return {std::min(best, eta_at(ps, arg)), arg};
}

inline std::pair<double, Point> eta_space(const PairSet& ps, const EtaOptions& opt, std::uint64_t seed) {
  const int n = ps.n;
  CounterRng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  Point arg(n, 0.0);
  auto consider = [&](const Point& nu) {
    const double v = eta_at(ps, nu);
    if (v < best) best = v, arg = nu;
  };
  for (int a = 0; a < n; ++a) {
    Point e(n, 0.0);
    e[a] = 1.0;
    consider(e);
  }
  for (int t = 0; t < opt.directions; ++t) {
    Point nu(n);
    for (double& x : nu) x = rng.normal();
    const double r = std::sqrt(norm2(nu));
    if (r == 0.0) continue;
    for (double& x : nu) x /= r;
    consider(nu);
  }
  Point nu = arg;
  double step = 0.1;
  for (int it = 0; it < opt.descent_steps; ++it) {
    Point g(n, 0.0);
    for (std::size_t p = 0; p < ps.wt.size(); ++p) {
      double dot = 0.0;
      for (int j = 0; j < n; ++j) dot += nu[j] * ps.u[p * n + j];
      const double s = dot > 0.0 ? 1.0 : (dot < 0.0 ? -1.0 : 0.0);
      for (int j = 0; j < n; ++j) g[j] += ps.wt[p] * s * ps.u[p * n + j];
    }
    double gn = 0.0;
    for (int j = 0; j < n; ++j) gn += g[j] * nu[j];
    for (int j = 0; j < n; ++j) g[j] -= gn * nu[j];
    Point trial(n);
    for (int j = 0; j < n; ++j) trial[j] = nu[j] - step * g[j];
    const double r = std::sqrt(norm2(trial));
    if (r == 0.0) break;
    for (double& x : trial) x /= r;
    if (eta_at(ps, trial) < eta_at(ps, nu)) {
      nu = trial;
      consider(nu);
    } else {
      step *= 0.5;
    }
  }
  return {best, arg};
}

}  // namespace detail

/// η over the family: min over cubes and unit normals ν of
/// (1/w(Q)²) ∬_{x≠x′} |ν·(x′−x)|/|x′−x| dw dw.
inline EtaResult ufd_eta(const DiscreteMeasure& w, const CubeFamily& family, const EtaOptions& opt = {}) {
  const int n = w.dim();
  EtaResult res;
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> todo;
  for (std::size_t c = 0; c < family.cubes.size(); ++c) {
    auto idx = atoms_in(w, family.cubes[c]);
    if (idx.empty() || idx.size() < opt.min_atoms) continue;
    if (!seen.insert(idx).second) continue;
    todo.emplace_back(c, std::move(idx));
  }
  require(!todo.empty(), ErrorKind::input, "ufd_eta: no cube of the family carries enough w mass");
  for (const auto& [c, idx] : todo) {
    const double pairs = 0.5 * static_cast<double>(idx.size()) * (idx.size() - 1);
    require(pairs <= opt.max_pairs, ErrorKind::resource, "ufd_eta: cube with too many atom pairs");
    const auto ps = detail::pair_directions(w, idx);
    const auto [v, nu] = n == 1   ? std::pair<double, Point>{detail::eta_at(ps, Point{1.0}), Point{1.0}}
                         : n == 2 ? detail::eta_plane(ps, opt.angles)
                                  : detail::eta_space(ps, opt, CounterRng(opt.seed).derive(c)());
    const Cube& q = family.cubes[c];
    if (!res.cube || v < res.value || (v == res.value && q < *res.cube)) {
      res.value = v;
      res.cube = q;
      res.normal = nu;
    }
    ++res.evaluated;
  }
  return res;
}

struct MonotonicityTerms {
  double numerator = 0.0;
  double denominator = 0.0;
  double ratio = 0.0;
  bool anomaly = false;
};

/// |⟨R_σ f, g⟩_w| against P^g(|f|σ, Q)·|⟨x/ℓ(Q), g⟩_w| + P^{g+}(|f|σ, Q)·E(w,Q)·w(Q)^{1/2}·‖g‖_w,
/// vector quantities measured in ℓ². g must be supported on Q with w-mean 0.
inline MonotonicityTerms monotonicity_ratio(const RieszDimension& rd, const DiscreteMeasure& sigma,
                                            std::span<const double> f, const DiscreteMeasure& w,
                                            std::span<const double> g, const Cube& q) {
  const int n = rd.n();
  MonotonicityTerms t;
  const Vec bf = bilinear_form(KernelParams(rd), sigma, f, w, g);
  t.numerator = std::sqrt(norm2(bf));
  Vec xg(n, 0.0);
  double g2 = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double gk = detail::fval(g, k);
    g2 += w.mass(k) * gk * gk;
    for (int j = 0; j < n; ++j) xg[j] += w.mass(k) * gk * w.point(k)[j] / q.side();
  }
  const double pg = poisson_avg(PoissonKind::gradient, rd, sigma, f, q);
  const double pgp = poisson_avg(PoissonKind::gradient_plus, rd, sigma, f, q);
  const double e = energy(w, q, 2).value;
  t.denominator = pg * std::sqrt(norm2(xg)) + pgp * e * std::sqrt(cube_mass(w, q)) * std::sqrt(g2);
  if (t.numerator == 0.0) return t;
  if (t.denominator == 0.0) {
    t.anomaly = true;
    t.ratio = std::numeric_limits<double>::infinity();
    return t;
  }
  t.ratio = t.numerator / t.denominator;
  return t;
}

struct MonotonicityOptions {
  std::size_t sigma_atoms = 40;
  std::size_t w_atoms = 24;
  double separation = 10.0;  ///< P is the cube concentric with Q of this many sides
  double reach = 200.0;      ///< σ atoms lie within reach·ℓ(Q) of Q's center
  int bins = 20;
};

struct MonotonicityResult {
  double max_ratio = 0.0;
  std::size_t argmax_trial = 0;
  std::size_t anomalies = 0;
  std::size_t trials = 0;
  std::vector<double> ratios;
  std::vector<double> bin_edges;
  std::vector<std::size_t> histogram;
};

/// Randomized audit: per trial Q is a cube of random side and position, σ
/// sits outside P = separation·Q with random signed f, and w sits in Q with
/// a random g of w-mean zero.
inline MonotonicityResult monotonicity_audit(const RieszDimension& rd, std::size_t trials,
                                             std::uint64_t seed, const MonotonicityOptions& opt = {}) {
  require(trials >= 1, ErrorKind::input, "monotonicity_audit: trials must be positive");
  require(opt.separation >= 10.0, ErrorKind::input, "monotonicity_audit: requires 10Q inside P");
  require(opt.reach > opt.separation, ErrorKind::input, "monotonicity_audit: reach must exceed P");
  const int n = rd.n();
  const CounterRng master(seed);
  MonotonicityResult res;
  res.trials = trials;
  res.ratios.assign(trials, 0.0);
  std::vector<char> anomaly(trials, 0);
  for_chunks(trials, 8, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t t = b; t < e; ++t) {
      CounterRng rng = master.derive(t);
      const double side = std::exp2(rng.uniform(-3.0, 3.0));
      Point c(n);
      for (double& x : c) x = rng.uniform(-4.0, 4.0);
      const Cube q(c, side);
      const Cube p = dilate(q, opt.separation);
      std::vector<double> sc, sm, fv;
      while (sm.size() < opt.sigma_atoms) {
        Point x(n);
        const double rad = side * std::exp2(rng.uniform(std::log2(0.5 * opt.separation), std::log2(opt.reach)));
        for (int j = 0; j < n; ++j) x[j] = c[j] + rad * rng.uniform(-1.0, 1.0);
        if (p.contains_closed(x)) continue;
        sc.insert(sc.end(), x.begin(), x.end());
        sm.push_back(rng.uniform(0.1, 1.0));
        fv.push_back(rng.uniform(-1.0, 1.0));
      }
      std::vector<double> wc, wm;
      for (std::size_t k = 0; k < opt.w_atoms; ++k) {
        for (int j = 0; j < n; ++j) wc.push_back(rng.uniform(q.lo(j), q.hi(j)));
        wm.push_back(rng.uniform(0.1, 1.0));
      }
      const DiscreteMeasure sigma(n, sc, sm), w(n, wc, wm);
      std::vector<double> g(w.size());
      double mean = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) {
        g[k] = rng.uniform(-1.0, 1.0);
        mean += w.mass(k) * g[k];
      }
      mean /= w.total_mass();
      for (double& x : g) x -= mean;
      std::vector<double> fs(fv.begin(), fv.begin() + sigma.size());
      const auto terms = monotonicity_ratio(rd, sigma, fs, w, g, q);
      res.ratios[t] = terms.ratio;
      anomaly[t] = terms.anomaly;
    }
  });
  for (std::size_t t = 0; t < trials; ++t) {
    if (anomaly[t]) {
      ++res.anomalies;
      continue;
    }
    if (res.ratios[t] > res.max_ratio) res.max_ratio = res.ratios[t], res.argmax_trial = t;
  }
  const double top = res.max_ratio > 0.0 ? res.max_ratio : 1.0;
  res.histogram.assign(opt.bins, 0);
  for (int i = 0; i <= opt.bins; ++i) res.bin_edges.push_back(top * i / opt.bins);
  for (std::size_t t = 0; t < trials; ++t) {
    if (anomaly[t]) continue;
    const int bin = std::min(opt.bins - 1, static_cast<int>(res.ratios[t] / top * opt.bins));
    ++res.histogram[bin];
  }
  return res;
}

struct AuditConfig {
  FamilyOptions family;
  std::optional<CubeFamily> family_override;
  OperatorNormOptions norm;
  GoodnessParams goodness{0.08, 16};
  double C0 = 16.0;
  int energy_roots = 3;    ///< coarsest levels of grid 0 whose cubes serve as Q₀
  bool compute_eta = true;
  bool compute_energy = true;
  EtaOptions eta;
};

struct ConstantsReport {
  int n = 0;
  double d = 0.0;
  bool holes = false;
  NormEstimate N;              ///< max of the two directions
  NormEstimate N_forward, N_dual;  ///< L²(σ)→L²(w) and L²(w)→L²(σ)
  double N_tol = 0.0;
  Witness A2, T, Tstar;
  std::optional<EtaResult> eta_sigma, eta_w;
  struct {
    double value = 0.0;
    double dual = 0.0;
    std::optional<Cube> root;
    std::size_t partitions = 0;
    int max_overlap = 0;
  } energy;
  double ratio_full = 0.0;    ///< N / (A2^{1/2} + T + T*)
  double ratio_theorem = 0.0; ///< N / (A2^{1/2} + T)
  double ratio_energy = 0.0;  ///< max(E², E*²) / (A2 + max(T, T*)²)
  std::uint64_t seed = 0;
  std::string family_provenance;
  std::size_t family_size = 0;
  GoodnessParams goodness;
  double C0 = 16.0;
  double seconds = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["d"] = d;
    j["holes"] = holes;
    j["N"] = {{"value", N.value},
              {"forward", N_forward.value},
              {"dual", N_dual.value},
              {"tol", N_tol},
              {"iterations", N_forward.iterations + N_dual.iterations}};
    j["A2"] = {{"value", A2.value}, {"argmax", detail::cube_json(A2.cube)}, {"evaluated", A2.evaluated}};
    j["T"] = {{"value", T.value}, {"argmax", detail::cube_json(T.cube)}, {"evaluated", T.evaluated}};
    j["Tstar"] = {{"value", Tstar.value}, {"argmax", detail::cube_json(Tstar.cube)},
                  {"evaluated", Tstar.evaluated}};
    auto eta_json = [](const std::optional<EtaResult>& e) -> nlohmann::json {
      if (!e) return nullptr;
      return {{"value", e->value}, {"argmin", detail::cube_json(e->cube)}, {"normal", e->normal},
              {"evaluated", e->evaluated}};
    };
    j["eta_sigma"] = eta_json(eta_sigma);
    j["eta_w"] = eta_json(eta_w);
    j["E_audit"] = {{"value", energy.value},
                    {"dual", energy.dual},
                    {"root", detail::cube_json(energy.root)},
                    {"partitions", energy.partitions},
                    {"max_overlap", energy.max_overlap}};
    j["ratios"] = {{"N_over_A2_T_Tstar", ratio_full},
                   {"N_over_A2_T", ratio_theorem},
                   {"E2_over_A2_T2", ratio_energy}};
    j["metadata"] = {{"seed", seed},
                     {"family", family_provenance},
                     {"family_size", family_size},
                     {"epsilon", goodness.epsilon},
                     {"r", goodness.r},
                     {"C0", C0},
                     {"goodness_window", "relative to a finite scale window"},
                     {"seconds", seconds}};
    return j;
  }

  static std::string csv_header() {
    return "N,A2,T,Tstar,eta_sigma,eta_w,E_audit,ratio_full,ratio_theorem,ratio_energy,seed";
  }

  std::string csv_row() const {
    std::ostringstream os;
    os.precision(17);
    auto opt = [](const std::optional<EtaResult>& e) { return e ? e->value : std::nan(""); };
    os << N.value << ',' << A2.value << ',' << T.value << ',' << Tstar.value << ',' << opt(eta_sigma)
       << ',' << opt(eta_w) << ',' << energy.value << ',' << ratio_full << ',' << ratio_theorem << ','
       << ratio_energy << ',' << seed;
    return os.str();
  }
};

/// Energy witness sup over Q₀ drawn from the coarsest levels of one random
/// grid, each partitioned by its Whitney cells that hold w-atoms (cells
/// without w mass contribute nothing).
inline void energy_witness(const RieszDimension& rd, const DiscreteMeasure& sigma,
                           const DiscreteMeasure& w, const AuditConfig& cfg, ConstantsReport& rep) {
  const int n = rd.n();
  const Cube enc = enclosing_cube(sigma, w);
  const int top = -static_cast<int>(std::lround(std::log2(enc.side()))) - 1;
  const ShiftedGrid primal(n, top, top + 48, CounterRng(cfg.family.seed).derive(2000)());
  const ShiftedGrid dual(n, top, top + 48, CounterRng(cfg.family.seed).derive(2001)());
  std::set<GridCube> roots;
  for (const auto* mu : {&sigma, &w})
    for (std::size_t i = 0; i < mu->size(); ++i)
      for (int lv = top; lv < top + cfg.energy_roots; ++lv) roots.insert(primal.cube_containing(mu->point(i), lv));
  for (const auto& r : roots) {
    const Cube q0 = primal.cube(r);
    if (cube_mass(sigma, q0) <= 0.0) continue;
    WhitneyOptions wo;
    wo.C0 = cfg.C0;
    for (std::size_t k = 0; k < w.size(); ++k)
      if (q0.contains(w.point(k))) wo.probes.emplace_back(w.point(k).begin(), w.point(k).end());
    for (std::size_t k = 0; k < sigma.size(); ++k)
      if (q0.contains(sigma.point(k))) wo.probes.emplace_back(sigma.point(k).begin(), sigma.point(k).end());
    PartitionSpec spec;
    spec.root = q0;
    spec.C0 = cfg.C0;
    spec.C1 = 2.0 * cfg.goodness.r * cfg.C0;
    spec.cells = to_cubes(whitney(q0, dual, cfg.goodness, wo), dual);
    const EnergyAudit ea = energy_constant_audit(rd, sigma, w, spec, cfg.family.seed, 200);
    ++rep.energy.partitions;
    rep.energy.max_overlap = std::max(rep.energy.max_overlap, ea.max_overlap);
    if (!rep.energy.root || ea.value > rep.energy.value) {
      rep.energy.value = ea.value;
      rep.energy.root = q0;
    }
    rep.energy.dual = std::max(rep.energy.dual, ea.dual);
  }
}

inline ConstantsReport theorem_audit(const RieszDimension& rd, const DiscreteMeasure& sigma,
                                     const DiscreteMeasure& w, const AuditConfig& cfg = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  require(!rd.codimension_one(), ErrorKind::unsupported_codimension,
          "theorem_audit: d = n - 1 is excluded");
  require(sigma.dim() == rd.n() && w.dim() == rd.n(), ErrorKind::dimension_mismatch,
          "theorem_audit: dimension mismatch");
  cfg.goodness.validate();
  ConstantsReport rep;
  rep.n = rd.n();
  rep.d = rd.d();
  rep.holes = rd.d() > rd.n() - 1;
  if (!rep.holes)
    require(!share_atom(sigma, w), ErrorKind::precondition,
            "theorem_audit: weights share a point mass with d <= n - 1");
  rep.seed = cfg.family.seed;
  rep.goodness = cfg.goodness;
  rep.C0 = cfg.C0;

  const CubeFamily family = cfg.family_override ? *cfg.family_override : default_family(sigma, w, cfg.family);
  rep.family_provenance = family.provenance;
  rep.family_size = family.cubes.size();

  const KernelParams kp(rd);
  rep.N_forward = operator_norm(kp, sigma, w, cfg.norm);
  rep.N_dual = operator_norm(kp, w, sigma, cfg.norm);
  rep.N = rep.N_forward.value >= rep.N_dual.value ? rep.N_forward : rep.N_dual;
  rep.N_tol = cfg.norm.tol;
  rep.A2 = a2_constant(rd, sigma, w, family, rep.holes);
  rep.T = testing_constant(rd, sigma, w, family);
  rep.Tstar = testing_constant(rd, w, sigma, family);
  if (cfg.compute_eta) {
    rep.eta_sigma = ufd_eta(sigma, family, cfg.eta);
    rep.eta_w = ufd_eta(w, family, cfg.eta);
  }
  if (cfg.compute_energy) energy_witness(rd, sigma, w, cfg, rep);

  const double ra = std::sqrt(rep.A2.value);
  auto safe = [](double a, double b) { return b > 0.0 ? a / b : 0.0; };
  rep.ratio_full = safe(rep.N.value, ra + rep.T.value + rep.Tstar.value);
  rep.ratio_theorem = safe(rep.N.value, ra + rep.T.value);
  const double tmax = std::max(rep.T.value, rep.Tstar.value);
  rep.ratio_energy = safe(std::max(rep.energy.value, rep.energy.dual), rep.A2.value + tmax * tmax);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace riesz2w
