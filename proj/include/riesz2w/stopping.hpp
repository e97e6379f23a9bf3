#pragma once

// Stopping data 𝓕 for f ∈ L²(σ) built by the big-average and big-energy
// rules on the r-sublattice, its σ-Carleson and quasi-orthogonality
// checks, the functional-energy left side and the tent size functional.

#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "json.hpp"
#include "riesz2w/constants.hpp"

namespace riesz2w {

struct StoppingThresholds {
  double gamma = 4.0;              ///< average rule: [|f|]_Q >= Γ [|f|]_F
  double energy_multiplier = 10.0; ///< energy rule: Σ ... >= multiplier · 𝓡² σ(Q)
  std::optional<double> R;         ///< 𝓡; +inf disables the energy rule

  void validate() const {
    require(gamma >= 1.0, ErrorKind::input, "stopping: gamma must be at least 1");
    require(energy_multiplier > 0.0, ErrorKind::input, "stopping: energy multiplier must be positive");
    require(R.has_value(), ErrorKind::configuration, "stopping: the R value for the energy rule is missing");
    require(*R > 0.0, ErrorKind::input, "stopping: R must be positive");
  }
  bool energy_enabled() const { return R && std::isfinite(*R); }
};

enum class StopReason { root, big_average, big_energy };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::root: return "root";
    case StopReason::big_average: return "big-average";
    case StopReason::big_energy: return "big-energy";
  }
  return "?";
}

struct StoppingNode {
  GridCube cube;
  Cube geometry;
  int parent = -1;
  std::vector<int> children;
  StopReason reason = StopReason::root;
  double sigma_mass = 0.0;
  double avg_abs_f = 0.0;
  double energy_lhs = 0.0;  ///< energy-rule left side at selection (0 when not evaluated)
};

struct StoppingTree {
  std::vector<StoppingNode> nodes;  ///< nodes[0] is the root
  StoppingThresholds thresholds;
  GoodnessParams goodness;
  double C0 = 16.0;

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& nd : nodes)
      arr.push_back({{"level", nd.cube.level},
                     {"index", nd.cube.index},
                     {"center", nd.geometry.center()},
                     {"side", nd.geometry.side()},
                     {"parent", nd.parent},
                     {"reason", to_string(nd.reason)},
                     {"sigma_mass", nd.sigma_mass},
                     {"avg_abs_f", nd.avg_abs_f},
                     {"energy_lhs", nd.energy_lhs}});
    nlohmann::json th = {{"gamma", thresholds.gamma}, {"energy_multiplier", thresholds.energy_multiplier}};
    th["R"] = thresholds.R ? nlohmann::json(std::isfinite(*thresholds.R) ? nlohmann::json(*thresholds.R)
                                                                          : nlohmann::json("inf"))
                           : nlohmann::json(nullptr);
    return {{"nodes", arr},
            {"thresholds", th},
            {"epsilon", goodness.epsilon},
            {"r", goodness.r},
            {"C0", C0}};
  }
};

struct StoppingConfig {
  StoppingThresholds thresholds;
  GoodnessParams goodness{0.25, 9};
  double C0 = 16.0;
};

/// Σ_{K ∈ W_Q} P^g(σ·(F∖C₀K), K)² E(w,K)² w(K), over the Whitney cells of
/// Q that hold w mass.
inline double energy_rule_lhs(const RieszDimension& rd, const DiscreteMeasure& sigma,
                              const DiscreteMeasure& w, const Cube& q, const Cube& f,
                              const ShiftedGrid& dual, const GoodnessParams& gp, double c0) {
  WhitneyOptions wo;
  wo.C0 = c0;
  for (std::size_t k = 0; k < w.size(); ++k)
    if (q.contains(w.point(k))) wo.probes.emplace_back(w.point(k).begin(), w.point(k).end());
  if (wo.probes.size() < 2) return 0.0;
  const int top = whitney_top_level(q, dual, gp);
  if (top > dual.k_max()) return 0.0;
  double s = 0.0;
  for (const Cube& k : to_cubes(whitney(q, dual, gp, wo), dual)) {
    const EnergyValue e = energy(w, k, 2);
    if (e.squared == 0.0) continue;
    const Region reg = Region::difference(f, dilate(k, c0));
    const double p = poisson_avg(PoissonKind::gradient, rd, sigma, {}, k, &reg);
    s += p * p * e.squared * cube_mass(w, k);
  }
  return s;
}

/// Under each node F, the maximal cubes Q of the r-sublattice (levels
/// ≡ root level + 1 mod r) strictly inside F that trigger a rule become its
/// children. Descent stops at cubes holding a single σ-atom, below which
/// σ-averages no longer change.
inline StoppingTree build_stopping_tree(const RieszDimension& rd, const HaarCoefficients& hc_f,
                                        const DiscreteMeasure& sigma, const DiscreteMeasure& w,
                                        const ShiftedGrid& grid, const ShiftedGrid& dual,
                                        const StoppingConfig& cfg) {
  cfg.thresholds.validate();
  cfg.goodness.validate();
  require(hc_f.components() == 1, ErrorKind::input, "stopping: f must be scalar");
  require(hc_f.atom_count() == sigma.size(), ErrorKind::dimension_mismatch,
          "stopping: the decomposition does not match sigma");
  if (cfg.thresholds.energy_enabled())
    require(std::exp2(cfg.goodness.r * (1.0 - cfg.goodness.epsilon)) > 4.0 * cfg.C0,
            ErrorKind::configuration, "stopping: requires 2^{r(1-eps)} > 4 C0");
  const int r = cfg.goodness.r;
  StoppingTree tree;
  tree.thresholds = cfg.thresholds;
  tree.goodness = cfg.goodness;
  tree.C0 = cfg.C0;

  auto stats = [&](const std::vector<std::size_t>& atoms, double& mass) {
    double s = 0.0;
    mass = 0.0;
    for (std::size_t i : atoms) {
      mass += sigma.mass(i);
      s += sigma.mass(i) * std::abs(hc_f.value(i, 0));
    }
    return mass > 0.0 ? s / mass : 0.0;
  };

  std::vector<std::size_t> all(sigma.size());
  std::iota(all.begin(), all.end(), 0);
  StoppingNode root;
  root.cube = hc_f.root();
  root.geometry = hc_f.root_cube();
  root.avg_abs_f = stats(all, root.sigma_mass);
  tree.nodes.push_back(root);

  struct Work {
    int node;
    std::vector<std::size_t> atoms;
  };
  std::vector<Work> work{{0, all}};
  while (!work.empty()) {
    Work wk = std::move(work.back());
    work.pop_back();
    const StoppingNode fnode = tree.nodes[wk.node];
    struct Cand {
      int level;
      std::vector<std::size_t> atoms;
    };
    std::vector<Cand> frontier{{fnode.cube.level, wk.atoms}};
    while (!frontier.empty()) {
      Cand c = std::move(frontier.back());
      frontier.pop_back();
      const int lv = c.level == tree.nodes[0].cube.level ? c.level + 1 : c.level + r;
      if (lv > grid.k_max() || c.atoms.size() < 2) continue;
      std::map<GridCube, std::vector<std::size_t>> groups;
      for (std::size_t i : c.atoms) groups[grid.cube_containing(sigma.point(i), lv)].push_back(i);
      for (auto& [q, atoms] : groups) {
        double mass = 0.0;
        const double avg = stats(atoms, mass);
        if (mass <= 0.0) continue;
        const Cube qc = grid.cube(q);
        std::optional<StopReason> why;
        double lhs = 0.0;
        if (avg >= cfg.thresholds.gamma * fnode.avg_abs_f && avg > 0.0) {
          why = StopReason::big_average;
        } else if (cfg.thresholds.energy_enabled()) {
          lhs = energy_rule_lhs(rd, sigma, w, qc, fnode.geometry, dual, cfg.goodness, cfg.C0);
          const double rr = *cfg.thresholds.R;
          if (lhs > 0.0 && lhs >= cfg.thresholds.energy_multiplier * rr * rr * mass)
            why = StopReason::big_energy;
        }
        if (why) {
          require(fnode.geometry.contains(qc) && qc.side() < fnode.geometry.side(), ErrorKind::anomaly,
                  "stopping: node is not strictly nested in its parent");
          StoppingNode nd;
          nd.cube = q;
          nd.geometry = qc;
          nd.parent = wk.node;
          nd.reason = *why;
          nd.sigma_mass = mass;
          nd.avg_abs_f = avg;
          nd.energy_lhs = lhs;
          const int id = static_cast<int>(tree.nodes.size());
          tree.nodes.push_back(nd);
          tree.nodes[wk.node].children.push_back(id);
          work.push_back({id, std::move(atoms)});
        } else {
          frontier.push_back({lv, std::move(atoms)});
        }
      }
    }
  }
  return tree;
}

struct CarlesonResult {
  double max_ratio = 0.0;
  int argmax_node = -1;
  std::size_t degenerate_nodes = 0;
};

/// max over F of Σ_{children F′} σ(F′) / σ(F).
inline CarlesonResult carleson_check(const StoppingTree& tree, const DiscreteMeasure& sigma) {
  CarlesonResult res;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& nd = tree.nodes[i];
    const double sf = cube_mass(sigma, nd.geometry);
    if (sf <= 0.0) {
      ++res.degenerate_nodes;
      continue;
    }
    double s = 0.0;
    for (int c : nd.children) s += cube_mass(sigma, tree.nodes[c].geometry);
    if (s / sf > res.max_ratio) res.max_ratio = s / sf, res.argmax_node = static_cast<int>(i);
  }
  return res;
}

/// 1/Γ plus the energy-rule share 𝓔²/(multiplier·𝓡²).
inline double carleson_bound(const StoppingThresholds& th, double energy_witness2) {
  double b = 1.0 / th.gamma;
  if (th.energy_enabled()) b += energy_witness2 / (th.energy_multiplier * *th.R * *th.R);
  return b;
}

struct ProjectionNode {
  double f_norm2 = 0.0;  ///< ‖P^σ_F f‖²
  double g_norm2 = 0.0;  ///< ‖P^w_F g‖²
  std::vector<std::size_t> f_cells;
  std::vector<std::size_t> g_cells;  ///< indices running through the pieces of the g forest
};

struct Projections {
  std::vector<ProjectionNode> nodes;
  double quasi_orthogonality = 0.0;
  std::size_t unassigned_g = 0;  ///< g cubes inside the root but not ⋐_r any node
};

/// f cells go to π_𝓕 Q (minimal node containing Q); g cells to π̇_𝓕 Q
/// (minimal node F with Q ⊆ F and 2^r ℓ(Q) <= ℓ(F)).
/// `hc_g` may be a forest; ‖g‖ is taken over all of its pieces.
inline Projections stopping_projections(const HaarCoefficients& hc_f, const ShiftedGrid& grid_f,
                                        std::span<const HaarCoefficients> hc_g, const ShiftedGrid& grid_g,
                                        const StoppingTree& tree) {
  const int r = tree.goodness.r;
  std::vector<int> by_size(tree.nodes.size());
  std::iota(by_size.begin(), by_size.end(), 0);
  std::sort(by_size.begin(), by_size.end(), [&](int a, int b) {
    return tree.nodes[a].geometry.side() < tree.nodes[b].geometry.side();
  });
  const Cube& root = tree.nodes[0].geometry;
  Projections out;
  out.nodes.resize(tree.nodes.size());
  for (std::size_t c = 0; c < hc_f.cells().size(); ++c) {
    const Cube q = grid_f.cube(hc_f.cells()[c].cube);
    require(root.contains(q), ErrorKind::coverage, "stopping_projections: f cube outside the root");
    for (int id : by_size)
      if (tree.nodes[id].geometry.contains(q)) {
        out.nodes[id].f_cells.push_back(c);
        out.nodes[id].f_norm2 += hc_f.cells()[c].total_diff_norm2();
        break;
      }
  }
  std::size_t offset = 0;
  double g2 = 0.0;
  for (const auto& piece : hc_g) {
    g2 += piece.norm2();
    for (std::size_t c = 0; c < piece.cells().size(); ++c) {
      const Cube q = grid_g.cube(piece.cells()[c].cube);
      require(root.contains(q), ErrorKind::coverage, "stopping_projections: g cube outside the root");
      bool placed = false;
      for (int id : by_size) {
        const Cube& f = tree.nodes[id].geometry;
        if (f.contains(q) && std::ldexp(q.side(), r) <= f.side() * (1.0 + 1e-12)) {
          out.nodes[id].g_cells.push_back(offset + c);
          out.nodes[id].g_norm2 += piece.cells()[c].total_diff_norm2();
          placed = true;
          break;
        }
      }
      if (!placed) ++out.unassigned_g;
    }
    offset += piece.cells().size();
  }
  const double nf = std::sqrt(hc_f.norm2()), ng = std::sqrt(g2);
  if (nf > 0.0 && ng > 0.0) {
    double s = 0.0;
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
      const auto& nd = tree.nodes[id];
      s += (nd.avg_abs_f * std::sqrt(nd.sigma_mass) + std::sqrt(out.nodes[id].f_norm2)) *
           std::sqrt(out.nodes[id].g_norm2);
    }
    out.quasi_orthogonality = s / (nf * ng);
  }
  return out;
}

inline Projections stopping_projections(const HaarCoefficients& hc_f, const ShiftedGrid& grid_f,
                                        const HaarCoefficients& hc_g, const ShiftedGrid& grid_g,
                                        const StoppingTree& tree) {
  return stopping_projections(hc_f, grid_f, std::span<const HaarCoefficients>(&hc_g, 1), grid_g, tree);
}

/// Decompositions of g against w over the level-`level` dual cubes lying in
/// `root`; atoms of cubes that straddle the boundary of `root` are left out.
inline std::vector<HaarCoefficients> inner_forest(const DiscreteMeasure& w, std::span<const double> g,
                                                  int components, const ShiftedGrid& dual, const Cube& root,
                                                  int level) {
  require(g.empty() || g.size() == w.size() * components, ErrorKind::dimension_mismatch,
          "inner_forest: values must be atoms x components");
  std::vector<double> c, m, v;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!root.contains(dual.cube(dual.cube_containing(w.point(i), level)))) continue;
    c.insert(c.end(), w.point(i).begin(), w.point(i).end());
    m.push_back(w.mass(i));
    if (!g.empty()) v.insert(v.end(), g.begin() + i * components, g.begin() + (i + 1) * components);
  }
  if (m.empty()) return {};
  return martingale_forest(DiscreteMeasure(w.dim(), std::move(c), std::move(m)), dual, level, v, components);
}

/// V_F: maximal (ε, r)-good dual cubes K ⊆ F with 2^r ℓ(K) <= ℓ(πF) that
/// hold w mass (πF = F at the root).
inline std::vector<GridCube> functional_energy_cells(const Cube& f, const Cube& parent,
                                                     const DiscreteMeasure& w, const ShiftedGrid& dual,
                                                     const GoodnessParams& gp) {
  const int top = whitney_top_level(parent, dual, gp);
  std::vector<GridCube> out;
  if (top > dual.k_max()) return out;
  std::map<GridCube, std::vector<std::size_t>> frontier;
  for (std::size_t k = 0; k < w.size(); ++k)
    if (f.contains(w.point(k))) frontier[dual.cube_containing(w.point(k), std::max(top, dual.k_min()))].push_back(k);
  while (!frontier.empty()) {
    std::map<GridCube, std::vector<std::size_t>> next;
    for (auto& [c, atoms] : frontier) {
      const Cube cc = dual.cube(c);
      if (f.contains(cc) && is_good(c, dual, gp)) {
        out.push_back(c);
        continue;
      }
      if (c.level >= dual.k_max()) continue;
      for (std::size_t k : atoms) next[dual.cube_containing(w.point(k), c.level + 1)].push_back(k);
    }
    frontier = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Σ_F Σ_{K∈V_F} P^g(f·(R^n∖F), K)² ‖Σ_{Q⊆K, π̇Q=F} Δ^w_Q (x/ℓ(K))‖²_w / ‖f‖²_σ,
/// with hc_x the decomposition of the coordinates against w on `dual`.
inline double functional_energy_sum(const RieszDimension& rd, const DiscreteMeasure& sigma,
                                    std::span<const double> f, const DiscreteMeasure& w,
                                    const StoppingTree& tree, std::span<const HaarCoefficients> hc_x,
                                    const ShiftedGrid& dual) {
  const CarlesonResult cr = carleson_check(tree, sigma);
  require(cr.max_ratio <= 0.5, ErrorKind::precondition, "functional_energy_sum: tree is not sigma-Carleson");
  detail::check_fvals(f, sigma, "functional_energy_sum");
  for (std::size_t i = 0; i < sigma.size(); ++i)
    require(detail::fval(f, i) >= 0.0, ErrorKind::input, "functional_energy_sum: f must be nonnegative");
  double f2 = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) f2 += sigma.mass(i) * detail::fval(f, i) * detail::fval(f, i);
  if (f2 == 0.0) return 0.0;

  // π̇ for every coordinate Haar cube.
  const int r = tree.goodness.r;
  std::vector<int> by_size(tree.nodes.size());
  std::iota(by_size.begin(), by_size.end(), 0);
  std::sort(by_size.begin(), by_size.end(), [&](int a, int b) {
    return tree.nodes[a].geometry.side() < tree.nodes[b].geometry.side();
  });
  std::vector<int> owner;
  std::vector<Cube> qcubes;
  std::vector<double> qnorm2;
  for (const auto& piece : hc_x)
    for (const auto& cell : piece.cells()) {
      qcubes.push_back(dual.cube(cell.cube));
      qnorm2.push_back(cell.total_diff_norm2());
      owner.push_back(-1);
      for (int id : by_size) {
        const Cube& fc = tree.nodes[id].geometry;
        if (fc.contains(qcubes.back()) && std::ldexp(qcubes.back().side(), r) <= fc.side() * (1.0 + 1e-12)) {
          owner.back() = id;
          break;
        }
      }
    }

  double total = 0.0;
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const auto& nd = tree.nodes[id];
    const Cube& parent = nd.parent >= 0 ? tree.nodes[nd.parent].geometry : nd.geometry;
    const Region outside = Region::complement(nd.geometry);
    for (const auto& kc : functional_energy_cells(nd.geometry, parent, w, dual, tree.goodness)) {
      const Cube k = dual.cube(kc);
      double d2 = 0.0;
      for (std::size_t c = 0; c < qcubes.size(); ++c)
        if (owner[c] == static_cast<int>(id) && k.contains(qcubes[c])) d2 += qnorm2[c];
      if (d2 == 0.0) continue;
      const double p = poisson_avg(PoissonKind::gradient, rd, sigma, f, k, &outside);
      total += p * p * d2 / (k.side() * k.side());
    }
  }
  return total / f2;
}

/// λ = Σ ‖Δ^w_P x‖²_w δ_{(x_P, ℓ(P))}.
struct TentMeasure {
  struct Atom {
    Point x;
    double height = 0.0;
    double weight = 0.0;
  };
  std::vector<Atom> atoms;

  static TentMeasure from_haar(std::span<const HaarCoefficients> hc_x, const ShiftedGrid& grid) {
    TentMeasure t;
    for (const auto& piece : hc_x)
      for (const auto& c : piece.cells()) {
        const Cube q = grid.cube(c.cube);
        const double wt = c.total_diff_norm2();
        if (wt > 0.0) t.atoms.push_back({q.center(), q.side(), wt});
      }
    return t;
  }

  /// λ(∪ Box_K), Box_K = K × [0, ℓ(K)).
  double tent_mass(const std::vector<Cube>& boxes) const {
    double s = 0.0;
    for (const auto& a : atoms)
      for (const auto& k : boxes)
        if (a.height < k.side() && k.contains(a.x)) {
          s += a.weight;
          break;
        }
    return s;
  }
};

using WhitneyProvider = std::function<std::vector<Cube>(const Cube&)>;

/// sup over σ-charged Q of P^g(σ·(F∖Q), Q)² λ(Tent_Q) / (σ(Q) ℓ(Q)²).
inline Witness tent_size(const TentMeasure& lambda, const DiscreteMeasure& sigma, const RieszDimension& rd,
                         const CubeFamily& family, const Cube& f, const WhitneyProvider& whitney_of) {
  Witness best;
  for (const auto& q : family.cubes) {
    const double sq = cube_mass(sigma, q);
    if (sq <= 0.0) continue;
    ++best.evaluated;
    const double tm = lambda.tent_mass(whitney_of(q));
    const Region reg = Region::difference(f, q);
    const double p = poisson_avg(PoissonKind::gradient, rd, sigma, {}, q, &reg);
    detail::offer(best, p * p * tm / (sq * q.side() * q.side()), q, true);
  }
  return best;
}

}  // namespace riesz2w
