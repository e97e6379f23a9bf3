#pragma once

// Deterministic weight generators: sampled Lebesgue and power weights,
// a planar Ahlfors-David regular Cantor measure, hyperplane-concentrated
// clouds, and the four-atom counterexample weight for n = 2.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"
#include "riesz2w/geometry.hpp"
#include "riesz2w/kernel.hpp"
#include "riesz2w/rng.hpp"

namespace riesz2w {

namespace detail {

inline DiscreteMeasure grid_sample(int n, int resolution, const Cube& cube, double alpha) {
  require(n >= 1 && cube.dim() == n, ErrorKind::dimension_mismatch, "generator: cube dimension differs");
  require(resolution >= 2, ErrorKind::input, "generator: resolution must be at least 2");
  const double h = cube.side() / resolution;
  const double vol = std::pow(h, n);
  std::size_t count = 1;
  for (int a = 0; a < n; ++a) {
    require(count <= (std::size_t{1} << 26) / static_cast<std::size_t>(resolution), ErrorKind::resource,
            "generator: too many atoms");
    count *= static_cast<std::size_t>(resolution);
  }
  std::vector<double> coords, masses;
  coords.reserve(count * n);
  masses.reserve(count);
  std::vector<int> idx(n, 0);
  for (std::size_t c = 0; c < count; ++c) {
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) {
      const double x = cube.lo(a) + (idx[a] + 0.5) * h;
      coords.push_back(x);
      r2 += x * x;
    }
    double m = vol;
    if (alpha != 0.0) {
      require(r2 > 0.0 || alpha > 0.0, ErrorKind::input, "power_doubling: a cell center sits at the origin");
      m *= std::pow(std::sqrt(r2), alpha);
    }
    masses.push_back(m);
    for (int a = 0; a < n && ++idx[a] == resolution; ++a) idx[a] = 0;
  }
  return DiscreteMeasure(n, std::move(coords), std::move(masses));
}

}  // namespace detail

/// Atoms at the centers of a resolution^n grid over `cube`, mass = cell volume.
inline DiscreteMeasure lebesgue_sample(int n, int resolution, const Cube& cube) {
  return detail::grid_sample(n, resolution, cube, 0.0);
}

/// |x|^α sampled at cell centers times the cell volume.
inline DiscreteMeasure power_doubling(double alpha, int n, int resolution, const Cube& cube) {
  require(std::isfinite(alpha) && alpha > -n, ErrorKind::input, "power_doubling: requires alpha > -n");
  return detail::grid_sample(n, resolution, cube, alpha);
}

/// Four-corner self-similar set in [0,1)² with ratio ρ = 4^{-1/d}; equal
/// masses at the centers of the 4^depth cells of generation `depth`.
inline DiscreteMeasure cantor_ad(int n, double d, int depth) {
  require(n == 2, ErrorKind::input, "cantor_ad: only n = 2 is supported");
  require(std::isfinite(d) && d > 0.0 && d <= 2.0, ErrorKind::input, "cantor_ad: requires 0 < d <= 2");
  require(depth >= 0, ErrorKind::input, "cantor_ad: depth must be nonnegative");
  require(depth <= 12, ErrorKind::resource, "cantor_ad: depth exceeds the memory budget");
  const double rho = std::pow(4.0, -1.0 / d);
  std::vector<double> lo{0.0, 0.0};
  double side = 1.0;
  for (int g = 0; g < depth; ++g) {
    std::vector<double> next;
    next.reserve(lo.size() * 4);
    const double step = side * (1.0 - rho);
    for (std::size_t i = 0; i < lo.size(); i += 2)
      for (int c = 0; c < 4; ++c) {
        next.push_back(lo[i] + ((c & 1) ? step : 0.0));
        next.push_back(lo[i + 1] + ((c & 2) ? step : 0.0));
      }
    lo = std::move(next);
    side *= rho;
  }
  const std::size_t m = lo.size() / 2;
  for (double& x : lo) x += 0.5 * side;
  return DiscreteMeasure(2, std::move(lo), std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

/// Grid on the patch [0,1)^{n-1} × {1/2}, the last coordinate jittered by
/// thickness·frac(i·φ); total mass 1.
inline DiscreteMeasure hyperplane_concentrated(int n, double thickness, int resolution) {
  require(n >= 2, ErrorKind::input, "hyperplane_concentrated: requires n >= 2");
  require(thickness >= 0.0 && std::isfinite(thickness), ErrorKind::input,
          "hyperplane_concentrated: thickness must be nonnegative");
  require(resolution >= 2, ErrorKind::input, "hyperplane_concentrated: resolution must be at least 2");
  std::size_t count = 1;
  for (int a = 0; a + 1 < n; ++a) {
    require(count <= (std::size_t{1} << 24) / static_cast<std::size_t>(resolution), ErrorKind::resource,
            "hyperplane_concentrated: too many atoms");
    count *= static_cast<std::size_t>(resolution);
  }
  const double phi = std::numbers::phi - 1.0;
  std::vector<double> coords;
  coords.reserve(count * n);
  std::vector<int> idx(n - 1, 0);
  for (std::size_t i = 0; i < count; ++i) {
    for (int a = 0; a + 1 < n; ++a) coords.push_back((idx[a] + 0.5) / resolution);
    const double t = static_cast<double>(i) * phi;
    coords.push_back(0.5 + thickness * (t - std::floor(t)));
    for (int a = 0; a + 1 < n && ++idx[a] == resolution; ++a) idx[a] = 0;
  }
  return DiscreteMeasure(n, std::move(coords), std::vector<double>(count, 1.0 / static_cast<double>(count)));
}

/// Rotation by `angle` in the (a, b) coordinate plane about `center`.
inline DiscreteMeasure rotate(const DiscreteMeasure& mu, double angle, std::span<const double> center,
                              int a = 0, int b = 1) {
  const int n = mu.dim();
  require(static_cast<int>(center.size()) == n, ErrorKind::dimension_mismatch, "rotate: center dimension");
  require(a >= 0 && b >= 0 && a < n && b < n && a != b, ErrorKind::input, "rotate: bad coordinate plane");
  const double c = std::cos(angle), s = std::sin(angle);
  std::vector<double> coords(mu.coords());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double x = coords[i * n + a] - center[a], y = coords[i * n + b] - center[b];
    coords[i * n + a] = center[a] + c * x - s * y;
    coords[i * n + b] = center[b] + s * x + c * y;
  }
  return DiscreteMeasure(n, std::move(coords), mu.masses());
}

/// max over σ-charged cubes of w(2Q)/w(Q).
inline double doubling_ratio(const DiscreteMeasure& w, const std::vector<Cube>& cubes) {
  double best = 0.0;
  for (const auto& q : cubes) {
    const double m = cube_mass(w, q);
    if (m > 0.0) best = std::max(best, cube_mass(w, dilate(q, 2.0)) / m);
  }
  return best;
}

struct AdBand {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  std::size_t samples = 0;
};

/// min/max of w(B(x,r))/r^d over x drawn from the support and r
/// log-uniform in [r_min, r_max].
inline AdBand ad_ratio_band(const DiscreteMeasure& w, double d, double r_min, double r_max,
                            std::size_t samples, std::uint64_t seed) {
  require(!w.empty(), ErrorKind::empty_cube, "ad_ratio_band: empty measure");
  require(r_min > 0.0 && r_max >= r_min, ErrorKind::input, "ad_ratio_band: bad radius range");
  CounterRng rng(seed);
  AdBand band;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto x = w.point(rng.below(w.size()));
    const double r = r_min * std::pow(r_max / r_min, rng.uniform());
    double m = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
      if (distance(x, w.point(i)) < r) m += w.mass(i);
    const double v = m / std::pow(r, d);
    band.lo = std::min(band.lo, v);
    band.hi = std::max(band.hi, v);
    ++band.samples;
  }
  return band;
}

struct CounterexampleRecord {
  double epsilon = 0.0;
  double lambda = 0.0;
  double d = 0.0;
  double side_S = 0.0;            ///< ℓ(S)
  double support_distance = 0.0;  ///< dist(S, supp σ)
  double required_distance = 0.0; ///< ε^{-1} ℓ(S)
  double normalization = 0.0;     ///< ∫ 1/(1+dist(S,x)^{d+1}) dσ
  Vec R_at_origin;
  double sup_R_on_S = 0.0;
  double lhs = 0.0;               ///< ε^{-1} sup_S |R_σ 1|
  double rhs = 0.0;               ///< ∫ ℓ(S)/(ℓ(S)^{d+1}+dist(S,x)^{d+1}) dσ
  double d1R1 = 0.0, d1R2 = 0.0;  ///< finite-difference ∂₁R₁(0), ∂₁R₂(0)
  double taylor_constant = 0.0;   ///< max_S |R(x) - R(0) - x·∇R(0)| / |x|²
  bool pass = false;

  nlohmann::json to_json() const {
    return {{"epsilon", epsilon},
            {"lambda", lambda},
            {"d", d},
            {"side_S", side_S},
            {"support_distance", support_distance},
            {"required_distance", required_distance},
            {"normalization", normalization},
            {"R_at_origin", R_at_origin},
            {"sup_R_on_S", sup_R_on_S},
            {"lhs", lhs},
            {"rhs", rhs},
            {"d1R1", d1R1},
            {"d1R2", d1R2},
            {"taylor_constant", taylor_constant},
            {"pass", pass}};
  }
};

struct Counterexample {
  DiscreteMeasure sigma;
  CounterexampleRecord record;
};

/// Equal atoms at (±λ/√d, ±λ), λ = ε^{-2}; S = [-λ^{-1/2}, λ^{-1/2}] × {0}.
inline Counterexample counterexample_weight(int n, double d, double eps) {
  require(n == 2, ErrorKind::input, "counterexample_weight: only n = 2 is implemented");
  require(std::isfinite(d) && d > 0.0 && d <= 2.0 && d != 1.0, ErrorKind::input,
          "counterexample_weight: requires 0 < d <= 2 and d != 1");
  require(std::isfinite(eps) && eps > 0.0 && eps < 1.0, ErrorKind::input,
          "counterexample_weight: requires 0 < eps < 1");
  const double lambda = 1.0 / (eps * eps);
  const double rho = lambda / std::sqrt(d);
  const double half = 1.0 / std::sqrt(lambda);
  const double lS = 2.0 * half;
  auto dist_S = [&](double x, double y) {
    const double dx = std::max(0.0, std::abs(x) - half);
    return std::hypot(dx, y);
  };
  const double D = dist_S(rho, lambda);
  const double m = (1.0 + std::pow(D, d + 1.0)) / 4.0;
  std::vector<double> coords{rho, lambda, -rho, lambda, rho, -lambda, -rho, -lambda};
  Counterexample out{DiscreteMeasure(2, coords, std::vector<double>(4, m)), {}};
  auto& rec = out.record;
  rec.epsilon = eps;
  rec.lambda = lambda;
  rec.d = d;
  rec.side_S = lS;
  rec.support_distance = D;
  rec.required_distance = lS / eps;
  for (std::size_t i = 0; i < 4; ++i) {
    const double t = dist_S(coords[2 * i], coords[2 * i + 1]);
    rec.normalization += m / (1.0 + std::pow(t, d + 1.0));
    rec.rhs += m * lS / (std::pow(lS, d + 1.0) + std::pow(t, d + 1.0));
  }
  const KernelParams kp{RieszDimension(2, d)};
  auto R = [&](double x) {
    const double p[2] = {x, 0.0};
    return riesz_apply(kp, out.sigma, {}, p);
  };
  rec.R_at_origin = R(0.0);
  const double h = 1e-3;
  const Vec rp = R(h), rm = R(-h);
  rec.d1R1 = (rp[0] - rm[0]) / (2.0 * h);
  rec.d1R2 = (rp[1] - rm[1]) / (2.0 * h);
  for (int k = 0; k <= 100; ++k) {
    const double x = -half + lS * k / 100.0;
    const Vec r = R(x);
    rec.sup_R_on_S = std::max(rec.sup_R_on_S, std::hypot(r[0], r[1]));
    if (x != 0.0) {
      const double e0 = r[0] - rec.R_at_origin[0] - x * rec.d1R1;
      const double e1 = r[1] - rec.R_at_origin[1] - x * rec.d1R2;
      rec.taylor_constant = std::max(rec.taylor_constant, std::hypot(e0, e1) / (x * x));
    }
  }
  rec.lhs = rec.sup_R_on_S / eps;
  rec.pass = rec.support_distance >= rec.required_distance && std::abs(rec.d1R1) <= 1e-8 &&
             std::abs(rec.d1R2) <= 1e-8 && rec.lhs <= rec.rhs;
  return out;
}

enum class GeneratorKind { lebesgue, power, cantor, hyperplane, counterexample };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::lebesgue;
  int n = 2;
  int resolution = 16;
  double alpha = 0.0;
  double d = 2.0;
  int depth = 5;
  double thickness = 0.0;
  double epsilon = 0.1;
  double angle = 0.0;  ///< applied to hyperplane clouds about (1/2, ..., 1/2)
  Cube cube = Cube::from_corner(Point(2, 0.0), 1.0);

  void validate() const {
    require(resolution >= 2, ErrorKind::input, "generate: resolution must be at least 2");
    if (kind == GeneratorKind::cantor) {
      const double rho = std::pow(4.0, -1.0 / d);
      require(rho > 0.0 && rho <= 0.5, ErrorKind::input, "generate: Cantor ratio must lie in (0, 1/2]");
    }
    if (kind == GeneratorKind::counterexample)
      require(epsilon > 0.0 && epsilon < 1.0, ErrorKind::input, "generate: eps must lie in (0, 1)");
  }
};

inline GeneratorKind parse_generator_kind(const std::string& s) {
  if (s == "lebesgue") return GeneratorKind::lebesgue;
  if (s == "power") return GeneratorKind::power;
  if (s == "cantor") return GeneratorKind::cantor;
  if (s == "hyperplane") return GeneratorKind::hyperplane;
  if (s == "counterexample") return GeneratorKind::counterexample;
  fail(ErrorKind::input, "unknown generator kind '" + s + "'");
}

/// The measure and, for the counterexample, its verification record.
inline std::pair<DiscreteMeasure, nlohmann::json> generate(const GeneratorSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case GeneratorKind::lebesgue: return {lebesgue_sample(spec.n, spec.resolution, spec.cube), nullptr};
    case GeneratorKind::power: return {power_doubling(spec.alpha, spec.n, spec.resolution, spec.cube), nullptr};
    case GeneratorKind::cantor: return {cantor_ad(spec.n, spec.d, spec.depth), nullptr};
    case GeneratorKind::hyperplane: {
      DiscreteMeasure m = hyperplane_concentrated(spec.n, spec.thickness, spec.resolution);
      if (spec.angle != 0.0) m = rotate(m, spec.angle, Point(spec.n, 0.5), 0, spec.n - 1);
      return {std::move(m), nullptr};
    }
    case GeneratorKind::counterexample: {
      auto ce = counterexample_weight(spec.n, spec.d, spec.epsilon);
      return {std::move(ce.sigma), ce.record.to_json()};
    }
  }
  fail(ErrorKind::input, "generate: unknown kind");
}

}  // namespace riesz2w
