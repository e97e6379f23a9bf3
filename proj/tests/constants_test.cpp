#include <gtest/gtest.h>

#include "support.hpp"

using namespace riesz2w;
using riesz2w::testing::random_measure;
using riesz2w::testing::rel_err;

namespace {

// Frozen from the first seeded run.
constexpr double kMonotonicityMax = 0.70;
constexpr double kLebesgueEta = 0.1;

CubeFamily family_of(std::vector<Cube> cubes) {
  CubeFamily f;
  f.cubes = std::move(cubes);
  return f;
}

/// Lebesgue sample on [0,1)² and a copy shifted by a quarter spacing.
std::pair<DiscreteMeasure, DiscreteMeasure> lebesgue_pair(int res) {
  const auto a = lebesgue_sample(2, res, Cube::from_corner({0.0, 0.0}, 1.0));
  const double h = 0.25 / res;
  const auto b = lebesgue_sample(2, res, Cube::from_corner({h, h}, 1.0));
  return {a, b};
}

/// ∫_{[0,1)²} ℓ²/(ℓ⁴ + dist(x, Q)⁴) dx by the midpoint rule.
double reproducing_integral(const Cube& q, int m) {
  double s = 0.0;
  const double h = 1.0 / m, l = q.side();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double x = (i + 0.5) * h, y = (j + 0.5) * h;
      const double dx = std::max({q.lo(0) - x, 0.0, x - q.hi(0)});
      const double dy = std::max({q.lo(1) - y, 0.0, y - q.hi(1)});
      const double t2 = dx * dx + dy * dy;
      s += l * l / (l * l * l * l + t2 * t2) * h * h;
    }
  return s;
}

}  // namespace

TEST(A2, Examples) {
  const RieszDimension rd(2, 2.0);
  const Cube q(Point{0.0, 0.0}, 1.0);
  const DiscreteMeasure w(2, {0.7, 0.7}, {1.0});
  EXPECT_EQ(a2_constant(rd, DiscreteMeasure(2), w, family_of({q}), true).value, 0.0);

  const double t = 4.0;
  const DiscreteMeasure s0(2, {0.0, 0.0}, {1.0}), wt(2, {t, 0.0}, {1.0});
  const double dd = t - 0.5;
  const auto a = a2_constant(rd, s0, wt, family_of({q}), true);
  EXPECT_LE(rel_err(a.value, 1.0 / (1.0 + std::pow(dd, 4.0))), 1e-14);
  EXPECT_EQ(*a.cube, q);
  EXPECT_THROW(a2_constant(rd, s0, wt, family_of({}), true), Error);
}

TEST(A2, LebesgueMatchesQuadrature) {
  const RieszDimension rd(2, 2.0);
  const std::vector<Cube> cubes{Cube::from_corner({0.0, 0.0}, 1.0), Cube::from_corner({0.0, 0.0}, 0.5),
                                Cube::from_corner({0.25, 0.5}, 0.25)};
  double oracle = 0.0;
  for (const auto& q : cubes) oracle = std::max(oracle, 2.0 * q.volume() / std::pow(q.side(), 2.0) *
                                                            reproducing_integral(q, 1024));
  double prev = 0.0;
  for (int res : {64, 128}) {
    const auto leb = lebesgue_sample(2, res, Cube::from_corner({0.0, 0.0}, 1.0));
    const double v = a2_constant(rd, leb, leb, family_of(cubes), false).value;
    EXPECT_LE(rel_err(v, oracle), 0.05);
    if (prev > 0.0) EXPECT_LE(rel_err(v, prev), 0.05);
    prev = v;
  }
}

TEST(Testing, Examples) {
  const RieszDimension rd(2, 2.0);
  const DiscreteMeasure a(2, {0.1, 0.2}, {1.0}), b(2, {1.1, 0.2}, {1.0});
  const auto fam = family_of({Cube(Point{0.6, 0.2}, 2.0)});
  EXPECT_LE(rel_err(testing_constant(rd, a, b, fam).value, 1.0), 1e-14);
  EXPECT_EQ(testing_constant(rd, a, DiscreteMeasure(2), fam).value, 0.0);
  try {
    testing_constant(rd, a, b, family_of({Cube(Point{5.0, 5.0}, 1.0)}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::undefined_sup);
  }
  try {
    testing_constant(rd, a, a, fam);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(Testing, BelowOperatorNorm) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const int n = 1 + static_cast<int>(s % 3);
    const RieszDimension rd(n, n == 1 ? 0.5 : n - 0.5);
    const auto sigma = random_measure(n, 30, 10 + s), w = random_measure(n, 25, 20 + s);
    const auto fam = default_family(sigma, w, {2, s, true});
    OperatorNormOptions o;
    o.tol = 1e-13;
    const double forward = operator_norm(KernelParams(rd), sigma, w, o).value;
    const double dual = operator_norm(KernelParams(rd), w, sigma, o).value;
    EXPECT_LE(testing_constant(rd, sigma, w, fam).value, forward * (1.0 + 1e-9));
    EXPECT_LE(testing_constant(rd, w, sigma, fam).value, dual * (1.0 + 1e-9));
  }
}

TEST(Eta, Examples) {
  std::vector<double> c, m;
  for (int i = 0; i < 20; ++i) c.push_back(0.05 * i), c.push_back(0.3), m.push_back(1.0 + 0.1 * i);
  const DiscreteMeasure line(2, c, m);
  const auto fam = family_of({Cube::from_corner({0.0, 0.0}, 1.0)});
  const auto e = ufd_eta(line, fam);
  EXPECT_NEAR(e.value, 0.0, 1e-15);
  EXPECT_NEAR(std::abs(e.normal[1]), 1.0, 1e-12);
  EXPECT_EQ(ufd_eta(DiscreteMeasure(2, {0.5, 0.5}, {1.0}), fam).value, 0.0);
  EXPECT_THROW(ufd_eta(line, family_of({Cube(Point{5.0, 5.0}, 1.0)})), Error);

  std::vector<double> c3;
  CounterRng rng(3);
  for (int i = 0; i < 30; ++i) c3.push_back(rng.uniform()), c3.push_back(rng.uniform()), c3.push_back(0.5);
  const DiscreteMeasure flat(3, c3, std::vector<double>(30, 1.0));
  EXPECT_NEAR(ufd_eta(flat, family_of({Cube::from_corner({0.0, 0.0, 0.0}, 1.0)})).value, 0.0, 1e-12);
}

TEST(Eta, PlaneScanMatchesBruteForce) {
  const auto w = random_measure(2, 40, 5);
  const auto fam = family_of({Cube::from_corner({0.0, 0.0}, 1.0)});
  const double got = ufd_eta(w, fam).value;
  const double wq = w.total_mass();
  double brute = 1e300;
  for (int t = 0; t < 20000; ++t) {
    const double th = std::numbers::pi * t / 20000;
    const double nx = std::cos(th), ny = std::sin(th);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t j = 0; j < w.size(); ++j) {
        if (i == j) continue;
        const double dx = w.point(j)[0] - w.point(i)[0], dy = w.point(j)[1] - w.point(i)[1];
        s += w.mass(i) * w.mass(j) * std::abs(nx * dx + ny * dy) / std::hypot(dx, dy);
      }
    brute = std::min(brute, s / (wq * wq));
  }
  EXPECT_LE(got, brute + 1e-12);
  EXPECT_GE(got, brute - 1e-6);
}

TEST(Eta, LebesgueIsFullDimensional) {
  const auto leb = lebesgue_sample(2, 64, Cube::from_corner({0.0, 0.0}, 1.0));
  const auto e = ufd_eta(leb, family_of({Cube::from_corner({0.0, 0.0}, 1.0)}));
  EXPECT_GE(e.value, kLebesgueEta);
}

TEST(Monotonicity, DegenerateInputs) {
  const RieszDimension rd(2, 2.0);
  const Cube q(Point{0.0, 0.0}, 1.0);
  const auto sigma = random_measure(2, 10, 1, 20.0, 30.0);
  const auto w = random_measure(2, 10, 2, -0.5, 0.5);
  const std::vector<double> f(10, 1.0), zero(10, 0.0);
  std::vector<double> g(10, 0.0);
  g[0] = w.mass(1), g[1] = -w.mass(0);
  EXPECT_EQ(monotonicity_ratio(rd, sigma, f, w, zero, q).ratio, 0.0);
  EXPECT_EQ(monotonicity_ratio(rd, sigma, zero, w, g, q).ratio, 0.0);
  EXPECT_GT(monotonicity_ratio(rd, sigma, f, w, g, q).ratio, 0.0);
}

TEST(Monotonicity, SeededAuditBounded) {
  const auto res = monotonicity_audit(RieszDimension(2, 2.0), 500, 7);
  std::printf("monotonicity max ratio %.6g\n", res.max_ratio);
  EXPECT_EQ(res.anomalies, 0u);
  EXPECT_LE(res.max_ratio, kMonotonicityMax);
  std::size_t total = 0;
  for (auto h : res.histogram) total += h;
  EXPECT_EQ(total, 500u);
  EXPECT_EQ(monotonicity_audit(RieszDimension(2, 2.0), 500, 7).max_ratio, res.max_ratio);
}

TEST(TheoremAudit, AtomPair) {
  const RieszDimension rd(2, 2.0);
  const DiscreteMeasure a(2, {0.1, 0.2}, {1.0}), b(2, {1.1, 0.2}, {1.0});
  AuditConfig cfg;
  cfg.compute_energy = false;
  const auto rep = theorem_audit(rd, a, b, cfg);
  EXPECT_LE(rel_err(rep.N.value, 1.0), 1e-9);
  EXPECT_LE(rel_err(rep.T.value, 1.0), 1e-12);
  EXPECT_LE(rel_err(rep.Tstar.value, 1.0), 1e-12);
  EXPECT_TRUE(std::isfinite(rep.ratio_full) && rep.ratio_full > 0.0);
  EXPECT_TRUE(rep.holes);
}

TEST(TheoremAudit, Preconditions) {
  const auto s = random_measure(3, 5, 1), w = random_measure(3, 5, 2);
  try {
    theorem_audit(RieszDimension(3, 2.0), s, w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unsupported_codimension);
  }
  try {
    theorem_audit(RieszDimension(3, 1.0), s, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(TheoremAudit, LebesguePairNecessity) {
  const auto [a, b] = lebesgue_pair(16);
  AuditConfig cfg;
  cfg.compute_energy = false;
  cfg.family.grids = 2;
  cfg.eta.min_atoms = 16;
  const auto rep = theorem_audit(RieszDimension(2, 2.0), a, b, cfg);
  EXPECT_LE(rep.T.value, rep.N.value * (1.0 + 1e-9));
  EXPECT_LE(rep.Tstar.value, rep.N.value * (1.0 + 1e-9));
  EXPECT_GT(rep.eta_sigma->value, 0.0);
  const auto j = rep.to_json();
  EXPECT_TRUE(j.contains("ratios"));
  const std::string header = ConstantsReport::csv_header(), row = rep.csv_row();
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
}

TEST(TheoremAudit, DualityScalingTranslation) {
  const RieszDimension rd(2, 2.0);
  const auto [a, b] = lebesgue_pair(8);
  AuditConfig cfg;
  cfg.compute_energy = false;
  cfg.compute_eta = false;
  cfg.family_override = default_family(a, b, {2, 3, true});
  const auto base = theorem_audit(rd, a, b, cfg);
  const auto swap = theorem_audit(rd, b, a, cfg);
  EXPECT_LE(rel_err(base.A2.value, swap.A2.value), 1e-9);
  EXPECT_LE(rel_err(base.N.value, swap.N.value), 1e-9);
  EXPECT_LE(rel_err(base.T.value, swap.Tstar.value), 1e-9);
  EXPECT_LE(rel_err(base.Tstar.value, swap.T.value), 1e-9);

  const double c = 3.0;
  const auto scaled = theorem_audit(rd, a.scaled(c), b.scaled(c), cfg);
  EXPECT_LE(rel_err(scaled.N.value, c * base.N.value), 1e-8);
  EXPECT_LE(rel_err(scaled.T.value, c * base.T.value), 1e-12);
  EXPECT_LE(rel_err(scaled.Tstar.value, c * base.Tstar.value), 1e-12);
  EXPECT_LE(rel_err(scaled.A2.value, c * c * base.A2.value), 1e-12);
  EXPECT_EQ(*scaled.A2.cube, *base.A2.cube);
  EXPECT_EQ(*scaled.T.cube, *base.T.cube);

  const Point v{2.0, -4.0};
  AuditConfig moved = cfg;
  for (auto& q : moved.family_override->cubes) {
    Point lo = q.corner();
    lo[0] += v[0], lo[1] += v[1];
    q = Cube::from_corner(lo, q.side());
  }
  const auto shifted = theorem_audit(rd, a.translated(v), b.translated(v), moved);
  EXPECT_LE(rel_err(shifted.A2.value, base.A2.value), 1e-12);
  EXPECT_LE(rel_err(shifted.T.value, base.T.value), 1e-12);
  EXPECT_LE(rel_err(shifted.Tstar.value, base.Tstar.value), 1e-12);
  EXPECT_LE(rel_err(shifted.N.value, base.N.value), 1e-9);
}

TEST(Families, EnlargingNeverDecreases) {
  const RieszDimension rd(2, 1.5);
  const auto s = random_measure(2, 25, 40), w = random_measure(2, 25, 41);
  const auto big = default_family(s, w, {3, 42, true});
  CubeFamily part;
  double a2 = 0.0, t = 0.0;
  for (std::size_t i = 0; i < big.cubes.size(); i += std::max<std::size_t>(1, big.cubes.size() / 10)) {
    part.cubes.push_back(big.cubes[i]);
    const double na = a2_constant(rd, s, w, part, true).value;
    EXPECT_GE(na, a2);
    a2 = na;
    if (cube_mass(s, part.cubes.front()) > 0.0 || t > 0.0) {
      try {
        const double nt = testing_constant(rd, s, w, part).value;
        EXPECT_GE(nt, t);
        t = nt;
      } catch (const Error&) {
      }
    }
  }
  EXPECT_GE(a2_constant(rd, s, w, big, true).value, a2);
  EXPECT_GE(testing_constant(rd, s, w, big).value, t);
}
