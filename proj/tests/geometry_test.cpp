#include <gtest/gtest.h>

#include "support.hpp"

using namespace riesz2w;
using riesz2w::testing::random_measure;

namespace {

DiscreteMeasure grid10() {
  std::vector<double> c, m;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      c.push_back((i + 0.5) / 10.0);
      c.push_back((j + 0.5) / 10.0);
      m.push_back(0.01);
    }
  return DiscreteMeasure(2, c, m);
}

}  // namespace

TEST(CubeMass, SingleAtom) {
  DiscreteMeasure mu(2, {0.5, 0.5}, {1.0});
  EXPECT_EQ(cube_mass(mu, Cube({0.5, 0.5}, 1.0)), 1.0);
  EXPECT_EQ(cube_mass(mu, Cube({2.5, 0.5}, 1.0)), 0.0);
}

TEST(CubeMass, LeftHalfOfGrid) {
  const auto mu = grid10();
  const Cube left = Cube::from_corner({0.0, 0.0}, 0.5);
  const Cube left_top = Cube::from_corner({0.0, 0.5}, 0.5);
  double oracle = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.point(i)[0] < 0.5) oracle += mu.mass(i);
  EXPECT_NEAR(cube_mass(mu, left) + cube_mass(mu, left_top), oracle, 1e-15);
  EXPECT_NEAR(oracle, 0.5, 1e-12);
}

TEST(CubeMass, DimensionMismatchThrows) {
  DiscreteMeasure mu(2, {0.5, 0.5}, {1.0});
  try {
    cube_mass(mu, Cube({0.5}, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
  }
}

TEST(CubeMass, HalfOpenFaces) {
  DiscreteMeasure mu(1, {0.0, 1.0}, {1.0, 2.0});
  EXPECT_EQ(cube_mass(mu, Cube::from_corner({0.0}, 1.0)), 1.0);
  EXPECT_EQ(cube_mass(mu, Cube::from_corner({1.0}, 1.0)), 2.0);
}

TEST(CubeMass, ChildrenPartitionParent) {
  const auto mu = random_measure(3, 300, 5);
  const Cube q = Cube::from_corner({0.0, 0.0, 0.0}, 1.0);
  double s = 0.0;
  for (int c = 0; c < 8; ++c)
    s += cube_mass(mu, Cube::from_corner({0.5 * (c & 1), 0.5 * ((c >> 1) & 1), 0.5 * ((c >> 2) & 1)}, 0.5));
  EXPECT_NEAR(s, cube_mass(mu, q), 1e-12);
}

TEST(CenterOfMass, Examples) {
  DiscreteMeasure one(2, {0.3, 0.7}, {2.0});
  EXPECT_EQ(center_of_mass(one, Cube({0.5, 0.5}, 1.0)), (Point{0.3, 0.7}));
  DiscreteMeasure two(2, {0.0, 0.0, 1.0, 1.0}, {1.0, 1.0});
  const Point c = center_of_mass(two, Cube({0.5, 0.5}, 4.0));
  EXPECT_DOUBLE_EQ(c[0], 0.5);
  EXPECT_DOUBLE_EQ(c[1], 0.5);
  DiscreteMeasure three(1, {0.0, 0.5, 1.0}, {1.0, 2.0, 1.0});
  EXPECT_DOUBLE_EQ(center_of_mass(three, Cube({0.5}, 4.0))[0], (0.0 * 1 + 0.5 * 2 + 1.0 * 1) / 4.0);
}

TEST(CenterOfMass, EmptyCubeThrows) {
  DiscreteMeasure mu(1, {0.5}, {1.0});
  try {
    center_of_mass(mu, Cube({5.0}, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::empty_cube);
  }
}

TEST(CenterOfMass, LiesInClosedCube) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto mu = random_measure(2, 50, s, -1.0, 2.0);
    const Cube q({0.4, 0.6}, 0.9);
    if (cube_mass(mu, q) == 0.0) continue;
    EXPECT_TRUE(q.contains_closed(center_of_mass(mu, q)));
  }
}

TEST(Restrict, Examples) {
  const auto mu = grid10();
  const auto all = restrict(mu, Region::everything());
  EXPECT_EQ(all.coords(), mu.coords());
  EXPECT_EQ(all.masses(), mu.masses());
  EXPECT_TRUE(restrict(mu, Region::cube(Cube({5.0, 5.0}, 1.0))).empty());
  const Cube left = Cube::from_corner({0.0, 0.0}, 1.0);
  const auto right = restrict(mu, Region::complement(Cube::from_corner({0.0, 0.0}, 0.5)).minus(
                                      Cube::from_corner({0.0, 0.5}, 0.5)));
  EXPECT_EQ(right.size(), 50u);
  EXPECT_EQ(restrict(mu, Region::difference(left, Cube::from_corner({0.0, 0.0}, 0.5))).size(), 75u);
}

TEST(Dilate, Examples) {
  const Cube q({0.0, 0.0}, 1.0);
  EXPECT_EQ(dilate(q, 1.0), q);
  const Cube d2 = dilate(q, 2.0);
  EXPECT_EQ(d2.side(), 2.0);
  EXPECT_EQ(d2.center(), (Point{0.0, 0.0}));
  const Cube back = dilate(dilate(q, 3.0), 1.0 / 3.0);
  EXPECT_NEAR(back.side(), 1.0, 1e-15);
  EXPECT_NEAR(back.lo(0), q.lo(0), 1e-15);
  EXPECT_THROW(dilate(q, 0.0), Error);
  EXPECT_THROW(dilate(q, -1.0), Error);
}

TEST(Dilate, Multiplicative) {
  const Cube q({0.25, -0.5}, 0.5);
  EXPECT_EQ(dilate(dilate(q, 2.0), 4.0), dilate(q, 8.0));
  EXPECT_EQ(dilate(dilate(q, 0.5), 0.5), dilate(q, 0.25));
}

TEST(Distance, Examples) {
  const Cube unit = Cube::from_corner({0.0}, 1.0);
  EXPECT_EQ(dist(std::vector<double>{0.5}, unit), 0.0);
  EXPECT_EQ(dist(std::vector<double>{3.0}, unit), 2.0);
  EXPECT_EQ(boundary_distance(Cube::from_corner({0.25}, 0.25), unit), 0.25);
  EXPECT_EQ(boundary_distance(Cube::from_corner({0.125}, 0.25), unit), 0.125);
}

TEST(Distance, ZeroExactlyOnClosedCube) {
  const Cube q = Cube::from_corner({0.0, 0.0}, 1.0);
  EXPECT_EQ(dist(std::vector<double>{1.0, 1.0}, q), 0.0);
  EXPECT_GT(dist(std::vector<double>{1.0 + 1e-12, 0.5}, q), 0.0);
}

TEST(Distance, TriangleConsistency) {
  CounterRng rng(9);
  for (int t = 0; t < 500; ++t) {
    const Cube q({rng.uniform(-1, 1), rng.uniform(-1, 1)}, rng.uniform(0.1, 2.0));
    const Point x{rng.uniform(-3, 3), rng.uniform(-3, 3)}, y{rng.uniform(-3, 3), rng.uniform(-3, 3)};
    EXPECT_LE(dist(x, q), distance(x, y) + dist(y, q) + 1e-12);
  }
}

TEST(DiscreteMeasure, MergesDuplicatesAndValidates) {
  DiscreteMeasure mu(2, {0.1, 0.2, 0.3, 0.4, 0.1, 0.2}, {1.0, 2.0, 3.0});
  ASSERT_EQ(mu.size(), 2u);
  EXPECT_EQ(mu.mass(0), 4.0);
  EXPECT_THROW(DiscreteMeasure(2, {0.1, 0.2}, {0.0}), Error);
  EXPECT_THROW(DiscreteMeasure(2, {0.1, 0.2}, {-1.0}), Error);
  EXPECT_THROW(DiscreteMeasure(2, {0.1}, {1.0}), Error);
  EXPECT_THROW(DiscreteMeasure(1, {std::nan("")}, {1.0}), Error);
}

TEST(RieszDimension, Domain) {
  EXPECT_TRUE(RieszDimension(2, 1).codimension_one());
  EXPECT_FALSE(RieszDimension(2, 2).codimension_one());
  EXPECT_THROW(RieszDimension(2, 0.0), Error);
  EXPECT_THROW(RieszDimension(2, 2.5), Error);
  EXPECT_THROW(RieszDimension(0, 0.5), Error);
}

TEST(MeasureIo, RoundTripAndErrors) {
  const auto mu = random_measure(3, 17, 2);
  const auto back = parse_measure(to_json(mu).dump());
  EXPECT_EQ(back.coords(), mu.coords());
  EXPECT_EQ(back.masses(), mu.masses());
  try {
    parse_measure("{\"dim\": 2, \"points\": [{\"x\": [1], \"m\": 1}]}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::dimension_mismatch);
    EXPECT_NE(std::string(e.what()).find("points[0].x"), std::string::npos);
  }
  try {
    parse_measure("{\"dim\": 2,\n \"points\": [}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::input);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_measure("{\"dim\": 1, \"points\": [{\"x\": [1], \"m\": -2}]}"), Error);
}

TEST(EnclosingCube, HoldsBothSupportsInInterior) {
  const auto a = random_measure(2, 40, 1, -3.0, 1.0), b = random_measure(2, 40, 2, 0.0, 5.0);
  const Cube q = enclosing_cube(a, b);
  for (const auto* mu : {&a, &b})
    for (std::size_t i = 0; i < mu->size(); ++i) EXPECT_TRUE(q.contains(mu->point(i)));
  EXPECT_EQ(q.side(), std::exp2(std::round(std::log2(q.side()))));
}
