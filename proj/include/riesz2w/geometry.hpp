#pragma once

// Points, axis-aligned cubes, finite weighted point clouds, and the
// measure-theoretic queries the rest of the library is built on.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riesz2w/error.hpp"

namespace riesz2w {

using Point = std::vector<double>;

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

/// Ambient dimension n and kernel dimension d of the Riesz transform.
class RieszDimension {
 public:
  RieszDimension(int n, double d) : n_(n), d_(d) {
    require(n >= 1, ErrorKind::input, "ambient dimension must be positive");
    require(std::isfinite(d) && d > 0.0 && d <= n, ErrorKind::input,
            "kernel dimension must satisfy 0 < d <= n");
  }

  int n() const noexcept { return n_; }
  double d() const noexcept { return d_; }

  /// d = n - 1: accepted for kernel evaluation, rejected by theorem audits.
  bool codimension_one() const noexcept { return d_ == static_cast<double>(n_ - 1); }

 private:
  int n_;
  double d_;
};

/// Axis-aligned cube, half-open per axis: [lo, lo + side).
///
/// The lower corner is stored rather than the center so that cubes of a
/// dyadic lattice keep exactly representable faces.
class Cube {
 public:
  Cube() = default;

  Cube(Point center, double side) : side_(side) {
    check_side(side);
    lo_.resize(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
      require(std::isfinite(center[i]), ErrorKind::input, "cube center must be finite");
      lo_[i] = center[i] - 0.5 * side;
    }
  }

  static Cube from_corner(Point lo, double side) {
    check_side(side);
    Cube q;
    q.lo_ = std::move(lo);
    q.side_ = side;
    return q;
  }

  int dim() const noexcept { return static_cast<int>(lo_.size()); }
  double side() const noexcept { return side_; }
  double lo(int i) const { return lo_[i]; }
  double hi(int i) const { return lo_[i] + side_; }
  const Point& corner() const noexcept { return lo_; }

  Point center() const {
    Point c(lo_.size());
    for (std::size_t i = 0; i < lo_.size(); ++i) c[i] = lo_[i] + 0.5 * side_;
    return c;
  }

  double volume() const { return std::pow(side_, dim()); }

  bool contains(std::span<const double> x) const {
    for (std::size_t i = 0; i < lo_.size(); ++i)
      if (!(x[i] >= lo_[i] && x[i] < lo_[i] + side_)) return false;
    return true;
  }

  bool contains_closed(std::span<const double> x) const {
    for (std::size_t i = 0; i < lo_.size(); ++i)
      if (!(x[i] >= lo_[i] && x[i] <= lo_[i] + side_)) return false;
    return true;
  }

  /// Set containment of half-open cubes: other ⊆ *this.
  bool contains(const Cube& other) const {
    for (std::size_t i = 0; i < lo_.size(); ++i)
      if (other.lo_[i] < lo_[i] || other.lo_[i] + other.side_ > lo_[i] + side_) return false;
    return true;
  }

  bool intersects(const Cube& other) const {
    for (std::size_t i = 0; i < lo_.size(); ++i)
      if (other.lo_[i] >= lo_[i] + side_ || lo_[i] >= other.lo_[i] + other.side_) return false;
    return true;
  }

  friend bool operator==(const Cube& a, const Cube& b) {
    return a.side_ == b.side_ && a.lo_ == b.lo_;
  }

  friend bool operator<(const Cube& a, const Cube& b) {
    if (a.lo_ != b.lo_) return a.lo_ < b.lo_;
    return a.side_ < b.side_;
  }

 private:
  static void check_side(double side) {
    require(std::isfinite(side) && side > 0.0, ErrorKind::input, "cube side must be positive");
  }

  Point lo_;
  double side_ = 1.0;
};

/// Same center, side scaled by c.
inline Cube dilate(const Cube& q, double c) {
  require(std::isfinite(c) && c > 0.0, ErrorKind::input, "dilation factor must be positive");
  if (c == 1.0) return q;
  return Cube(q.center(), c * q.side());
}

/// Euclidean distance from x to the closed cube; 0 inside.
inline double dist(std::span<const double> x, const Cube& q) {
  require(static_cast<int>(x.size()) == q.dim(), ErrorKind::dimension_mismatch,
          "point and cube dimensions differ");
  double s = 0.0;
  for (int i = 0; i < q.dim(); ++i) {
    double t = 0.0;
    if (x[i] < q.lo(i))
      t = q.lo(i) - x[i];
    else if (x[i] > q.hi(i))
      t = x[i] - q.hi(i);
    s += t * t;
  }
  return std::sqrt(s);
}

/// Distance between closed cubes.
inline double dist(const Cube& a, const Cube& b) {
  require(a.dim() == b.dim(), ErrorKind::dimension_mismatch, "cube dimensions differ");
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    double t = 0.0;
    if (a.hi(i) < b.lo(i))
      t = b.lo(i) - a.hi(i);
    else if (b.hi(i) < a.lo(i))
      t = a.lo(i) - b.hi(i);
    s += t * t;
  }
  return std::sqrt(s);
}

/// inf { |x - y| : x in closed K, y in the boundary of P }.
inline double boundary_distance(const Cube& k, const Cube& p) {
  require(k.dim() == p.dim(), ErrorKind::dimension_mismatch, "cube dimensions differ");
  bool interior = true;
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k.dim(); ++i) {
    const double g = std::min(k.lo(i) - p.lo(i), p.hi(i) - k.hi(i));
    if (!(g > 0.0)) interior = false;
    gap = std::min(gap, g);
  }
  if (interior) return gap;
  // Otherwise K either meets ∂P (distance 0) or lies outside P.
  return dist(k, p);
}

/// Finite weighted point cloud with strictly positive masses.
/// Atoms sharing a location are merged (masses added) on construction,
/// keeping first-occurrence order.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(int dim) : dim_(dim) {
    require(dim >= 1, ErrorKind::input, "measure dimension must be positive");
  }

  DiscreteMeasure(int dim, std::vector<double> coords, std::vector<double> masses)
      : dim_(dim) {
    require(dim >= 1, ErrorKind::input, "measure dimension must be positive");
    require(coords.size() == masses.size() * static_cast<std::size_t>(dim),
            ErrorKind::dimension_mismatch, "coordinate array length is not dim * atoms");
    for (std::size_t i = 0; i < masses.size(); ++i) {
      require(std::isfinite(masses[i]) && masses[i] > 0.0, ErrorKind::input,
              "atom " + std::to_string(i) + ": mass must be positive and finite");
      for (int j = 0; j < dim; ++j)
        require(std::isfinite(coords[i * dim + j]), ErrorKind::input,
                "atom " + std::to_string(i) + ": coordinates must be finite");
    }
    std::map<Point, std::size_t> seen;
    coords_.reserve(coords.size());
    masses_.reserve(masses.size());
    for (std::size_t i = 0; i < masses.size(); ++i) {
      Point p(coords.begin() + i * dim, coords.begin() + (i + 1) * dim);
      auto [it, fresh] = seen.emplace(p, masses_.size());
      if (!fresh) {
        masses_[it->second] += masses[i];
        continue;
      }
      coords_.insert(coords_.end(), p.begin(), p.end());
      masses_.push_back(masses[i]);
    }
  }

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return masses_.size(); }
  bool empty() const noexcept { return masses_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  double mass(std::size_t i) const { return masses_[i]; }

  const std::vector<double>& coords() const noexcept { return coords_; }
  const std::vector<double>& masses() const noexcept { return masses_; }

  double total_mass() const {
    double s = 0.0;
    for (double m : masses_) s += m;
    return s;
  }

  /// Bounding box of the support as (lo, hi); empty measure gives empty points.
  std::pair<Point, Point> bounding_box() const {
    if (empty()) return {};
    Point lo(point(0).begin(), point(0).end());
    Point hi = lo;
    for (std::size_t i = 1; i < size(); ++i)
      for (int j = 0; j < dim_; ++j) {
        lo[j] = std::min(lo[j], point(i)[j]);
        hi[j] = std::max(hi[j], point(i)[j]);
      }
    return {lo, hi};
  }

  /// c·μ.
  DiscreteMeasure scaled(double c) const {
    std::vector<double> m = masses_;
    for (double& x : m) x *= c;
    return DiscreteMeasure(dim_, coords_, std::move(m));
  }

  /// μ(· - v).
  DiscreteMeasure translated(std::span<const double> v) const {
    std::vector<double> c = coords_;
    for (std::size_t i = 0; i < size(); ++i)
      for (int j = 0; j < dim_; ++j) c[i * dim_ + j] += v[j];
    return DiscreteMeasure(dim_, std::move(c), masses_);
  }

 private:
  int dim_ = 1;
  std::vector<double> coords_;
  std::vector<double> masses_;
};

/// Restriction region: an optional enclosing cube minus a list of excluded
/// cubes. Covers R^n, a cube, a cube complement and set differences.
class Region {
 public:
  static Region everything() { return {}; }
  static Region cube(Cube q) {
    Region r;
    r.inside_ = std::move(q);
    return r;
  }
  static Region complement(Cube q) {
    Region r;
    r.excluded_.push_back(std::move(q));
    return r;
  }
  static Region difference(Cube outer, Cube hole) {
    Region r;
    r.inside_ = std::move(outer);
    r.excluded_.push_back(std::move(hole));
    return r;
  }

  Region minus(Cube hole) const {
    Region r = *this;
    r.excluded_.push_back(std::move(hole));
    return r;
  }

  bool contains(std::span<const double> x) const {
    if (inside_ && !inside_->contains(x)) return false;
    for (const auto& q : excluded_)
      if (q.contains(x)) return false;
    return true;
  }

  void check_dim(int dim) const {
    if (inside_)
      require(inside_->dim() == dim, ErrorKind::dimension_mismatch, "region dimension differs");
    for (const auto& q : excluded_)
      require(q.dim() == dim, ErrorKind::dimension_mismatch, "region dimension differs");
  }

 private:
  std::optional<Cube> inside_;
  std::vector<Cube> excluded_;
};

inline void check_dim(const DiscreteMeasure& mu, const Cube& q) {
  require(mu.dim() == q.dim(), ErrorKind::dimension_mismatch,
          "measure dimension " + std::to_string(mu.dim()) + " differs from cube dimension " +
              std::to_string(q.dim()));
}

/// μ(Q) under the half-open convention.
inline double cube_mass(const DiscreteMeasure& mu, const Cube& q) {
  check_dim(mu, q);
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (q.contains(mu.point(i))) s += mu.mass(i);
  return s;
}

/// Indices of atoms inside Q.
inline std::vector<std::size_t> atoms_in(const DiscreteMeasure& mu, const Cube& q) {
  check_dim(mu, q);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (q.contains(mu.point(i))) out.push_back(i);
  return out;
}

/// μ center of mass of Q.
inline Point center_of_mass(const DiscreteMeasure& mu, const Cube& q) {
  check_dim(mu, q);
  Point c(mu.dim(), 0.0);
  double m = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!q.contains(mu.point(i))) continue;
    m += mu.mass(i);
    for (int j = 0; j < mu.dim(); ++j) c[j] += mu.mass(i) * mu.point(i)[j];
  }
  require(m > 0.0, ErrorKind::empty_cube, "center of mass of a null cube");
  for (double& x : c) x /= m;
  return c;
}

inline DiscreteMeasure restrict(const DiscreteMeasure& mu, const Region& region) {
  region.check_dim(mu.dim());
  std::vector<double> c, m;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!region.contains(mu.point(i))) continue;
    c.insert(c.end(), mu.point(i).begin(), mu.point(i).end());
    m.push_back(mu.mass(i));
  }
  return DiscreteMeasure(mu.dim(), std::move(c), std::move(m));
}

/// True when the two measures have an atom at the same location.
inline bool share_atom(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dim() != b.dim()) return false;
  std::map<Point, int> seen;
  for (std::size_t i = 0; i < a.size(); ++i) seen.emplace(Point(a.point(i).begin(), a.point(i).end()), 0);
  for (std::size_t i = 0; i < b.size(); ++i)
    if (seen.count(Point(b.point(i).begin(), b.point(i).end()))) return true;
  return false;
}

/// Smallest cube (with power-of-two side) anchored at the lower corner of the
/// joint bounding box that contains both supports in its interior.
inline Cube enclosing_cube(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  require(a.dim() == b.dim(), ErrorKind::dimension_mismatch, "measure dimensions differ");
  const int n = a.dim();
  Point lo(n, std::numeric_limits<double>::infinity());
  Point hi(n, -std::numeric_limits<double>::infinity());
  for (const auto* mu : {&a, &b}) {
    if (mu->empty()) continue;
    auto [l, h] = mu->bounding_box();
    for (int j = 0; j < n; ++j) {
      lo[j] = std::min(lo[j], l[j]);
      hi[j] = std::max(hi[j], h[j]);
    }
  }
  require(std::isfinite(lo[0]), ErrorKind::input, "both measures are empty");
  double extent = 0.0;
  for (int j = 0; j < n; ++j) extent = std::max(extent, hi[j] - lo[j]);
  double side = std::exp2(std::ceil(std::log2(std::max(extent, 1e-300)))) * 2.0;
  Point c(n);
  for (int j = 0; j < n; ++j) c[j] = 0.5 * (lo[j] + hi[j]);
  return Cube(c, side);
}

}  // namespace riesz2w
