#pragma once

// Vector Riesz kernel K(x, y) = (x - y) / |x - y|^{d+1}, its action on
// discrete measures, the two-weight bilinear form, and the L²(σ) → L²(w)
// operator norm of the discretized transform.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riesz2w/error.hpp"
#include "riesz2w/geometry.hpp"
#include "riesz2w/parallel.hpp"
#include "riesz2w/rng.hpp"

namespace riesz2w {

using Vec = std::vector<double>;

/// Sharp annular truncation: the kernel is kept only for a <= |x - y| <= b.
struct Truncation {
  double a = 0.0;
  double b = std::numeric_limits<double>::infinity();
};

class KernelParams {
 public:
  explicit KernelParams(RieszDimension rd, std::optional<Truncation> trunc = std::nullopt)
      : rd_(rd), trunc_(trunc) {
    if (trunc_) {
      require(trunc_->a > 0.0 && trunc_->b > trunc_->a, ErrorKind::input,
              "truncation radii must satisfy 0 < a < b");
    }
  }

  const RieszDimension& rd() const noexcept { return rd_; }
  int n() const noexcept { return rd_.n(); }
  double d() const noexcept { return rd_.d(); }
  const std::optional<Truncation>& truncation() const noexcept { return trunc_; }

 private:
  RieszDimension rd_;
  std::optional<Truncation> trunc_;
};

namespace detail {

/// out += coef * K(x, y). Returns false when the pair is cut off by the
/// truncation. Throws on the untruncated diagonal.
inline bool kernel_axpy(const KernelParams& p, std::span<const double> x,
                        std::span<const double> y, double coef, double* out) {
  const int n = p.n();
  double r2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double t = x[j] - y[j];
    r2 += t * t;
  }
  if (const auto& tr = p.truncation()) {
    const double r = std::sqrt(r2);
    if (r < tr->a || r > tr->b) return false;
  } else if (r2 == 0.0) {
    fail(ErrorKind::singularity, "Riesz kernel evaluated on the diagonal");
  }
  const double scale = coef / std::pow(r2, 0.5 * (p.d() + 1.0));
  for (int j = 0; j < n; ++j) out[j] += (x[j] - y[j]) * scale;
  return true;
}

}  // namespace detail

inline Vec kernel_eval(const KernelParams& p, std::span<const double> x,
                       std::span<const double> y) {
  require(static_cast<int>(x.size()) == p.n() && static_cast<int>(y.size()) == p.n(),
          ErrorKind::dimension_mismatch, "kernel arguments must have n coordinates");
  Vec out(p.n(), 0.0);
  detail::kernel_axpy(p, x, y, 1.0, out.data());
  return out;
}

namespace detail {
inline double fval(std::span<const double> f, std::size_t i) { return f.empty() ? 1.0 : f[i]; }

inline void check_fvals(std::span<const double> f, const DiscreteMeasure& mu, const char* what) {
  require(f.empty() || f.size() == mu.size(), ErrorKind::dimension_mismatch,
          std::string(what) + ": function values must match the atom count");
}
}  // namespace detail

/// R_σ f(x) = Σ_i f(x_i) K(x, x_i) s_i. An empty `f` means f ≡ 1.
inline Vec riesz_apply(const KernelParams& p, const DiscreteMeasure& sigma,
                       std::span<const double> f, std::span<const double> x) {
  require(sigma.dim() == p.n() && static_cast<int>(x.size()) == p.n(),
          ErrorKind::dimension_mismatch, "riesz_apply: dimension mismatch");
  detail::check_fvals(f, sigma, "riesz_apply");
  Vec out(p.n(), 0.0);
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const double c = detail::fval(f, i) * sigma.mass(i);
    if (c != 0.0) detail::kernel_axpy(p, x, sigma.point(i), c, out.data());
  }
  return out;
}

/// Component j: Σ_{i,k} f(x_i) g(y_k) K_j(y_k, x_i) s_i w_k.
inline Vec bilinear_form(const KernelParams& p, const DiscreteMeasure& sigma,
                         std::span<const double> f, const DiscreteMeasure& w,
                         std::span<const double> g) {
  require(sigma.dim() == p.n() && w.dim() == p.n(), ErrorKind::dimension_mismatch,
          "bilinear_form: dimension mismatch");
  detail::check_fvals(f, sigma, "bilinear_form");
  detail::check_fvals(g, w, "bilinear_form");
  const int n = p.n();
  return map_reduce(
      w.size(), 64, Vec(n, 0.0),
      [&](std::size_t k) {
        Vec acc(n, 0.0);
        const double gk = detail::fval(g, k) * w.mass(k);
        if (gk == 0.0) return acc;
        for (std::size_t i = 0; i < sigma.size(); ++i) {
          const double c = detail::fval(f, i) * sigma.mass(i);
          if (c != 0.0) detail::kernel_axpy(p, w.point(k), sigma.point(i), c * gk, acc.data());
        }
        return acc;
      },
      [](Vec a, const Vec& b) {
        for (std::size_t j = 0; j < a.size(); ++j) a[j] += b[j];
        return a;
      });
}

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last)
      : Error(ErrorKind::convergence, what), last_estimate_(last) {}
  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

struct OperatorNormOptions {
  double tol = 1e-10;
  int max_iterations = 100000;
  std::uint64_t seed = 0;
};

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
};

/// Dense scaled kernel matrix A with rows (k, component) and columns i:
/// A = √w_k · K_c(y_k, x_i) · √s_i, row-major.
inline std::vector<double> scaled_kernel_matrix(const KernelParams& p, const DiscreteMeasure& sigma,
                                                const DiscreteMeasure& w) {
  const int n = p.n();
  const std::size_t cols = sigma.size();
  std::vector<double> a(w.size() * n * cols, 0.0);
  for_chunks(w.size(), 16, [&](std::size_t b, std::size_t e, std::size_t) {
    std::vector<double> buf(n);
    for (std::size_t k = b; k < e; ++k) {
      const double sw = std::sqrt(w.mass(k));
      for (std::size_t i = 0; i < cols; ++i) {
        std::fill(buf.begin(), buf.end(), 0.0);
        detail::kernel_axpy(p, w.point(k), sigma.point(i), sw * std::sqrt(sigma.mass(i)),
                            buf.data());
        for (int c = 0; c < n; ++c) a[(k * n + c) * cols + i] = buf[c];
      }
    }
  });
  return a;
}

/// Largest singular value of the scaled kernel matrix, which is the best
/// constant N in ||R_σ f||_w <= N ||f||_σ for the discrete pair. Power
/// iteration on the smaller Gram matrix (AᵀA or AAᵀ), stopping when the
/// Rayleigh quotient changes by at most `tol` relative.
inline NormEstimate operator_norm(const KernelParams& p, const DiscreteMeasure& sigma,
                                  const DiscreteMeasure& w, const OperatorNormOptions& opt = {}) {
  require(sigma.dim() == p.n() && w.dim() == p.n(), ErrorKind::dimension_mismatch,
          "operator_norm: dimension mismatch");
  if (sigma.empty() || w.empty()) return {0.0, 0};
  const std::size_t rows = w.size() * p.n();
  const std::size_t cols = sigma.size();
  require(static_cast<double>(rows) * cols <= 6.4e7, ErrorKind::resource,
          "operator_norm: system too large for the dense path");
  const std::vector<double> a = scaled_kernel_matrix(p, sigma, w);

  // Gram matrix on the smaller side: rows of `b` are either the rows of A
  // or the rows of Aᵀ.
  const bool right = cols <= rows;
  const std::size_t m = right ? cols : rows;
  const std::size_t len = right ? rows : cols;
  std::vector<double> b;
  if (right) {
    b.resize(a.size());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) b[c * rows + r] = a[r * cols + c];
  } else {
    b = a;
  }
  std::vector<double> gram(m * m, 0.0);
  for_chunks(m, 8, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t u = lo; u < hi; ++u) {
      const double* ru = b.data() + u * len;
      for (std::size_t v = 0; v <= u; ++v) {
        const double* rv = b.data() + v * len;
        double s = 0.0;
        for (std::size_t c = 0; c < len; ++c) s += ru[c] * rv[c];
        gram[u * m + v] = s;
      }
    }
  });
  for (std::size_t u = 0; u < m; ++u)
    for (std::size_t v = u + 1; v < m; ++v) gram[u * m + v] = gram[v * m + u];

  CounterRng rng(opt.seed);
  std::vector<double> x(m), y(m);
  for (auto& t : x) t = rng.normal();
  auto normalize = [](std::vector<double>& v) {
    const double s = std::sqrt(norm2(v));
    if (s > 0.0)
      for (double& t : v) t /= s;
    return s;
  };
  normalize(x);
  double mu = -1.0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    for (std::size_t u = 0; u < m; ++u) {
      double s = 0.0;
      const double* row = gram.data() + u * m;
      for (std::size_t v = 0; v < m; ++v) s += row[v] * x[v];
      y[u] = s;
    }
    double rq = 0.0;
    for (std::size_t u = 0; u < m; ++u) rq += x[u] * y[u];
    const double ny = normalize(y);
    if (ny == 0.0) return {0.0, it};
    std::swap(x, y);
    if (mu >= 0.0 && std::abs(rq - mu) <= opt.tol * std::abs(rq)) return {std::sqrt(rq), it};
    mu = rq;
  }
  throw ConvergenceError("operator_norm: power iteration did not converge",
                         std::sqrt(std::max(mu, 0.0)));
}

/// Central-difference divergence of y ↦ y/|y|^{d+1} minus the analytic value
/// (n - d - 1)/|y|^{d+1}.
inline double divergence_residual(const KernelParams& p, std::span<const double> y, double h) {
  const int n = p.n();
  require(static_cast<int>(y.size()) == n, ErrorKind::dimension_mismatch,
          "divergence_residual: point dimension differs");
  const double r = std::sqrt(norm2(y));
  require(r > 0.0, ErrorKind::singularity, "divergence at the origin");
  require(h > 0.0, ErrorKind::input, "step must be positive");
  const KernelParams plain(p.rd());
  const Point origin(n, 0.0);
  double div = 0.0;
  Point yp(y.begin(), y.end()), ym = yp;
  for (int j = 0; j < n; ++j) {
    yp[j] += h;
    ym[j] -= h;
    div += (kernel_eval(plain, yp, origin)[j] - kernel_eval(plain, ym, origin)[j]) / (2.0 * h);
    yp[j] = y[j];
    ym[j] = y[j];
  }
  return div - (n - p.d() - 1.0) / std::pow(r, p.d() + 1.0);
}

}  // namespace riesz2w
