#pragma once

// Convex quadratic objectives f(x) = 1/2 (x-x*)^T H (x-x*) + f* with strictly
// positive definite H, benchmark generators, affine pullbacks, and the
// sublevel-set volume measure f_mu.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "hees/errors.hpp"
#include "hees/linalg.hpp"
#include "hees/rng.hpp"
#include "hees/sampling.hpp"

namespace hees {

class QuadraticProblem {
 public:
  /// Validates symmetry and positive definiteness of the Hessian.
  QuadraticProblem(Matrix hessian, Vector optimum, double optimal_value)
      : hessian_(std::move(hessian)),
        optimum_(std::move(optimum)),
        optimal_value_(optimal_value) {
    if (hessian_.dim() != optimum_.dim())
      throw DimensionMismatch("QuadraticProblem: Hessian/optimum dims differ");
    const auto eig = sym_eig(hessian_);  // throws NotSymmetric
    if (eig.empty() || eig.front() <= 0.0)
      throw NotSPD("QuadraticProblem: Hessian is not positive definite");
    log_det_hessian_ = log_abs_det(hessian_).first;
    const double d = static_cast<double>(dim());
    // V_d^(1/d) / det(H)^(1/(2d)), the scale factor of the closed-form f_mu
    const double log_unit_ball =
        0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d + 1.0);
    fmu_scale_ = std::exp(log_unit_ball / d - log_det_hessian_ / (2.0 * d));
  }

  std::size_t dim() const { return hessian_.dim(); }
  const Matrix& hessian() const { return hessian_; }
  const Vector& optimum() const { return optimum_; }
  double optimal_value() const { return optimal_value_; }
  double log_det_hessian() const { return log_det_hessian_; }
  double fmu_scale() const { return fmu_scale_; }

 private:
  Matrix hessian_;
  Vector optimum_;
  double optimal_value_;
  double log_det_hessian_;
  double fmu_scale_;
};

inline double evaluate(const QuadraticProblem& q, const Vector& x) {
  if (x.dim() != q.dim()) throw DimensionMismatch("evaluate: point dimension");
  const Matrix& h = q.hessian();
  const Vector& xs = q.optimum();
  const std::size_t n = q.dim();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double di = x[i] - xs[i];
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += h(i, j) * (x[j] - xs[j]);
    acc += di * row;
  }
  return 0.5 * acc + q.optimal_value();
}

/// Ellipsoid instance with geometrically spaced Hessian eigenvalues of ratio
/// `condition`; optionally det-normalized to det(H)=1 and conjugated by a
/// random orthogonal basis. Optimum at 0 with value 0.
inline QuadraticProblem make_ellipsoid(std::size_t d, double condition,
                                       bool normalize_det, RngStream& rng,
                                       bool rotated) {
  if (d < 2) throw DimensionMismatch("make_ellipsoid: d must be >= 2");
  if (!(condition >= 1.0))
    throw std::invalid_argument("make_ellipsoid: condition must be >= 1");
  std::vector<double> lambda(d);
  const double log_cond = std::log(condition);
  for (std::size_t i = 0; i < d; ++i) {
    double e = log_cond * static_cast<double>(i) / static_cast<double>(d - 1);
    if (normalize_det) e -= 0.5 * log_cond;
    lambda[i] = std::exp(e);
  }

  Matrix h(d);
  if (!rotated) {
    for (std::size_t i = 0; i < d; ++i) h(i, i) = lambda[i];
  } else {
    const OrthogonalSampleBlock basis = sample_orthogonal(rng, d);
    for (std::size_t i = 0; i < d; ++i) {
      const Vector u = (1.0 / basis.norms[i]) * basis.directions[i];
      add_scaled_outer(h, lambda[i], u);
    }
  }
  return QuadraticProblem(std::move(h), Vector(d), 0.0);
}

/// Invertible affine map x -> M x + b.
struct AffineMap {
  Matrix matrix;
  Vector offset;
};

inline Vector apply(const AffineMap& g, const Vector& x) {
  return g.matrix * x + g.offset;
}

/// The problem seen through the map g: pullback(x) = f(g^{-1}(x)), i.e.
/// Hessian M^{-T} H M^{-1}, optimum M x* + b, unchanged optimal value.
inline QuadraticProblem affine_pullback(const QuadraticProblem& q, const AffineMap& g) {
  if (g.matrix.dim() != q.dim() || g.offset.dim() != q.dim())
    throw DimensionMismatch("affine_pullback: map dimension");
  if (std::abs(determinant(g.matrix)) <= 1e-12)
    throw SingularMap("affine_pullback: map is singular");
  const Matrix m_inv = inverse(g.matrix);
  Matrix h = transpose(m_inv) * q.hessian() * m_inv;
  for (std::size_t i = 0; i < h.dim(); ++i)
    for (std::size_t j = i + 1; j < h.dim(); ++j) {
      const double v = 0.5 * (h(i, j) + h(j, i));
      h(i, j) = h(j, i) = v;
    }
  return QuadraticProblem(std::move(h), apply(g, q.optimum()), q.optimal_value());
}

/// d-th root of the Lebesgue measure of the strict sublevel set
/// {x : f(x) < f(m)}. Zero at the optimum. Closed form
/// V_d^(1/d) * sqrt(2 (f(m) - f*)) / det(H)^(1/(2d)).
inline double f_mu(const QuadraticProblem& q, const Vector& m) {
  const double gap = evaluate(q, m) - q.optimal_value();
  if (gap <= 0.0) return 0.0;
  return q.fmu_scale() * std::sqrt(2.0 * gap);
}

}  // namespace hees
