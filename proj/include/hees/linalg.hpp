#pragma once

// Minimal dense linear algebra for small square matrices: orthonormalization,
// symmetric eigenvalues, determinants and products. Direct O(d^3) methods only.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "hees/errors.hpp"

namespace hees {

namespace detail {
inline void require_finite(std::span<const double> entries, const char* what) {
  for (double x : entries) {
    if (!std::isfinite(x))
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}
}  // namespace detail

/// Dense real vector with finite entries.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim) : v_(dim, 0.0) {}
  Vector(std::initializer_list<double> init) : v_(init) {
    detail::require_finite(v_, "Vector");
  }
  explicit Vector(std::vector<double> entries) : v_(std::move(entries)) {
    detail::require_finite(v_, "Vector");
  }

  std::size_t dim() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }
  const std::vector<double>& entries() const { return v_; }

  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

 private:
  std::vector<double> v_;
};

/// Dense square matrix, row-major, finite entries.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {}
  Matrix(std::size_t dim, std::vector<double> entries)
      : dim_(dim), a_(std::move(entries)) {
    if (a_.size() != dim * dim) throw DimensionMismatch("Matrix: entry count != dim^2");
    detail::require_finite(a_, "Matrix");
  }

  static Matrix identity(std::size_t dim) {
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t dim() const { return dim_; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * dim_ + j]; }
  const std::vector<double>& entries() const { return a_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> a_;
};

// ---- vector arithmetic ----

inline void check_same_dim(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("vector dimensions differ");
}

inline double dot(const Vector& a, const Vector& b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

inline Vector operator+(const Vector& a, const Vector& b) {
  check_same_dim(a, b);
  Vector r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vector operator-(const Vector& a, const Vector& b) {
  check_same_dim(a, b);
  Vector r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vector operator*(double s, const Vector& a) {
  Vector r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = s * a[i];
  return r;
}

inline Vector operator*(const Vector& a, double s) { return s * a; }

inline Vector& operator+=(Vector& a, const Vector& b) {
  check_same_dim(a, b);
  for (std::size_t i = 0; i < a.dim(); ++i) a[i] += b[i];
  return a;
}

// ---- matrix arithmetic ----

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("matrix dimensions differ");
  const std::size_t n = a.dim();
  Matrix r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

inline Vector operator*(const Matrix& a, const Vector& x) {
  if (a.dim() != x.dim()) throw DimensionMismatch("matrix/vector dimensions differ");
  const std::size_t n = a.dim();
  Vector r(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
    r[i] = s;
  }
  return r;
}

inline Matrix transpose(const Matrix& a) {
  const std::size_t n = a.dim();
  Matrix r(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r(j, i) = a(i, j);
  return r;
}

inline double trace(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a(i, i);
  return s;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double x : a.entries()) s += x * x;
  return std::sqrt(s);
}

/// m += coeff * u u^T
inline void add_scaled_outer(Matrix& m, double coeff, const Vector& u) {
  if (m.dim() != u.dim()) throw DimensionMismatch("outer product dimension");
  const std::size_t n = m.dim();
  for (std::size_t i = 0; i < n; ++i) {
    const double cu = coeff * u[i];
    for (std::size_t j = 0; j < n; ++j) m(i, j) += cu * u[j];
  }
}

// ---- Gram-Schmidt ----

/// Sequential modified Gram-Schmidt with one re-orthogonalization pass.
/// The i-th output depends only on inputs 1..i. Throws DegenerateInput when an
/// intermediate residual norm falls below 1e-10 times the input norm.
inline std::vector<Vector> gram_schmidt(std::span<const Vector> vectors) {
  std::vector<Vector> q;
  q.reserve(vectors.size());
  for (const Vector& input : vectors) {
    if (!q.empty() && q.front().dim() != input.dim())
      throw DimensionMismatch("gram_schmidt: mixed dimensions");
    if (q.size() >= input.dim())
      throw DegenerateInput("gram_schmidt: more vectors than dimensions");
    const double input_norm = norm(input);
    Vector v = input;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& qj : q) {
        const double proj = dot(v, qj);
        for (std::size_t i = 0; i < v.dim(); ++i) v[i] -= proj * qj[i];
      }
    }
    const double r = norm(v);
    if (r < 1e-10 * input_norm || r == 0.0)
      throw DegenerateInput("gram_schmidt: linearly dependent input");
    q.push_back((1.0 / r) * v);
  }
  return q;
}

inline std::vector<Vector> gram_schmidt(const std::vector<Vector>& vectors) {
  return gram_schmidt(std::span<const Vector>(vectors));
}

// ---- symmetric eigenvalues (cyclic Jacobi) ----

/// Eigenvalues of a symmetric matrix, ascending. Cyclic Jacobi sweeps;
/// throws NotSymmetric above 1e-10 relative asymmetry and NoConvergence
/// after 50 sweeps.
inline std::vector<double> sym_eig(const Matrix& s) {
  const std::size_t n = s.dim();
  if (n == 0) return {};

  double scale = 0.0, asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      scale = std::max(scale, std::abs(s(i, j)));
      asym = std::max(asym, std::abs(s(i, j) - s(j, i)));
    }
  if (asym > 1e-10 * std::max(scale, 1e-300))
    throw NotSymmetric("sym_eig: input is not symmetric");

  Matrix a = s;
  // work on the symmetrized copy
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = v;
    }

  const double norm_f = std::max(frobenius_norm(a), 1e-300);
  bool converged = false;
  for (int sweep = 0; sweep < 50 && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) <= 1e-14 * norm_f) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(2.0 * off) > 1e-14 * norm_f)
      throw NoConvergence("sym_eig: Jacobi sweep budget exhausted");
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

// ---- LU-based determinant / inverse ----

/// Determinant via partially pivoted LU. Singular input returns 0.
inline double determinant(const Matrix& m) {
  const std::size_t n = m.dim();
  Matrix a = m;
  double det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) return 0.0;
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a(piv, k), a(col, k));
      det = -det;
    }
    det *= a(col, col);
    const double inv_p = 1.0 / a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) * inv_p;
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a(r, k) -= f * a(col, k);
    }
  }
  return det;
}

/// log|det| and sign, computed from LU pivots; avoids under/overflow of
/// plain determinants. Returns {-inf, 0} for singular input.
inline std::pair<double, int> log_abs_det(const Matrix& m) {
  const std::size_t n = m.dim();
  Matrix a = m;
  double logdet = 0.0;
  int sign = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0)
      return {-std::numeric_limits<double>::infinity(), 0};
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a(piv, k), a(col, k));
      sign = -sign;
    }
    logdet += std::log(std::abs(a(col, col)));
    if (a(col, col) < 0.0) sign = -sign;
    const double inv_p = 1.0 / a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) * inv_p;
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a(r, k) -= f * a(col, k);
    }
  }
  return {logdet, sign};
}

/// Inverse via Gauss-Jordan with partial pivoting. Throws SingularMap.
inline Matrix inverse(const Matrix& m) {
  const std::size_t n = m.dim();
  Matrix a = m;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) throw SingularMap("inverse: singular matrix");
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) {
        std::swap(a(piv, k), a(col, k));
        std::swap(inv(piv, k), inv(col, k));
      }
    }
    const double inv_p = 1.0 / a(col, col);
    for (std::size_t k = 0; k < n; ++k) {
      a(col, k) *= inv_p;
      inv(col, k) *= inv_p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a(r, k) -= f * a(col, k);
        inv(r, k) -= f * inv(col, k);
      }
    }
  }
  return inv;
}

}  // namespace hees
