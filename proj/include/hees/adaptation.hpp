#pragma once

// Curvature estimation along sampled directions and construction of the
// multiplicative transformation-matrix update G. The update equalizes the
// measured curvatures relative to each other while keeping det(G) = 1, and
// acts as the identity on directions that were not used.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hees/errors.hpp"
#include "hees/linalg.hpp"
#include "hees/sampling.hpp"

namespace hees {

/// Fitness values of one mirrored offspring pair m +- sigma*A*b.
struct MirroredFitness {
  double plus = 0.0;
  double minus = 0.0;
};

/// Second difference curvature along a direction of raw norm b_norm:
/// (f+ + f- - 2 f_m) / (sigma^2 b_norm^2). May be negative or zero for
/// non-convex data; the caller interprets the sign.
inline double estimate_curvature(double f_m, double f_plus, double f_minus,
                                 double sigma, double b_norm) {
  if (!(sigma > 0.0)) throw std::invalid_argument("estimate_curvature: sigma must be > 0");
  if (!(b_norm > 0.0)) throw std::invalid_argument("estimate_curvature: b_norm must be > 0");
  return (f_plus + f_minus - 2.0 * f_m) / (sigma * sigma * b_norm * b_norm);
}

/// Two-direction update with learning rate 1:
/// G = I + (gamma1 - 1) u1 u1^T + (gamma2 - 1) u2 u2^T with
/// gamma1 = (h2/h1)^(1/4), gamma2 = (h1/h2)^(1/4). Unit vectors u1, u2 must
/// be orthogonal; G is the identity on their orthogonal complement.
inline Matrix compute_g_pair(double h1, double h2, const Vector& u1, const Vector& u2) {
  if (!(h1 > 0.0) || !(h2 > 0.0))
    throw NonPositiveCurvature("compute_g_pair: curvatures must be positive");
  if (u1.dim() != u2.dim()) throw DimensionMismatch("compute_g_pair: direction dims differ");
  const double gamma1 = std::pow(h2 / h1, 0.25);
  const double gamma2 = std::pow(h1 / h2, 0.25);
  Matrix g = Matrix::identity(u1.dim());
  add_scaled_outer(g, gamma1 - 1.0, u1);
  add_scaled_outer(g, gamma2 - 1.0, u2);
  return g;
}

/// Single-step reduction of tr(C) caused by the pair update, in closed form:
/// h1 + h2 - 2 sqrt(h1 h2) = (sqrt(h1) - sqrt(h2))^2 >= 0.
inline double predicted_trace_reduction(double h1, double h2) {
  if (!(h1 > 0.0) || !(h2 > 0.0))
    throw NonPositiveCurvature("predicted_trace_reduction: curvatures must be positive");
  return h1 + h2 - 2.0 * std::sqrt(h1 * h2);
}

/// Full update over ceil(lambda_tilde/d) blocks of orthogonal directions.
/// Blocks are filled block-major: slot k = (j-1)*d + i uses direction i of
/// block j; the first lambda_tilde slots are used, the rest receive a neutral
/// exponent. Steps: curvature estimates; identity on non-positive max
/// curvature; truncation at max(h)/kappa_trust; log transform; mean
/// subtraction over the lambda_tilde used entries; scaling by -eta_a/2;
/// G = (1/B) sum exp(q)/||b||^2 * b b^T over all slots.
inline Matrix compute_g_full(std::span<const OrthogonalSampleBlock> blocks,
                             double f_m,
                             std::span<const MirroredFitness> f_values,
                             double sigma, double kappa_trust, double eta_a,
                             std::size_t lambda_tilde) {
  if (blocks.empty()) throw ShapeMismatch("compute_g_full: no sample blocks");
  const std::size_t d = blocks.front().dim;
  for (const auto& blk : blocks) {
    if (blk.dim != d || blk.directions.size() != d || blk.norms.size() != d)
      throw ShapeMismatch("compute_g_full: malformed sample block");
  }
  if (lambda_tilde == 0) throw ShapeMismatch("compute_g_full: lambda_tilde must be >= 1");
  if (f_values.size() != lambda_tilde)
    throw ShapeMismatch("compute_g_full: fitness count != lambda_tilde");
  const std::size_t b_count = (lambda_tilde + d - 1) / d;
  if (blocks.size() != b_count)
    throw ShapeMismatch("compute_g_full: block count != ceil(lambda_tilde/d)");

  std::vector<double> norm_sq(b_count * d);
  std::vector<double> h(lambda_tilde);
  for (std::size_t j = 0; j < b_count; ++j)
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t k = j * d + i;
      norm_sq[k] = dot(blocks[j].directions[i], blocks[j].directions[i]);
      if (k < lambda_tilde)
        h[k] = estimate_curvature(f_m, f_values[k].plus, f_values[k].minus,
                                  sigma, std::sqrt(norm_sq[k]));
    }

  const double h_max = *std::max_element(h.begin(), h.end());
  if (h_max <= 0.0) return Matrix::identity(d);

  const double cutoff = h_max / kappa_trust;
  std::vector<double> q(lambda_tilde);
  double q_sum = 0.0;
  for (std::size_t k = 0; k < lambda_tilde; ++k) {
    q[k] = std::log(std::max(h[k], cutoff));
    q_sum += q[k];
  }
  const double q_mean = q_sum / static_cast<double>(lambda_tilde);
  for (double& qk : q) qk = (qk - q_mean) * (-0.5 * eta_a);

  Matrix g(d);
  const double inv_b = 1.0 / static_cast<double>(b_count);
  for (std::size_t j = 0; j < b_count; ++j)
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t k = j * d + i;
      const double qk = k < lambda_tilde ? q[k] : 0.0;
      add_scaled_outer(g, inv_b * std::exp(qk) / norm_sq[k], blocks[j].directions[i]);
    }
  return g;
}

}  // namespace hees
