#pragma once

// Measurement layer: condition numbers, the det-normalized trace distance
// between a covariance and the inverse Hessian, progress rates from trace
// logs, and first hitting times.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hees/errors.hpp"
#include "hees/linalg.hpp"

namespace hees {

/// Per-iteration diagnostic record of an optimizer run. The covariance C is
/// the sampling covariance A A^T of the offspring distribution.
struct TraceRecord {
  std::uint64_t t = 0;
  double f_m = 0.0;
  double sigma = 0.0;
  double det_c = 0.0;
  double tr_normalized = 0.0;  // tr(HC) / (d * det(HC)^(1/d)), >= 1 by AM-GM
  double kappa_hc = 0.0;
  double f_mu = 0.0;
  bool success = false;
};

struct RunTrace {
  std::uint64_t seed = 0;
  std::vector<TraceRecord> records;
  std::string error;  // non-empty when the run aborted early
};

/// lambda_max / lambda_min via the symmetric eigensolver.
inline double condition_number(const Matrix& c) {
  const auto eig = sym_eig(c);
  if (eig.empty() || eig.front() <= 0.0)
    throw NotSPD("condition_number: matrix is not positive definite");
  return eig.back() / eig.front();
}

/// Closed-form 2x2 condition number from trace and determinant:
/// (tr/2 + sqrt(tr^2/4 - det)) / (tr/2 - sqrt(tr^2/4 - det)).
inline double condition_number_2x2(const Matrix& c) {
  if (c.dim() != 2) throw DimensionMismatch("condition_number_2x2: need a 2x2 matrix");
  const double tr = trace(c);
  const double det = determinant(c);
  const double disc = std::max(0.25 * tr * tr - det, 0.0);
  const double root = std::sqrt(disc);
  const double lo = 0.5 * tr - root;
  if (lo <= 0.0) throw NotSPD("condition_number_2x2: matrix is not positive definite");
  return (0.5 * tr + root) / lo;
}

/// Scale-invariant pre-metric between an SPD covariance C and the inverse of
/// an SPD Hessian H: tr( C/det(C)^(1/d) * H/det(H)^(1/d) ) - d. Non-negative,
/// zero exactly when C is a positive multiple of H^{-1}.
inline double normalized_trace_distance(const Matrix& c, const Matrix& h) {
  if (c.dim() != h.dim())
    throw DimensionMismatch("normalized_trace_distance: dimensions differ");
  const auto eig_c = sym_eig(c);
  if (eig_c.empty() || eig_c.front() <= 0.0)
    throw NotSPD("normalized_trace_distance: C is not positive definite");
  const auto eig_h = sym_eig(h);
  if (eig_h.front() <= 0.0)
    throw NotSPD("normalized_trace_distance: H is not positive definite");
  const std::size_t n = c.dim();
  double tr_ch = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) tr_ch += c(i, j) * h(i, j);
  const double log_norm = (log_abs_det(c).first + log_abs_det(h).first) / static_cast<double>(n);
  return tr_ch * std::exp(-log_norm) - static_cast<double>(n);
}

/// Limit of tr(HC)/d for the adapted covariance: (det(C0) det(H))^(1/d).
inline double alpha_target(const Matrix& c0, const Matrix& h) {
  if (c0.dim() != h.dim()) throw DimensionMismatch("alpha_target: dimensions differ");
  const auto eig_c = sym_eig(c0);
  if (eig_c.empty() || eig_c.front() <= 0.0)
    throw NotSPD("alpha_target: C0 is not positive definite");
  if (sym_eig(h).front() <= 0.0) throw NotSPD("alpha_target: H is not positive definite");
  return std::exp((log_abs_det(c0).first + log_abs_det(h).first) /
                  static_cast<double>(c0.dim()));
}

/// Ordinary least-squares slope of y against x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

/// Least-squares slope of log f_mu versus t over the record index window
/// [begin, end). Records with f_mu = 0 are excluded; throws EmptyWindow when
/// fewer than two usable records remain.
inline double log_progress_rate(const RunTrace& trace, std::size_t begin, std::size_t end) {
  if (begin >= end || end > trace.records.size())
    throw EmptyWindow("log_progress_rate: window out of range");
  std::vector<double> ts, ys;
  for (std::size_t i = begin; i < end; ++i) {
    const TraceRecord& r = trace.records[i];
    if (r.f_mu > 0.0) {
      ts.push_back(static_cast<double>(r.t));
      ys.push_back(std::log(r.f_mu));
    }
  }
  if (ts.size() < 2) throw EmptyWindow("log_progress_rate: no usable records in window");
  return ols_slope(ts, ys);
}

/// Window covering the trailing `fraction` of a trace, e.g. 0.5 for the late
/// half; returns {begin, end} record indices.
inline std::pair<std::size_t, std::size_t> trailing_window(const RunTrace& trace,
                                                           double fraction) {
  const std::size_t n = trace.records.size();
  const auto begin = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * (1.0 - fraction)));
  return {begin < n ? begin : (n == 0 ? 0 : n - 1), n};
}

/// Smallest index whose value lies strictly below `target`; nullopt when the
/// target is never reached.
inline std::optional<std::size_t> first_hitting_time(std::span<const double> series,
                                                     double target) {
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i] < target) return i;
  return std::nullopt;
}

}  // namespace hees
