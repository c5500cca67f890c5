#pragma once

// The optimizer loops: full HE-ES with weighted recombination and cumulative
// step-size adaptation, the minimal elitist (1+4)-HE-ES with the 1/5-rule,
// and the (1+1)-ES baseline obtained by disabling matrix adaptation.
//
// Offspring are sampled as m +- sigma * A * b with orthogonal mirrored
// directions b; the sampling covariance is A A^T. The diagnostics layer
// therefore reports covariance quantities through S = A^T H A, which shares
// its spectrum with H A A^T and contracts as S -> G S G under the update.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "hees/adaptation.hpp"
#include "hees/diagnostics.hpp"
#include "hees/errors.hpp"
#include "hees/linalg.hpp"
#include "hees/objectives.hpp"
#include "hees/rng.hpp"
#include "hees/sampling.hpp"

namespace hees {

struct StrategyState {
  Vector mean;
  double step_size = 1.0;
  Matrix factor;      // transformation factor A
  Vector csa_path;    // p_s, zero for the elitist variants
  double csa_norm = 0.0;  // g_s
  std::uint64_t iteration = 0;
};

inline StrategyState make_initial_state(Vector m0, double sigma0, Matrix a0) {
  if (m0.dim() != a0.dim()) throw DimensionMismatch("initial state: mean/factor dims differ");
  if (!(sigma0 > 0.0)) throw std::invalid_argument("initial state: sigma0 must be > 0");
  const auto [log_det, sign] = log_abs_det(a0);
  if (sign == 0 || log_det < std::log(1e-300))
    throw std::invalid_argument("initial state: factor must have |det| > 1e-300");
  StrategyState s;
  s.csa_path = Vector(m0.dim());
  s.mean = std::move(m0);
  s.step_size = sigma0;
  s.factor = std::move(a0);
  return s;
}

/// Parameters of the full HE-ES. The defaults follow standard CMA-style
/// constants so the mean and step-size dynamics stay conventional.
struct HeEsParams {
  std::size_t lambda_tilde = 0;  // mirrored pairs per iteration
  double c_s = 0.0;
  double d_s = 0.0;
  std::vector<double> weights;   // 2*lambda_tilde rank weights, sum 1
  double kappa_trust = 1e6;
  double eta_a = 1.0;
  double mu_eff_mirrored = 0.0;
  double chi_d = 0.0;

  /// Defaults for dimension d: lambda_tilde = 2 + floor(1.5 ln d) mirrored
  /// pairs (or the given count), log-rank weights over the best lambda_tilde
  /// of the 2*lambda_tilde offspring, and standard CSA constants derived
  /// from the effective selection mass.
  static HeEsParams defaults(std::size_t d, std::size_t lambda_tilde = 0) {
    HeEsParams p;
    const double dd = static_cast<double>(d);
    p.lambda_tilde = lambda_tilde != 0
                         ? lambda_tilde
                         : 2 + static_cast<std::size_t>(std::floor(1.5 * std::log(dd)));
    p.weights.assign(2 * p.lambda_tilde, 0.0);
    double w_sum = 0.0;
    for (std::size_t k = 0; k < p.lambda_tilde; ++k) {
      p.weights[k] = std::log(static_cast<double>(p.lambda_tilde) + 1.0) -
                     std::log(static_cast<double>(k) + 1.0);
      w_sum += p.weights[k];
    }
    double w_sq = 0.0;
    for (std::size_t k = 0; k < p.lambda_tilde; ++k) {
      p.weights[k] /= w_sum;
      w_sq += p.weights[k] * p.weights[k];
    }
    const double mu_eff = 1.0 / w_sq;
    p.mu_eff_mirrored = mu_eff;
    p.c_s = (mu_eff + 2.0) / (dd + mu_eff + 5.0);
    p.d_s = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (dd + 1.0)) - 1.0) + p.c_s;
    p.chi_d = std::sqrt(dd) * (1.0 - 1.0 / (4.0 * dd) + 1.0 / (21.0 * dd * dd));
    return p;
  }
};

/// Parameters of the elitist variants. c_sigma > 1; step size is multiplied
/// by c_sigma on success and c_sigma^(-1/4) on failure.
struct ElitistParams {
  double c_sigma = 0.0;
  double eta_a = 1.0;
  double kappa_trust = 1e6;

  static ElitistParams defaults(std::size_t d) {
    ElitistParams p;
    p.c_sigma = std::exp(1.0 / static_cast<double>(d));
    return p;
  }
};

struct StepResult {
  StrategyState state;
  bool success = false;
};

/// One iteration of the full HE-ES: B orthogonal blocks, 2*lambda_tilde
/// mirrored offspring, matrix adaptation, rank-weighted recombination, and
/// the mirrored-corrected CSA update.
inline StepResult he_es_step(const StrategyState& state, const QuadraticProblem& q,
                             RngStream& rng, const HeEsParams& p) {
  const std::size_t d = state.mean.dim();
  if (q.dim() != d) throw DimensionMismatch("he_es_step: problem dimension");
  if (d < 2) throw DimensionMismatch("he_es_step: d must be >= 2");
  const std::size_t lt = p.lambda_tilde;
  if (lt < 2 || p.weights.size() != 2 * lt)
    throw ShapeMismatch("he_es_step: malformed parameters");
  const std::size_t b_count = (lt + d - 1) / d;

  std::vector<OrthogonalSampleBlock> blocks;
  blocks.reserve(b_count);
  for (std::size_t j = 0; j < b_count; ++j) blocks.push_back(sample_orthogonal(rng, d));

  const double sigma = state.step_size;
  const double f_m = evaluate(q, state.mean);

  // mirrored offspring for the used slots k = j*d + i < lambda_tilde
  std::vector<Vector> x_plus, x_minus;
  std::vector<MirroredFitness> fitness(lt);
  x_plus.reserve(lt);
  x_minus.reserve(lt);
  for (std::size_t k = 0; k < lt; ++k) {
    const Vector& b = blocks[k / d].directions[k % d];
    const Vector step = sigma * (state.factor * b);
    x_plus.push_back(state.mean + step);
    x_minus.push_back(state.mean - step);
    fitness[k].plus = evaluate(q, x_plus.back());
    fitness[k].minus = evaluate(q, x_minus.back());
  }

  StepResult out;
  out.state = state;

  const Matrix g = compute_g_full(blocks, f_m, fitness, sigma, p.kappa_trust,
                                  p.eta_a, lt);
  out.state.factor = state.factor * g;

  // rank-based weights over all 2*lambda_tilde offspring, ties by index
  std::vector<std::pair<double, std::size_t>> order(2 * lt);
  for (std::size_t k = 0; k < lt; ++k) {
    order[2 * k] = {fitness[k].plus, 2 * k};
    order[2 * k + 1] = {fitness[k].minus, 2 * k + 1};
  }
  std::sort(order.begin(), order.end());
  std::vector<double> w_plus(lt, 0.0), w_minus(lt, 0.0);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const std::size_t idx = order[rank].second;
    (idx % 2 == 0 ? w_plus : w_minus)[idx / 2] = p.weights[rank];
  }

  Vector mean(d);
  for (std::size_t k = 0; k < lt; ++k) {
    if (w_plus[k] != 0.0) mean += w_plus[k] * x_plus[k];
    if (w_minus[k] != 0.0) mean += w_minus[k] * x_minus[k];
  }
  out.state.mean = mean;

  out.state.csa_norm = (1.0 - p.c_s) * (1.0 - p.c_s) * state.csa_norm +
                       p.c_s * (2.0 - p.c_s);
  Vector path = (1.0 - p.c_s) * state.csa_path;
  const double path_gain = std::sqrt(p.c_s * (2.0 - p.c_s) * p.mu_eff_mirrored);
  for (std::size_t k = 0; k < lt; ++k) {
    const double dw = w_plus[k] - w_minus[k];
    if (dw != 0.0) path += (path_gain * dw) * blocks[k / d].directions[k % d];
  }
  out.state.csa_path = path;
  out.state.step_size =
      sigma * std::exp((p.c_s / p.d_s) *
                       (norm(path) / p.chi_d - std::sqrt(out.state.csa_norm)));
  out.state.iteration = state.iteration + 1;
  out.success = evaluate(q, out.state.mean) < f_m;
  return out;
}

namespace detail {

/// Shared elitist iteration; matrix adaptation is optional so the (1+1)-ES
/// consumes the same RNG draws as the (1+4)-HE-ES.
inline StepResult elitist_step(const StrategyState& state, const QuadraticProblem& q,
                               RngStream& rng, const ElitistParams& p, bool adapt_matrix) {
  const std::size_t d = state.mean.dim();
  if (q.dim() != d) throw DimensionMismatch("elitist step: problem dimension");
  if (adapt_matrix && d < 2)
    throw DimensionMismatch("one_plus_four_step: d must be >= 2");
  if (!(p.c_sigma > 1.0)) throw std::invalid_argument("elitist step: c_sigma must be > 1");

  const OrthogonalSampleBlock block = sample_orthogonal(rng, d);
  const double sigma = state.step_size;
  const double f_m = evaluate(q, state.mean);

  const Vector step1 = sigma * (state.factor * block.directions[0]);
  const Vector x1_plus = state.mean + step1;
  const double f1_plus = evaluate(q, x1_plus);

  StepResult out;
  out.state = state;

  if (adapt_matrix) {
    const Vector step2 = sigma * (state.factor * block.directions[1]);
    std::vector<MirroredFitness> fitness(2);
    fitness[0] = {f1_plus, evaluate(q, state.mean - step1)};
    fitness[1] = {evaluate(q, state.mean + step2), evaluate(q, state.mean - step2)};
    const Matrix g = compute_g_full({&block, 1}, f_m, fitness, sigma,
                                    p.kappa_trust, p.eta_a, 2);
    out.state.factor = state.factor * g;
  }

  if (f1_plus <= f_m) {
    out.state.mean = x1_plus;
    out.state.step_size = sigma * p.c_sigma;
    out.success = true;
  } else {
    out.state.step_size = sigma * std::pow(p.c_sigma, -0.25);
    out.success = false;
  }
  out.state.iteration = state.iteration + 1;
  return out;
}

}  // namespace detail

inline StepResult one_plus_four_step(const StrategyState& state, const QuadraticProblem& q,
                                     RngStream& rng, const ElitistParams& p) {
  return detail::elitist_step(state, q, rng, p, true);
}

inline StepResult one_plus_one_step(const StrategyState& state, const QuadraticProblem& q,
                                    RngStream& rng, const ElitistParams& p) {
  return detail::elitist_step(state, q, rng, p, false);
}

enum class Strategy { he_es, one_plus_four, one_plus_one };

struct StrategyParams {
  HeEsParams he_es;
  ElitistParams elitist;

  static StrategyParams defaults(std::size_t d) {
    return StrategyParams{HeEsParams::defaults(d), ElitistParams::defaults(d)};
  }
};

/// Diagnostic record of the state after a step. det(C) is det(A)^2; the
/// H-weighted quantities are read off S = A^T H A.
inline TraceRecord make_trace_record(const StrategyState& state,
                                     const QuadraticProblem& q, bool success) {
  const std::size_t d = state.mean.dim();
  TraceRecord r;
  r.t = state.iteration;
  r.f_m = evaluate(q, state.mean);
  r.sigma = state.step_size;
  r.success = success;
  r.f_mu = f_mu(q, state.mean);

  const double log_det_c = 2.0 * log_abs_det(state.factor).first;
  r.det_c = std::exp(log_det_c);

  const Matrix s = transpose(state.factor) * q.hessian() * state.factor;
  const double log_det_hc = log_det_c + q.log_det_hessian();
  r.tr_normalized = trace(s) *
                    std::exp(-log_det_hc / static_cast<double>(d)) /
                    static_cast<double>(d);
  const auto eig = sym_eig(s);
  r.kappa_hc = eig.back() / std::max(eig.front(), 1e-300);
  return r;
}

/// Iterates the chosen stepper for `budget` iterations, recording one
/// diagnostic record per step into the returned trace. Stops early once
/// f(m) - f* falls below 1e-300.
inline RunTrace run(Strategy strategy, const QuadraticProblem& q, StrategyState state,
                    RngStream& rng, std::uint64_t budget,
                    const StrategyParams& params) {
  RunTrace trace;
  trace.records.reserve(std::min<std::uint64_t>(budget, 1u << 20));
  for (std::uint64_t t = 0; t < budget; ++t) {
    StepResult r;
    switch (strategy) {
      case Strategy::he_es:
        r = he_es_step(state, q, rng, params.he_es);
        break;
      case Strategy::one_plus_four:
        r = one_plus_four_step(state, q, rng, params.elitist);
        break;
      case Strategy::one_plus_one:
        r = one_plus_one_step(state, q, rng, params.elitist);
        break;
    }
    state = std::move(r.state);
    trace.records.push_back(make_trace_record(state, q, r.success));
    if (trace.records.back().f_m - q.optimal_value() < 1e-300) break;
  }
  return trace;
}

}  // namespace hees
