#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hees/objectives.hpp"
#include "hees/rng.hpp"
#include "hees/strategies.hpp"
#include "test_support.hpp"

using namespace hees;
using test::max_abs_diff;

namespace {

QuadraticProblem sphere(std::size_t d) {
  return QuadraticProblem(Matrix::identity(d), Vector(d), 0.0);
}

Vector unit_distance_point(std::size_t d) {
  Vector m(d);
  const double c = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i) m[i] = c;
  return m;
}

StrategyState default_state(std::size_t d) {
  return make_initial_state(unit_distance_point(d), 1.0, Matrix::identity(d));
}

bool states_equal(const StrategyState& a, const StrategyState& b) {
  if (a.step_size != b.step_size || a.csa_norm != b.csa_norm ||
      a.iteration != b.iteration)
    return false;
  for (std::size_t i = 0; i < a.mean.dim(); ++i) {
    if (a.mean[i] != b.mean[i] || a.csa_path[i] != b.csa_path[i]) return false;
    for (std::size_t j = 0; j < a.mean.dim(); ++j)
      if (a.factor(i, j) != b.factor(i, j)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("default parameters are internally consistent") {
  const HeEsParams p = HeEsParams::defaults(10);
  CHECK(p.lambda_tilde == 5);
  REQUIRE(p.weights.size() == 10);
  double sum = 0.0;
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    sum += p.weights[k];
    if (k > 0) CHECK(p.weights[k] <= p.weights[k - 1]);
    if (k >= p.lambda_tilde) CHECK(p.weights[k] == 0.0);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.c_s > 0.0);
  CHECK(p.c_s < 1.0);
  CHECK(p.d_s > 0.0);
  CHECK(ElitistParams::defaults(10).c_sigma == doctest::Approx(std::exp(0.1)));
}

TEST_CASE("he_es step on the sphere leaves the factor unchanged") {
  const QuadraticProblem q = sphere(6);
  RngStream rng(3);
  const StepResult r = he_es_step(default_state(6), q, rng, HeEsParams::defaults(6));
  CHECK(max_abs_diff(r.state.factor, Matrix::identity(6)) < 1e-12);
}

TEST_CASE("he_es step is bit-deterministic in the seed") {
  RngStream prng(1);
  const QuadraticProblem q = make_ellipsoid(5, 50.0, true, prng, true);
  RngStream r1(99), r2(99);
  const HeEsParams p = HeEsParams::defaults(5);
  const StepResult a = he_es_step(default_state(5), q, r1, p);
  const StepResult b = he_es_step(default_state(5), q, r2, p);
  CHECK(states_equal(a.state, b.state));
}

TEST_CASE("the csa normalizer converges monotonically to one") {
  const QuadraticProblem q = sphere(4);
  RngStream rng(17);
  const HeEsParams p = HeEsParams::defaults(4);
  StrategyState st = default_state(4);
  double prev = 0.0;
  for (int t = 0; t < 400; ++t) {
    st = he_es_step(st, q, rng, p).state;
    CHECK(st.csa_norm >= prev);
    CHECK(st.csa_norm <= 1.0 + 1e-12);
    prev = st.csa_norm;
  }
  CHECK(std::abs(st.csa_norm - 1.0) < 1e-8);
  // fixed point: 1 - (1-c)^2 = c(2-c) exactly
  const double g_fixed = (1.0 - p.c_s) * (1.0 - p.c_s) * 1.0 + p.c_s * (2.0 - p.c_s);
  CHECK(g_fixed == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("he_es converges on the sphere") {
  const QuadraticProblem q = sphere(10);
  RngStream rng(7);
  const RunTrace tr = run(Strategy::he_es, q, default_state(10), rng, 1500,
                          StrategyParams::defaults(10));
  REQUIRE(!tr.records.empty());
  CHECK(tr.records.back().f_m < 1e-30);
}

TEST_CASE("he_es runs with multiple direction blocks at d=2") {
  // default lambda_tilde = 3 at d = 2, so every iteration samples two blocks
  const HeEsParams p = HeEsParams::defaults(2);
  REQUIRE(p.lambda_tilde == 3);
  const QuadraticProblem q = sphere(2);
  RngStream rng(61);
  const RunTrace tr = run(Strategy::he_es, q, default_state(2), rng, 600,
                          StrategyParams::defaults(2));
  CHECK(tr.records.back().f_m < 1e-20);

  RngStream prng(62);
  const QuadraticProblem ell = make_ellipsoid(2, 100.0, true, prng, true);
  RngStream rng2(63);
  const RunTrace tr2 = run(Strategy::he_es, ell, default_state(2), rng2, 600,
                           StrategyParams::defaults(2));
  CHECK(tr2.records.back().f_m < 1e-20);
  CHECK(tr2.records.back().tr_normalized < tr2.records.front().tr_normalized);
}

TEST_CASE("elitist success and failure branches are exact") {
  const QuadraticProblem q = sphere(8);
  RngStream rng(11);
  const ElitistParams p = ElitistParams::defaults(8);
  StrategyState st = default_state(8);
  int successes = 0, failures = 0;
  for (int t = 0; t < 300; ++t) {
    const double f_before = evaluate(q, st.mean);
    const StepResult r = one_plus_four_step(st, q, rng, p);
    if (r.success) {
      ++successes;
      CHECK(r.state.step_size == st.step_size * p.c_sigma);
      CHECK(evaluate(q, r.state.mean) <= f_before);
    } else {
      ++failures;
      CHECK(r.state.step_size == st.step_size * std::pow(p.c_sigma, -0.25));
      CHECK(max_abs_diff(r.state.mean, st.mean) == 0.0);
    }
    st = r.state;
  }
  CHECK(successes > 0);
  CHECK(failures > 0);
}

TEST_CASE("one_plus_four keeps the factor near identity on the sphere") {
  const QuadraticProblem q = sphere(10);
  RngStream rng(13);
  const ElitistParams p = ElitistParams::defaults(10);
  StrategyState st = default_state(10);
  for (int t = 0; t < 500; ++t) {
    const StepResult r = one_plus_four_step(st, q, rng, p);
    CHECK(max_abs_diff(r.state.factor, st.factor) < 1e-12);
    st = r.state;
  }
  CHECK(max_abs_diff(st.factor, Matrix::identity(10)) < 1e-12);
}

TEST_CASE("one_plus_one never touches the factor") {
  RngStream rng(19);
  const QuadraticProblem q = make_ellipsoid(6, 1e4, true, rng, true);
  RngStream run_rng(21);
  const ElitistParams p = ElitistParams::defaults(6);
  StrategyState st = default_state(6);
  for (int t = 0; t < 1000; ++t) st = one_plus_one_step(st, q, run_rng, p).state;
  CHECK(max_abs_diff(st.factor, Matrix::identity(6)) == 0.0);
  CHECK(st.iteration == 1000);
}

TEST_CASE("one_plus_one matches one_plus_four on the sphere with equal seeds") {
  const QuadraticProblem q = sphere(10);
  RngStream ra(23), rb(23);
  const ElitistParams p = ElitistParams::defaults(10);
  StrategyState sa = default_state(10), sb = default_state(10);
  for (int t = 0; t < 500; ++t) {
    sa = one_plus_four_step(sa, q, ra, p).state;
    sb = one_plus_one_step(sb, q, rb, p).state;
    const double scale = std::max(1e-300, norm(sa.mean));
    CHECK(max_abs_diff(sa.mean, sb.mean) < 1e-12 * std::max(1.0, scale));
    CHECK(std::abs(sa.step_size - sb.step_size) < 1e-12 * sb.step_size);
  }
}

TEST_CASE("run respects the budget and records steps in order") {
  const QuadraticProblem q = sphere(5);
  RngStream rng(29);
  const RunTrace tr = run(Strategy::one_plus_four, q, default_state(5), rng, 100,
                          StrategyParams::defaults(5));
  REQUIRE(tr.records.size() == 100);
  for (std::size_t i = 0; i < tr.records.size(); ++i)
    CHECK(tr.records[i].t == i + 1);
}

TEST_CASE("run stops once the objective gap underflows") {
  const QuadraticProblem q = sphere(4);
  RngStream rng(31);
  const StrategyState at_optimum = make_initial_state(Vector(4), 1.0, Matrix::identity(4));
  const RunTrace tr = run(Strategy::one_plus_four, q, at_optimum, rng, 50,
                          StrategyParams::defaults(4));
  CHECK(tr.records.size() == 1);
}

TEST_CASE("identical seeds give identical traces") {
  RngStream prng(5);
  const QuadraticProblem q = make_ellipsoid(6, 100.0, true, prng, true);
  RngStream ra(37), rb(37);
  const StrategyParams params = StrategyParams::defaults(6);
  const RunTrace a = run(Strategy::he_es, q, default_state(6), ra, 120, params);
  const RunTrace b = run(Strategy::he_es, q, default_state(6), rb, 120, params);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].f_m == b.records[i].f_m);
    CHECK(a.records[i].sigma == b.records[i].sigma);
    CHECK(a.records[i].det_c == b.records[i].det_c);
    CHECK(a.records[i].tr_normalized == b.records[i].tr_normalized);
    CHECK(a.records[i].kappa_hc == b.records[i].kappa_hc);
    CHECK(a.records[i].f_mu == b.records[i].f_mu);
    CHECK(a.records[i].success == b.records[i].success);
  }
}

TEST_CASE("(1+4) on a quadratic converges at sphere-like precision") {
  const QuadraticProblem q = sphere(10);
  RngStream rng(41);
  const RunTrace tr = run(Strategy::one_plus_four, q, default_state(10), rng, 2000,
                          StrategyParams::defaults(10));
  CHECK(tr.records.back().f_m < 1e-10);
}

TEST_CASE("elitist f values never increase") {
  RngStream prng(6);
  const QuadraticProblem q = make_ellipsoid(8, 1e4, true, prng, true);
  for (const Strategy s : {Strategy::one_plus_four, Strategy::one_plus_one}) {
    RngStream rng(43);
    const RunTrace tr = run(s, q, default_state(8), rng, 800, StrategyParams::defaults(8));
    for (std::size_t i = 1; i < tr.records.size(); ++i)
      CHECK(tr.records[i].f_m <= tr.records[i - 1].f_m);
  }
}

TEST_CASE("(1+4) conserves det(C) and contracts the trace distance") {
  RngStream prng(8);
  const QuadraticProblem q = make_ellipsoid(6, 1e4, true, prng, false);
  for (std::uint64_t seed : {47ull, 48ull, 49ull}) {
    RngStream rng(seed);
    const RunTrace tr = run(Strategy::one_plus_four, q, default_state(6), rng, 1000,
                            StrategyParams::defaults(6));
    double prev_delta = 1e300;
    for (const TraceRecord& r : tr.records) {
      CHECK(std::abs(r.det_c - 1.0) < 1e-8);
      CHECK(r.tr_normalized >= 1.0 - 1e-12);
      const double delta = 6.0 * (r.tr_normalized - 1.0);
      CHECK(delta <= prev_delta + 1e-10);
      prev_delta = delta;
    }
  }
}

TEST_CASE("initial states require a full-rank factor") {
  CHECK_THROWS_AS(make_initial_state(Vector(3), 1.0, Matrix(3)), std::invalid_argument);
  CHECK_THROWS_AS(make_initial_state(Vector(3), 0.0, Matrix::identity(3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_initial_state(Vector(3), 1.0, Matrix::identity(4)),
                  DimensionMismatch);
}

TEST_CASE("(1+4) hits deep f_mu targets within a generous budget") {
  const QuadraticProblem q = sphere(10);
  const StrategyParams params = StrategyParams::defaults(10);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RngStream rng(seed);
    const RunTrace tr = run(Strategy::one_plus_four, q, default_state(10), rng, 5000, params);
    std::vector<double> f_mu_series;
    f_mu_series.reserve(tr.records.size());
    for (const TraceRecord& r : tr.records) f_mu_series.push_back(r.f_mu);
    const auto hit = first_hitting_time(f_mu_series, std::exp(-20.0));
    REQUIRE(hit.has_value());
    CHECK(*hit < 5000);
  }
}

TEST_CASE("(1+1) sphere progress rate scales like 1/d") {
  const QuadraticProblem q = sphere(10);
  RngStream rng(59);
  const RunTrace tr = run(Strategy::one_plus_one, q, default_state(10), rng, 3000,
                          StrategyParams::defaults(10));
  const auto [b, e] = trailing_window(tr, 0.5);
  const double rate = log_progress_rate(tr, b, e);
  CHECK(rate < -0.001);
  CHECK(rate > -0.1);
}

TEST_CASE("trajectories are equivariant under affine maps") {
  // run on f with (m, sigma, A) versus on the pullback with (g(m), sigma, M A)
  RngStream prng(9);
  const std::size_t d = 5;
  const QuadraticProblem q = make_ellipsoid(d, 100.0, true, prng, true);
  for (int trial = 0; trial < 2; ++trial) {
    const auto left = test::random_orthonormal(prng, d, d);
    Matrix m_map(d);
    for (std::size_t i = 0; i < d; ++i)
      add_scaled_outer(m_map, std::exp(0.5 * prng.next_gaussian()), left[i]);
    const AffineMap g{m_map, standard_normal_vector(prng, d)};
    const QuadraticProblem pulled = affine_pullback(q, g);

    for (const Strategy s : {Strategy::he_es, Strategy::one_plus_four}) {
      const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(trial);
      RngStream ra(seed), rb(seed);
      StrategyState base = default_state(d);
      StrategyState mapped = make_initial_state(apply(g, base.mean), base.step_size,
                                                g.matrix * base.factor);
      const StrategyParams params = StrategyParams::defaults(d);
      for (int t = 0; t < 30; ++t) {
        base = (s == Strategy::he_es ? he_es_step(base, q, ra, params.he_es)
                                     : one_plus_four_step(base, q, ra, params.elitist))
                   .state;
        mapped = (s == Strategy::he_es ? he_es_step(mapped, pulled, rb, params.he_es)
                                       : one_plus_four_step(mapped, pulled, rb, params.elitist))
                     .state;
        const Vector expect_mean = apply(g, base.mean);
        const Matrix expect_factor = g.matrix * base.factor;
        CHECK(max_abs_diff(mapped.mean, expect_mean) <
              1e-6 * std::max(1.0, norm(expect_mean)));
        CHECK(std::abs(mapped.step_size - base.step_size) < 1e-6 * base.step_size);
        CHECK(max_abs_diff(mapped.factor, expect_factor) <
              1e-6 * std::max(1.0, frobenius_norm(expect_factor)));
      }
    }
  }
}

TEST_CASE("trajectories are invariant under affine fitness scaling") {
  RngStream prng(10);
  const std::size_t d = 6;
  const QuadraticProblem q = make_ellipsoid(d, 1e2, true, prng, true);
  Matrix h3 = q.hessian();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) h3(i, j) *= 3.0;
  const QuadraticProblem q3(h3, q.optimum(), 3.0 * q.optimal_value() + 7.0);

  for (const Strategy s : {Strategy::he_es, Strategy::one_plus_four}) {
    RngStream ra(51), rb(51);
    // far-out start keeps 3 f(m) well above the +7 offset for all 50 steps
    StrategyState sa = make_initial_state(1e6 * unit_distance_point(d), 1e5,
                                          Matrix::identity(d));
    StrategyState sb = sa;
    const StrategyParams params = StrategyParams::defaults(d);
    for (int t = 0; t < 50; ++t) {
      sa = (s == Strategy::he_es ? he_es_step(sa, q, ra, params.he_es)
                                 : one_plus_four_step(sa, q, ra, params.elitist))
               .state;
      sb = (s == Strategy::he_es ? he_es_step(sb, q3, rb, params.he_es)
                                 : one_plus_four_step(sb, q3, rb, params.elitist))
               .state;
      CHECK(max_abs_diff(sa.mean, sb.mean) < 1e-9 * std::max(1.0, norm(sa.mean)));
      CHECK(std::abs(sa.step_size - sb.step_size) < 1e-9 * sa.step_size);
      CHECK(max_abs_diff(sa.factor, sb.factor) < 1e-9 * frobenius_norm(sa.factor));
    }
  }
}
