#include <doctest.h>

#include <cmath>
#include <random>

#include "sidar/check.hpp"
#include "sidar/multiplier.hpp"
#include "sidar/numerics.hpp"
#include "sidar/riccati.hpp"
#include "test_support.hpp"

using namespace sidar;

TEST_SUITE("multiplier") {

TEST_CASE("value at the origin is linear in lambda") {
  const ProblemInstance s5 = testsup::scalar_example();
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
  CHECK(value_L(x0, 0.7, 3, 1.3, s5) == 0.7 * 1.3 / 2.0);
  CHECK(value_L(x0, 1.0, 0, 2.0, s5) == 1.0);
}

TEST_CASE("stage-0 full-budget value matches the initial-stage objective") {
  const ProblemInstance s5 = testsup::scalar_example();
  Eigen::VectorXd x(1);
  x << 0.8;
  const double lam = 0.9;
  const TailSweep sweep = tail_sweep(lam, s5, 0);
  const double expected =
      0.5 * (0.8 / std::sqrt(s5.alpha)) * sweep.Pi(0)(0, 0) *
          (0.8 / std::sqrt(s5.alpha)) +
      lam / 2.0;
  CHECK(value_L(x, s5.alpha, 0, lam, s5) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("value is convex in lambda on sampled triples") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 8; ++trial) {
    const ProblemInstance inst = random_instance(rng);
    const double lam1 = lambda_ladder(inst).lambda(1);
    const Eigen::VectorXd x = testsup::random_vec(rng, inst.n());
    for (int i = 0; i < 6; ++i) {
      const double a = lam1 + 0.2 + 0.5 * i;
      const double b = a + 0.8;
      const double va = value_L(x, inst.alpha, 0, a, inst);
      const double vb = value_L(x, inst.alpha, 0, b, inst);
      const double vm = value_L(x, inst.alpha, 0, 0.5 * (a + b), inst);
      CHECK(vm <= 0.5 * (va + vb) + 1e-9 * (1.0 + std::abs(vm)));
    }
  }
}

TEST_CASE("stationary disturbance basics") {
  const ProblemInstance s5 = testsup::scalar_example();
  CHECK(stationary_disturbance(Eigen::VectorXd::Zero(1), 0, 0.8, s5).norm() ==
        0.0);

  // Pf = 0 single-stage tail: J_{N-1} = 0 so z = 0.
  Eigen::VectorXd x(1);
  x << 1.7;
  const Eigen::VectorXd z = stationary_disturbance(x, s5.N - 1, 0.8, s5);
  CHECK(z.size() == 1);
  CHECK(z.norm() == 0.0);
}

TEST_CASE("stationary disturbance replays the closed loop stage by stage") {
  std::mt19937_64 rng(67);
  const InstanceGenOptions opts;
  for (int trial = 0; trial < 6; ++trial) {
    const ProblemInstance inst = random_instance(rng, opts);
    const double lam = lambda_ladder(inst).lambda(1) + 0.4;
    const Eigen::VectorXd x = testsup::random_vec(rng, inst.n());
    const int k = inst.N / 2;
    const Eigen::VectorXd z = stationary_disturbance(x, k, lam, inst);
    const TailSweep sweep = tail_sweep(std::max(lam, kLambdaFloor), inst, k);
    Eigen::VectorXd xj = x;
    for (int j = k; j < inst.N; ++j) {
      CHECK((z.segment((j - k) * inst.q(), inst.q()) - sweep.stage(j).J * xj)
                .norm() <= 1e-12);
      xj = sweep.stage(j).F * xj;
    }
  }
}

TEST_CASE("derivative formula against central finite differences") {
  std::mt19937_64 rng(71);
  int done = 0;
  while (done < 20) {
    const ProblemInstance inst = random_instance(rng);
    const double lam1 = lambda_ladder(inst).lambda(1);
    const Eigen::VectorXd x = testsup::random_vec(rng, inst.n());
    const double lam = lam1 + 0.1 + 1.5 * std::abs(testsup::random_vec(rng, 1)(0));
    const double h = 1e-6 * (1.0 + lam);
    const double analytic = dL_dlambda(x, inst.alpha, 0, lam, inst);
    const double fd = (value_L(x, inst.alpha, 0, lam + h, inst) -
                       value_L(x, inst.alpha, 0, lam - h, inst)) /
                      (2.0 * h);
    CHECK(std::abs(analytic - fd) <= 1e-5 * (1.0 + std::abs(analytic)));
    ++done;
  }
}

TEST_CASE("derivative trivia: zero state and exact budget") {
  const ProblemInstance s5 = testsup::scalar_example();
  CHECK(dL_dlambda(Eigen::VectorXd::Zero(1), s5.alpha, 0, 0.9, s5) == 0.5);

  Eigen::VectorXd x(1);
  x << 0.4;
  const double lam = 0.9;
  const double zsq =
      stationary_disturbance(x, 0, lam, s5).squaredNorm();
  CHECK(dL_dlambda(x, zsq, 0, lam, s5) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("solver: origin sits at the lower bound") {
  const ProblemInstance s5 = testsup::scalar_example();
  const FeasibilityLadder ladder = lambda_ladder(s5);
  const MultiplierSolution sol =
      solve_multiplier(Eigen::VectorXd::Zero(1), s5.alpha, 0, s5, ladder);
  CHECK(sol.at_lower_bound);
  CHECK(sol.lambda_star == ladder.lambda(1));
  CHECK(sol.z_norm_sq == 0.0);
  CHECK_FALSE(sol.budget_exhausted);
}

TEST_CASE("solver: state scaled onto the boundary stays at the lower bound") {
  const ProblemInstance s5 = testsup::scalar_example();
  const FeasibilityLadder ladder = lambda_ladder(s5);
  Eigen::VectorXd x(1);
  x << 1.0;
  const double zsq =
      stationary_disturbance(x, 0, ladder.lambda(1), s5).squaredNorm();
  REQUIRE(zsq > 0.0);
  const Eigen::VectorXd xb = x * std::sqrt(s5.alpha / zsq);
  const MultiplierSolution sol = solve_multiplier(xb, s5.alpha, 0, s5, ladder);
  CHECK(sol.at_lower_bound);
  CHECK(sol.lambda_star == ladder.lambda(1));
}

TEST_CASE("solver: interior optimum pins the stationary norm to the budget") {
  const ProblemInstance s5 = testsup::scalar_example();
  const FeasibilityLadder ladder = lambda_ladder(s5);
  Eigen::VectorXd x(1);
  x << 2.5;  // far outside the linear region
  const MultiplierSolution sol = solve_multiplier(x, s5.alpha, 0, s5, ladder);
  CHECK_FALSE(sol.at_lower_bound);
  CHECK(sol.lambda_star > ladder.lambda(1));
  CHECK(std::abs(sol.z_norm_sq - s5.alpha) <= 1e-6 * (1.0 + s5.alpha));

  // Dense grid certificate: no sampled lambda does better.
  for (int i = 0; i < 50; ++i) {
    const double lam =
        ladder.lambda(1) +
        (sol.lambda_star + 10.0 - ladder.lambda(1)) * i / 49.0;
    CHECK(sol.value <=
          value_L(x, s5.alpha, 0, lam, s5) + 1e-9 * (1.0 + std::abs(sol.value)));
  }
}

TEST_CASE("solver: monotone derivative and the region-flag iff") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 8; ++trial) {
    const ProblemInstance inst = random_instance(rng);
    const FeasibilityLadder ladder = lambda_ladder(inst);
    const Eigen::VectorXd x = testsup::random_vec(rng, inst.n());
    const double lam1 = ladder.lambda(1);
    double prev = -1e300;
    for (int i = 0; i < 8; ++i) {
      const double d = dL_dlambda(x, inst.alpha, 0, lam1 + 0.3 * i, inst);
      CHECK(d >= prev - 1e-9);
      prev = d;
    }
    const MultiplierSolution sol =
        solve_multiplier(x, inst.alpha, 0, inst, ladder);
    CHECK(sol.at_lower_bound == (sol.derivative_at_lower >= -1e-9));
  }
}

TEST_CASE("coercivity guard: value dominates its linear term") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 6; ++trial) {
    const ProblemInstance inst = random_instance(rng);
    const double lam1 = lambda_ladder(inst).lambda(1);
    const Eigen::VectorXd x = testsup::random_vec(rng, inst.n());
    for (int i = 0; i < 5; ++i) {
      const double lam = lam1 + 0.5 * i;
      const double v = value_L(x, inst.alpha, 0, lam, inst);
      CHECK(v >= inst.alpha * lam / (2.0 * inst.alpha) -
                     1e-10 * (1.0 + std::abs(v)));
    }
  }
}

TEST_CASE("exhausted budget returns the large-lambda limit policy") {
  const ProblemInstance s5 = testsup::scalar_example();
  const FeasibilityLadder ladder = lambda_ladder(s5);
  Eigen::VectorXd x(1);
  x << 0.5;
  const MultiplierSolution sol = solve_multiplier(x, 0.0, 3, s5, ladder);
  CHECK(sol.budget_exhausted);
  CHECK_FALSE(sol.at_lower_bound);
  CHECK(sol.lambda_star == 1e9 * (1.0 + ladder.lower_bound(3)));
  CHECK(sol.z_norm_sq <= 1e-6);
}

TEST_CASE("optimal value: origin, identity, and grid-game cross-check") {
  const ProblemInstance s5 = testsup::scalar_example();
  const FeasibilityLadder ladder = lambda_ladder(s5);
  CHECK(optimal_value(Eigen::VectorXd::Zero(1), s5) ==
        doctest::Approx(ladder.lambda(1) / 2.0).epsilon(1e-12));

  Eigen::VectorXd x(1);
  x << 0.5;
  const MultiplierSolution sol = solve_multiplier(x, s5.alpha, 0, s5, ladder);
  CHECK(optimal_value(x, s5) == sol.value);
}

}  // TEST_SUITE
