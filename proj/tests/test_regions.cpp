#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sidar/check.hpp"
#include "sidar/multiplier.hpp"
#include "sidar/numerics.hpp"
#include "sidar/policy.hpp"
#include "sidar/regions.hpp"
#include "test_support.hpp"

using namespace sidar;
using testsup::scalar;

TEST_SUITE("regions") {

TEST_CASE("zero terminal weight with a single stage makes everything linear") {
  const ProblemInstance inst(scalar(0.5), scalar(1.0), scalar(1.0),
                             scalar(0.25), scalar(1.0), scalar(0.0), 1, 1.0);
  const RegionEllipsoid ell = region_quadratic(0, 1.0, inst);
  CHECK(ell.E(0, 0) == 0.0);
  Eigen::VectorXd x(1);
  x << 1e6;
  CHECK(classify(x, 1.0, 0, inst) == RegionFlag::Linear);
  CHECK(linear_gain(0, inst)(0, 0) == 0.0);  // K = 0 since Pi_1 = Pf = 0
}

TEST_CASE("gram construction is exactly symmetric PSD") {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 8; ++trial) {
    const ProblemInstance inst = random_instance(rng);
    const RegionEllipsoid ell = region_quadratic(0, inst.alpha, inst);
    CHECK((ell.E - ell.E.transpose()).norm() == 0.0);
    CHECK(min_eigenvalue(ell.E) >= -1e-10 * (1.0 + sym_norm(ell.E)));
  }
}

TEST_CASE("origin is linear; homogeneity of the membership test") {
  const ProblemInstance s5 = testsup::scalar_example();
  const FeasibilityLadder ladder = lambda_ladder(s5);
  CHECK(classify(Eigen::VectorXd::Zero(1), 0.42, 0, s5, ladder) ==
        RegionFlag::Linear);

  const RegionEllipsoid ell = region_quadratic(0, 1.0, s5, ladder);
  std::mt19937_64 rng(101);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd x = testsup::random_vec(rng, 1);
    const double c = 0.1 + 3.0 * std::abs(testsup::random_vec(rng, 1)(0));
    const double b = 0.5;
    const bool lhs = x.dot(ell.E * x) <= b * (1.0 + 1e-9);
    const Eigen::VectorXd cx = c * x;
    const bool rhs = cx.dot(ell.E * cx) <= c * c * b * (1.0 + 1e-9);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("nonlinear states drive the multiplier strictly above the bound") {
  const ProblemInstance s5 = testsup::scalar_example();
  const FeasibilityLadder ladder = lambda_ladder(s5);
  const RegionEllipsoid ell = region_quadratic(0, s5.alpha, s5, ladder);
  std::mt19937_64 rng(103);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x = testsup::random_vec(rng, 1);
    x *= std::sqrt(2.0 * s5.alpha / x.dot(ell.E * x));  // x'Ex = 2 budget
    CHECK(classify(x, s5.alpha, 0, s5, ladder) == RegionFlag::Nonlinear);
    const MultiplierSolution sol =
        solve_multiplier(x, s5.alpha, 0, s5, ladder);
    CHECK_FALSE(sol.at_lower_bound);
    CHECK(sol.lambda_star > ladder.lambda(1));
  }
}

TEST_CASE("linear gain matches the online policy inside the region") {
  const ProblemInstance s5 = testsup::scalar_example();
  const FeasibilityLadder ladder = lambda_ladder(s5);
  const Eigen::MatrixXd K = linear_gain(0, s5, ladder);
  const RegionEllipsoid ell = region_quadratic(0, s5.alpha, s5, ladder);
  const double r = std::sqrt(s5.alpha / ell.E(0, 0));
  for (const double frac : {-0.9, -0.4, 0.2, 0.7}) {
    Eigen::VectorXd x(1);
    x << frac * r;
    const ControlDecision dec = control(x, s5.alpha, 0, s5, ladder);
    CHECK(std::abs(dec.u(0) - K(0, 0) * x(0)) <= 1e-12 * (1.0 + K.norm()));
  }
}

TEST_CASE("worked-example gain at the bound differs from the LQR gain") {
  const ProblemInstance s5 = testsup::scalar_example();
  const Eigen::MatrixXd K = linear_gain(0, s5);
  const testsup::LqrSolution lqr = testsup::lqr_recursion(s5);
  CHECK(std::abs(K(0, 0) - lqr.K[0](0, 0)) > 1e-3);
}

TEST_CASE("worked-example interval radius agrees with a solver-flag bisection") {
  const ProblemInstance s5 = testsup::scalar_example();
  const FeasibilityLadder ladder = lambda_ladder(s5);
  const RegionEllipsoid ell = region_quadratic(0, 1.0, s5, ladder);
  const double r = std::sqrt(1.0 / ell.E(0, 0));

  const auto in_linear = [&](double xv) {
    Eigen::VectorXd x(1);
    x << xv;
    return solve_multiplier(x, 1.0, 0, s5, ladder).at_lower_bound;
  };
  double lo = 0.0, hi = 4.0 * r;
  REQUIRE(in_linear(lo));
  REQUIRE_FALSE(in_linear(hi));
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (in_linear(mid) ? lo : hi) = mid;
  }
  CHECK(std::abs(0.5 * (lo + hi) - r) <= 1e-6 * (1.0 + r));
}

TEST_CASE("geometry and solver agree away from the boundary band") {
  std::mt19937_64 rng(107);
  const ProblemInstance inst = random_instance(rng);
  const FeasibilityLadder ladder = lambda_ladder(inst);
  const RegionEllipsoid ell = region_quadratic(0, inst.alpha, inst, ladder);
  if (sym_norm(ell.E) < 1e-12) return;  // degenerate: everything linear

  std::uniform_real_distribution<double> unif(0.2, 1.8);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd x = testsup::random_vec(rng, inst.n());
    const double e0 = x.dot(ell.E * x);
    if (e0 > 1e-12) x *= std::sqrt(inst.alpha / e0) * unif(rng);
    const double e = x.dot(ell.E * x);
    const bool geo = ell.contains(x);
    const bool solver =
        solve_multiplier(x, inst.alpha, 0, inst, ladder).at_lower_bound;
    if (geo != solver) {
      CHECK(std::abs(e - inst.alpha) <= 1e-6 * (1.0 + inst.alpha));
    }
  }
}

TEST_CASE("boundary certificate: surface states spend exactly the budget") {
  const ProblemInstance s5 = testsup::scalar_example();
  const FeasibilityLadder ladder = lambda_ladder(s5);
  const RegionEllipsoid ell = region_quadratic(0, s5.alpha, s5, ladder);
  std::mt19937_64 rng(109);
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd x = testsup::random_vec(rng, 1);
    x *= std::sqrt(s5.alpha / x.dot(ell.E * x));
    const double zsq =
        stationary_disturbance(x, 0, std::max(ell.lambda_lower, kLambdaFloor),
                               s5)
            .squaredNorm();
    CHECK(std::abs(zsq - s5.alpha) <= 1e-8 * (1.0 + s5.alpha));
  }
}

TEST_CASE("region nesting in the budget") {
  const ProblemInstance s5 = testsup::scalar_example();
  const FeasibilityLadder ladder = lambda_ladder(s5);
  std::mt19937_64 rng(113);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd x = 2.0 * testsup::random_vec(rng, 1);
    const bool small = classify(x, 0.4, 0, s5, ladder) == RegionFlag::Linear;
    const bool large = classify(x, 0.9, 0, s5, ladder) == RegionFlag::Linear;
    if (small) CHECK(large);
  }
}

TEST_CASE("region grid CSV schema") {
  std::vector<Eigen::VectorXd> states;
  std::vector<RegionFlag> flags;
  Eigen::VectorXd x(2);
  x << 0.25, -1.0;
  states.push_back(x);
  flags.push_back(RegionFlag::Linear);
  std::ostringstream out;
  write_region_grid_csv(out, states, flags);
  CHECK(out.str() == "x0,x1,in_XL\n0.25,-1,1\n");
}

}  // TEST_SUITE
