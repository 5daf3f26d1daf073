#include <doctest.h>

#include <cmath>
#include <random>

#include "sidar/check.hpp"
#include "sidar/errors.hpp"
#include "sidar/feasibility.hpp"
#include "sidar/numerics.hpp"
#include "sidar/oracle.hpp"
#include "sidar/riccati.hpp"
#include "test_support.hpp"

using namespace sidar;
using testsup::scalar;

TEST_SUITE("riccati") {

TEST_CASE("block matrix: scalar examples") {
  const ProblemInstance ones = testsup::all_ones(1);
  Eigen::MatrixXd M = block_matrix(scalar(0.0), 1.0, ones);
  CHECK(M(0, 0) == 1.0);
  CHECK(M(0, 1) == 0.0);
  CHECK(M(1, 1) == -1.0);

  M = block_matrix(scalar(1.0), 2.0, ones);
  CHECK(M(0, 0) == 2.0);
  CHECK(M(0, 1) == 1.0);
  CHECK(M(1, 0) == 1.0);
  CHECK(M(1, 1) == -1.0);

  // Worked example at the last stage: Pi_N = 0 gives diag(R, -lambda).
  const ProblemInstance s5 = testsup::scalar_example();
  M = block_matrix(scalar(0.0), 0.7, s5);
  CHECK(M(0, 0) == 1.0);
  CHECK(M(0, 1) == 0.0);
  CHECK(M(1, 1) == -0.7);
}

TEST_CASE("riccati step: zero terminal weight returns Q") {
  const ProblemInstance s5 = testsup::scalar_example();
  const Eigen::MatrixXd Pi = riccati_step(scalar(0.0), 2.0, s5);
  CHECK(Pi(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("riccati step: scalar 5/3 cross-checked against the stacked path") {
  const ProblemInstance ones = testsup::all_ones(1);
  const Eigen::MatrixXd Pi = riccati_step(scalar(1.0), 2.0, ones);
  CHECK(Pi(0, 0) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));

  // Independent route: with N = 1 and Pf = 1, the stacked value at x0 is
  // (1/2a) x0' Psi x0 + lambda/2 with Psi the same one-step matrix.
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  const double sv = stacked_value(2.0, x0, ones);
  const double expected = 0.5 * (5.0 / 3.0) + 1.0;
  CHECK(sv == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("riccati step: large lambda kills the disturbance channel") {
  const ProblemInstance ones = testsup::all_ones(1);
  const Eigen::MatrixXd Pi = riccati_step(scalar(1.0), 1e6, ones);
  // LQR step oracle: Q + A^2 Pi - (A Pi B)^2 / (B^2 Pi + R) = 1.5
  CHECK(Pi(0, 0) == doctest::Approx(1.5).epsilon(1e-5));
}

TEST_CASE("gains: trivial and hand-solved scalar cases") {
  const ProblemInstance ones = testsup::all_ones(1);
  StageGains g = gains(scalar(0.0), 1.0, ones);
  CHECK(g.K(0, 0) == 0.0);
  CHECK(g.J(0, 0) == 0.0);
  CHECK(g.F(0, 0) == 1.0);

  // M = [[2,1],[1,-1]], d = [1;1]: K = -2/3, J = 1/3, F = 2/3.
  g = gains(scalar(1.0), 2.0, ones);
  CHECK(g.K(0, 0) == doctest::Approx(-2.0 / 3.0).epsilon(1e-13));
  CHECK(g.J(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(g.F(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("gains: lambda -> infinity recovers the LQR gain") {
  const ProblemInstance ones = testsup::all_ones(1);
  const StageGains g = gains(scalar(1.0), 1e8, ones);
  CHECK(std::abs(g.J(0, 0)) <= 1e-6);
  CHECK(g.K(0, 0) == doctest::Approx(-0.5).epsilon(1e-6));
}

TEST_CASE("backward sweep: N=1 equals one step; worked-example start") {
  const ProblemInstance ones = testsup::all_ones(1);
  const RiccatiSweep sweep = backward_sweep(2.0, ones);
  CHECK(sweep.Pis[1](0, 0) == 1.0);
  CHECK(sweep.Pis[0](0, 0) ==
        doctest::Approx(riccati_step(scalar(1.0), 2.0, ones)(0, 0)));

  const ProblemInstance s5 = testsup::scalar_example();
  const RiccatiSweep s = backward_sweep(2.0, s5);
  CHECK(s.Pis[10](0, 0) == 0.0);
  CHECK(s.Pis[9](0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(s.Phis[0](0, 0) == 1.0);
}

TEST_CASE("backward sweep: Jtilde rows replay the closed loop") {
  std::mt19937_64 rng(23);
  ProblemInstance inst = random_instance(rng);
  while (inst.n() != 2 || inst.N < 3) inst = random_instance(rng);
  const double lam = lambda_ladder(inst).lambda(1) + 0.7;
  const RiccatiSweep sweep = backward_sweep(lam, inst);
  const Eigen::VectorXd x0 = testsup::random_vec(rng, 2);

  Eigen::VectorXd x = x0;
  for (int k = 0; k < inst.N; ++k) {
    const Eigen::VectorXd z_direct = sweep.stages[k].J * x;
    const Eigen::VectorXd z_stacked =
        sweep.Jtilde.middleRows(k * inst.q(), inst.q()) * x0;
    CHECK((z_direct - z_stacked).norm() <=
          1e-10 * (1.0 + z_stacked.norm()));
    x = sweep.stages[k].F * x;
  }
}

TEST_CASE("closed-loop and Basar-Bernhard forms agree with the direct step") {
  const ProblemInstance ones = testsup::all_ones(1);
  CHECK(riccati_step_closed_loop(scalar(0.0), 2.0, ones)(0, 0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(riccati_step_closed_loop(scalar(1.0), 2.0, ones)(0, 0) ==
        doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(riccati_step_bb(scalar(0.0), 2.0, ones)(0, 0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(riccati_step_bb(scalar(1.0), 2.0, ones)(0, 0) ==
        doctest::Approx(5.0 / 3.0).epsilon(1e-12));

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const ProblemInstance inst = random_instance(rng);
    const Eigen::MatrixXd L =
        Eigen::MatrixXd::NullaryExpr(inst.n(), inst.n(), [&](Eigen::Index,
                                                             Eigen::Index) {
          return testsup::random_vec(rng, 1)(0);
        });
    const Eigen::MatrixXd Pi =
        symmetrize(L.transpose() * L +
                   0.01 * Eigen::MatrixXd::Identity(inst.n(), inst.n()));
    const double lam =
        2.0 * std::max(sym_norm(inst.G.transpose() * Pi * inst.G),
                       lambda_ladder(inst).lambda(1)) + 0.2;
    const Eigen::MatrixXd direct = riccati_step(Pi, lam, inst);
    const Eigen::MatrixXd closed = riccati_step_closed_loop(Pi, lam, inst);
    const double scale = 1.0 + direct.norm();
    CHECK((direct - closed).norm() <= 1e-10 * scale);
    const ValidationReport rep = validate_instance(inst);
    if (rep.a4_state_pd && rep.a4_terminal_pd) {
      const Eigen::MatrixXd bb = riccati_step_bb(Pi, lam, inst);
      CHECK((direct - bb).norm() <= 1e-9 * scale);
    }
  }
}

TEST_CASE("condition diagnostics") {
  Eigen::MatrixXd M(2, 2);
  M << 1, 0, 0, -1;
  CHECK(check_invertibility(M).condition == doctest::Approx(1.0));
  CHECK_FALSE(check_invertibility(M).singular);

  M << 2, 1, 1, -1;
  CHECK_FALSE(check_invertibility(M).singular);

  M << 1, 1, 1, 1;
  CHECK(check_invertibility(M).singular);
}

TEST_CASE("singular block carries the failing stage index") {
  // Pf = 0 makes M_{N-1}(0) = diag(R, 0) singular at lambda = 0 exactly.
  const ProblemInstance s5 = testsup::scalar_example();
  try {
    tail_sweep(0.0, s5, 0);
    FAIL("expected SingularBlock");
  } catch (const SingularBlock& e) {
    CHECK(e.stage() == 9);
    CHECK(e.condition() >= kSingularCondition);
  }
}

TEST_CASE("sweep matrices are exactly symmetric and bounded below by Pf") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const ProblemInstance inst = random_instance(rng);
    const double lam1 = lambda_ladder(inst).lambda(1);
    const RiccatiSweep sweep =
        backward_sweep(std::max(lam1, kLambdaFloor) + 0.3, inst);
    for (int k = 0; k <= inst.N; ++k) {
      const Eigen::MatrixXd& Pi = sweep.Pis[k];
      CHECK((Pi - Pi.transpose()).norm() == 0.0);
      CHECK(min_eigenvalue(Pi - inst.Pf) >= -1e-10 * (1.0 + sym_norm(Pi)));
      CHECK(min_eigenvalue(Pi) >= -1e-10 * (1.0 + sym_norm(Pi)));
    }
    for (int k = 0; k < inst.N; ++k) {
      const StageData& st = sweep.stages[k];
      CHECK((st.M - st.M.transpose()).norm() == 0.0);
      CHECK((st.F - (inst.A + inst.B * st.K + inst.G * st.J)).norm() == 0.0);
    }
  }
}

TEST_CASE("monotonicity in lambda and in stage index") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 8; ++trial) {
    const ProblemInstance inst = random_instance(rng);
    const double lam1 = std::max(lambda_ladder(inst).lambda(1), kLambdaFloor);
    const RiccatiSweep lo = backward_sweep(lam1, inst);
    const RiccatiSweep mid = backward_sweep(lam1 + 1.0, inst);
    const RiccatiSweep hi = backward_sweep(lam1 + 5.0, inst);
    for (int k = 0; k <= inst.N; ++k) {
      const double scale = 1.0 + sym_norm(lo.Pis[k]);
      CHECK(min_eigenvalue(lo.Pis[k] - mid.Pis[k]) >= -1e-10 * scale);
      CHECK(min_eigenvalue(mid.Pis[k] - hi.Pis[k]) >= -1e-10 * scale);
    }
    for (int k = 0; k < inst.N; ++k) {
      const double scale = 1.0 + sym_norm(mid.Pis[k]);
      CHECK(min_eigenvalue(mid.Pis[k] - mid.Pis[k + 1]) >= -1e-10 * scale);
    }
  }
}

}  // TEST_SUITE
