#include "sidar/check.hpp"

#include <algorithm>
#include <cmath>

#include "sidar/feasibility.hpp"
#include "sidar/multiplier.hpp"
#include "sidar/numerics.hpp"
#include "sidar/oracle.hpp"
#include "sidar/regions.hpp"
#include "sidar/riccati.hpp"

namespace sidar {

namespace {

Eigen::MatrixXd gaussian(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) M(i, j) = normal(rng);
  }
  return M;
}

double spectral_radius(const Eigen::MatrixXd& A) {
  return A.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd random_psd(std::mt19937_64& rng, int n, double shift) {
  const Eigen::MatrixXd L = gaussian(rng, n, n);
  return symmetrize(L.transpose() * L / n +
                    shift * Eigen::MatrixXd::Identity(n, n));
}

Eigen::MatrixXd lqr_step(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A,
                         const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                         const Eigen::MatrixXd& R) {
  const Eigen::MatrixXd BPA = B.transpose() * P * A;
  return symmetrize(Q + A.transpose() * P * A -
                    BPA.transpose() *
                        (B.transpose() * P * B + R).ldlt().solve(BPA));
}

// The sweep is nonincreasing in k only when the terminal step is monotone;
// the LQR step lower-bounds every finite-lambda step, so LQR-step(Pf) >= Pf
// is sufficient for the whole ladder of lambdas. Scales Pf down until it
// holds.
Eigen::MatrixXd tame_terminal_weight(Eigen::MatrixXd Pf,
                                     const Eigen::MatrixXd& A,
                                     const Eigen::MatrixXd& B,
                                     const Eigen::MatrixXd& Q,
                                     const Eigen::MatrixXd& R) {
  for (int iter = 0; iter < 80; ++iter) {
    const Eigen::MatrixXd step = lqr_step(Pf, A, B, Q, R);
    if (min_eigenvalue(step - Pf) >= -1e-12 * (1.0 + sym_norm(step))) {
      return Pf;
    }
    Pf *= 0.5;
  }
  return Eigen::MatrixXd::Zero(Pf.rows(), Pf.cols());
}

}  // namespace

ProblemInstance random_instance(std::mt19937_64& rng,
                                const InstanceGenOptions& opts) {
  std::uniform_int_distribution<int> pick_n(1, opts.n_max);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const int n = pick_n(rng);
  const int m = std::uniform_int_distribution<int>(1, std::min(opts.m_max, n))(rng);
  const int q = std::uniform_int_distribution<int>(1, opts.q_max)(rng);
  const int N = std::uniform_int_distribution<int>(opts.N_min, opts.N_max)(rng);

  Eigen::MatrixXd A;
  do {
    A = gaussian(rng, n, n);
  } while (spectral_radius(A) < 1e-6);
  A *= (0.3 + 0.9 * unif(rng)) / spectral_radius(A);

  Eigen::MatrixXd B, G;
  do {
    B = gaussian(rng, n, m);
  } while (condition_2norm(B) > 1e6);
  do {
    G = B * gaussian(rng, m, q);
  } while (G.norm() < 1e-6);

  const Eigen::MatrixXd Q = random_psd(rng, n, 0.05 + 0.45 * unif(rng));
  const Eigen::MatrixXd R = random_psd(rng, m, 0.2 + 0.8 * unif(rng));
  const Eigen::MatrixXd Pf = tame_terminal_weight(
      random_psd(rng, n, 0.05 + 0.45 * unif(rng)), A, B, Q, R);
  const double alpha = 0.25 + 3.75 * unif(rng);

  return ProblemInstance(A, B, G, Q, R, Pf, N, alpha);
}

namespace {

void update(SuiteResult& s, double violation, const std::string& detail) {
  if (violation > s.residual) {
    s.residual = violation;
    s.detail = detail;
  }
  if (violation > 0.0) s.passed = false;
}

SuiteResult suite_oracle_equivalence(const ProblemInstance& inst,
                                     std::mt19937_64& rng) {
  SuiteResult s{"oracle-equivalence", true, false, 0.0, ""};
  if (inst.N * (inst.m() + inst.q()) > 64) {
    s.skipped = true;
    s.detail = "stacked size cap exceeded";
    return s;
  }
  const FeasibilityLadder ladder = lambda_ladder(inst);
  const double lam1 = ladder.lambda(1);
  const Eigen::VectorXd x0 = gaussian(rng, inst.n(), 1);
  for (const double off : {0.0, 0.1, 0.5, 1.0, 3.0}) {
    const double lam = lam1 + off;
    const double lhs = value_L(x0, inst.alpha, 0, lam, inst);
    const double rhs = stacked_value(lam, x0, inst);
    update(s, std::abs(lhs - rhs) - 1e-9 * (1.0 + std::abs(lhs)),
           "value mismatch " + format_full(std::abs(lhs - rhs)) +
               " at lambda=" + format_full(lam));

    const Eigen::VectorXd zr = stationary_disturbance(x0, 0, lam, inst);
    const Eigen::VectorXd zs = stacked_stationary(lam, x0, inst).z;
    update(s, (zr - zs).norm() - 1e-9 * (1.0 + zs.norm()),
           "stationary mismatch " + format_full((zr - zs).norm()) +
               " at lambda=" + format_full(lam));
  }
  return s;
}

SuiteResult suite_derivative_fd(const ProblemInstance& inst,
                                std::mt19937_64& rng) {
  SuiteResult s{"derivative-fd", true, false, 0.0, ""};
  const FeasibilityLadder ladder = lambda_ladder(inst);
  const double lam1 = ladder.lambda(1);
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd x = gaussian(rng, inst.n(), 1);
    const double lam = lam1 + unif(rng);
    const double h = 1e-6 * (1.0 + lam);
    const double analytic = dL_dlambda(x, inst.alpha, 0, lam, inst);
    const double fd = (value_L(x, inst.alpha, 0, lam + h, inst) -
                       value_L(x, inst.alpha, 0, lam - h, inst)) /
                      (2.0 * h);
    update(s, std::abs(analytic - fd) - 1e-5 * (1.0 + std::abs(analytic)),
           "dL/dlambda " + format_full(analytic) + " vs FD " + format_full(fd));
  }
  return s;
}

SuiteResult suite_monotonicity(const ProblemInstance& inst,
                               std::mt19937_64& rng) {
  SuiteResult s{"monotonicity", true, false, 0.0, ""};
  const FeasibilityLadder ladder = lambda_ladder(inst);
  const double lam1 = std::max(ladder.lambda(1), kLambdaFloor);
  std::uniform_real_distribution<double> unif(0.0, 5.0);
  std::vector<double> lams = {lam1};
  for (int i = 0; i < 9; ++i) lams.push_back(lam1 + unif(rng));
  std::sort(lams.begin(), lams.end());

  std::vector<RiccatiSweep> sweeps;
  sweeps.reserve(lams.size());
  for (double lam : lams) sweeps.push_back(backward_sweep(lam, inst));

  for (size_t i = 0; i + 1 < sweeps.size(); ++i) {
    for (int k = 0; k <= inst.N; ++k) {
      const double scale = 1.0 + sym_norm(sweeps[i].Pis[k]);
      const double me =
          min_eigenvalue(sweeps[i].Pis[k] - sweeps[i + 1].Pis[k]);
      update(s, -me - 1e-10 * scale,
             "Pi_" + std::to_string(k) + " not nonincreasing in lambda");
    }
  }
  for (const auto& sw : sweeps) {
    for (int k = 0; k < inst.N; ++k) {
      const double scale = 1.0 + sym_norm(sw.Pis[k]);
      update(s, -min_eigenvalue(sw.Pis[k] - sw.Pis[k + 1]) - 1e-10 * scale,
             "Pi_" + std::to_string(k) + " not nonincreasing in k");
    }
    for (int k = 0; k <= inst.N; ++k) {
      update(s, -min_eigenvalue(sw.Pis[k] - inst.Pf) - 1e-10,
             "Pi_" + std::to_string(k) + " below Pf");
    }
  }
  return s;
}

SuiteResult suite_form_equivalence(const ProblemInstance& inst,
                                   std::mt19937_64& rng) {
  SuiteResult s{"form-equivalence", true, false, 0.0, ""};
  const ValidationReport rep = validate_instance(inst);
  const FeasibilityLadder ladder = lambda_ladder(inst);
  std::uniform_real_distribution<double> unif(0.1, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd Pi = random_psd(rng, inst.n(), 0.01);
    const double bound = sym_norm(inst.G.transpose() * Pi * inst.G);
    const double lam =
        std::max(bound, ladder.lambda(1)) * (1.0 + unif(rng)) + 0.1;
    const Eigen::MatrixXd direct = riccati_step(Pi, lam, inst);
    const Eigen::MatrixXd closed = riccati_step_closed_loop(Pi, lam, inst);
    const double scale = 1.0 + direct.norm();
    update(s, (direct - closed).norm() - 1e-10 * scale,
           "closed-loop form deviates by " + format_full((direct - closed).norm()));
    if (rep.a4_state_pd && rep.a4_terminal_pd) {
      const Eigen::MatrixXd bb = riccati_step_bb(Pi, lam, inst);
      update(s, (direct - bb).norm() - 1e-9 * scale,
             "Basar-Bernhard form deviates by " + format_full((direct - bb).norm()));
    }
  }
  return s;
}

SuiteResult suite_region_agreement(const ProblemInstance& inst,
                                   std::mt19937_64& rng) {
  SuiteResult s{"region-agreement", true, false, 0.0, ""};
  const FeasibilityLadder ladder = lambda_ladder(inst);
  const double budget = inst.alpha;
  const RegionEllipsoid ell = region_quadratic(0, budget, inst, ladder);
  const bool degenerate = sym_norm(ell.E) < 1e-12;

  std::uniform_real_distribution<double> scale_unif(0.1, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd x = gaussian(rng, inst.n(), 1);
    if (!degenerate) {
      const double e = x.dot(ell.E * x);
      if (e > 1e-12) x *= std::sqrt(budget / e) * scale_unif(rng);
    }
    const double e = x.dot(ell.E * x);
    const bool geo_linear = ell.contains(x);
    const MultiplierSolution sol = solve_multiplier(x, budget, 0, inst, ladder);
    if (geo_linear != sol.at_lower_bound &&
        std::abs(e - budget) > 1e-6 * (1.0 + budget)) {
      update(s, std::abs(e - budget),
             "classification mismatch away from the boundary band");
    }
  }

  if (!degenerate) {
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::VectorXd x = gaussian(rng, inst.n(), 1);
      const double e = x.dot(ell.E * x);
      if (e < 1e-12) continue;
      x *= std::sqrt(budget / e);  // on the ellipsoid surface
      const Eigen::VectorXd z =
          stationary_disturbance(x, 0, std::max(ell.lambda_lower, kLambdaFloor),
                                 inst);
      update(s, std::abs(z.squaredNorm() - budget) - 1e-8 * (1.0 + budget),
             "surface |z|^2 deviates from budget by " +
                 format_full(std::abs(z.squaredNorm() - budget)));
    }
  }
  return s;
}

}  // namespace

CheckReport run_check_suite(const ProblemInstance& inst, std::uint64_t seed) {
  CheckReport report;
  const ValidationReport rep = validate_instance(inst);
  if (!rep.a2_range_inclusion) {
    report.skipped_a2 = true;
    return report;
  }
  std::mt19937_64 rng(seed);
  report.suites.push_back(suite_oracle_equivalence(inst, rng));
  report.suites.push_back(suite_derivative_fd(inst, rng));
  report.suites.push_back(suite_monotonicity(inst, rng));
  report.suites.push_back(suite_form_equivalence(inst, rng));
  report.suites.push_back(suite_region_agreement(inst, rng));
  return report;
}

}  // namespace sidar
