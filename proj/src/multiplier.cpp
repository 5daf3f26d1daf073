#include "sidar/multiplier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sidar/numerics.hpp"
#include "sidar/riccati.hpp"

namespace sidar {

namespace {

void check_stage(const Eigen::VectorXd& x, int k, const ProblemInstance& inst) {
  if (k < 0 || k > inst.N - 1) {
    throw std::invalid_argument("stage index out of range");
  }
  if (x.size() != inst.n()) {
    throw std::invalid_argument("state dimension mismatch");
  }
}

double floored(double lambda) { return std::max(lambda, kLambdaFloor); }

}  // namespace

double value_L(const Eigen::VectorXd& x, double budget, int k, double lambda,
               const ProblemInstance& inst) {
  check_stage(x, k, inst);
  const TailSweep sweep = tail_sweep(floored(lambda), inst, k);
  const Eigen::VectorXd xs = x / std::sqrt(inst.alpha);
  return 0.5 * xs.dot(sweep.Pi(k) * xs) +
         budget * lambda / (2.0 * inst.alpha);
}

Eigen::VectorXd stationary_disturbance(const Eigen::VectorXd& x, int k,
                                       double lambda,
                                       const ProblemInstance& inst) {
  check_stage(x, k, inst);
  const TailSweep sweep = tail_sweep(floored(lambda), inst, k);
  const int q = inst.q();
  Eigen::VectorXd z((inst.N - k) * q);
  Eigen::VectorXd xj = x;
  for (int j = k; j < inst.N; ++j) {
    z.segment((j - k) * q, q) = sweep.stage(j).J * xj;
    xj = sweep.stage(j).F * xj;
  }
  return z;
}

double dL_dlambda(const Eigen::VectorXd& x, double budget, int k,
                  double lambda, const ProblemInstance& inst) {
  const Eigen::VectorXd z = stationary_disturbance(x, k, lambda, inst);
  return (budget - z.squaredNorm()) / (2.0 * inst.alpha);
}

MultiplierSolution solve_multiplier(const Eigen::VectorXd& x, double budget,
                                    int k, const ProblemInstance& inst) {
  return solve_multiplier(x, budget, k, inst, lambda_ladder(inst));
}

MultiplierSolution solve_multiplier(const Eigen::VectorXd& x, double budget,
                                    int k, const ProblemInstance& inst,
                                    const FeasibilityLadder& ladder) {
  check_stage(x, k, inst);
  if (budget < 0.0) {
    throw std::invalid_argument("solve_multiplier: negative budget");
  }
  const double lower = ladder.lower_bound(k);

  MultiplierSolution sol;
  sol.derivative_at_lower = dL_dlambda(x, budget, k, lower, inst);

  if (budget <= 0.0) {
    // Exhausted budget: the linear term vanishes and lambda* -> inf; the
    // policy limit is realized at a large finite multiplier.
    sol.lambda_star = 1e9 * (1.0 + lower);
    sol.at_lower_bound = false;
    sol.budget_exhausted = true;
  } else if (sol.derivative_at_lower >= -1e-9) {
    sol.lambda_star = lower;
    sol.at_lower_bound = true;
  } else {
    const auto deriv = [&](double lam) {
      return dL_dlambda(x, budget, k, lam, inst);
    };
    const double hi = expand_bracket(deriv, lower, "solve_multiplier");
    sol.lambda_star = bisect_increasing(deriv, lower, hi, 1e-11);
    sol.at_lower_bound = false;
  }

  sol.z_star = stationary_disturbance(x, k, sol.lambda_star, inst);
  sol.z_norm_sq = sol.z_star.squaredNorm();
  sol.value = value_L(x, budget, k, sol.lambda_star, inst);
  return sol;
}

double optimal_value(const Eigen::VectorXd& x, const ProblemInstance& inst) {
  return solve_multiplier(x, inst.alpha, 0, inst).value;
}

}  // namespace sidar
