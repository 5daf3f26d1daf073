#pragma once

#include <Eigen/Dense>

#include "sidar/feasibility.hpp"
#include "sidar/model.hpp"

namespace sidar {

/// Solution of the scalar convex multiplier optimization at one state.
struct MultiplierSolution {
  double lambda_star = 0.0;
  bool at_lower_bound = false;        // region flag: true means X_L
  Eigen::VectorXd z_star;             // stationary disturbance, length (N-k) q
  double z_norm_sq = 0.0;
  double value = 0.0;                 // optimal cost of the stage-k problem
  double derivative_at_lower = 0.0;   // dL/dlambda at the ladder lower bound
  bool budget_exhausted = false;      // true on the b = 0 limit branch
};

/// Stage-k value function
///   L(lambda) = (1/2)(x/sqrt(alpha))' Pi_k(lambda) (x/sqrt(alpha))
///             + budget * lambda / (2 alpha)
/// which reduces to the initial-stage objective at k = 0, budget = alpha.
double value_L(const Eigen::VectorXd& x, double budget, int k, double lambda,
               const ProblemInstance& inst);

/// Lagrangian stationary disturbance of the tail problem, z = Jtilde_k(lambda) x,
/// stacked stage by stage under the closed-loop dynamics.
Eigen::VectorXd stationary_disturbance(const Eigen::VectorXd& x, int k,
                                       double lambda,
                                       const ProblemInstance& inst);

/// Exact derivative dL/dlambda = budget/(2 alpha) - |z(lambda)|^2/(2 alpha).
double dL_dlambda(const Eigen::VectorXd& x, double budget, int k,
                  double lambda, const ProblemInstance& inst);

/// Minimizes L over [lambda_{k+1}, inf): the lower bound wins when the
/// derivative there is nonnegative (within -1e-9), otherwise the
/// nondecreasing derivative is bisected to its root. budget = 0 returns the
/// lambda -> inf limit policy evaluated at 1e9 (1 + lower bound).
MultiplierSolution solve_multiplier(const Eigen::VectorXd& x, double budget,
                                    int k, const ProblemInstance& inst);
MultiplierSolution solve_multiplier(const Eigen::VectorXd& x, double budget,
                                    int k, const ProblemInstance& inst,
                                    const FeasibilityLadder& ladder);

/// V*(x0): solve at stage 0 with the full budget and evaluate
/// (1/2)(x0/sqrt(alpha))' Pi_0(lambda*) (x0/sqrt(alpha)) + lambda*/2.
double optimal_value(const Eigen::VectorXd& x, const ProblemInstance& inst);

}  // namespace sidar
