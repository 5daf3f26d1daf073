#pragma once

#include <Eigen/Dense>

#include "sidar/model.hpp"

namespace sidar {

/// Horizon-lifted one-shot problem: x = cal_A x0 + cal_B u + cal_G w with
/// block-diagonal weights. Serves as the independent verification path for
/// the recursive solution.
struct StackedProblem {
  Eigen::MatrixXd cal_A;  // (N n) x n, block row i is A^{i+1}
  Eigen::MatrixXd cal_B;  // (N n) x (N m), block (i,j) = A^{i-j} B for i >= j
  Eigen::MatrixXd cal_G;  // (N n) x (N q), same pattern with G
  Eigen::MatrixXd cal_Q;  // blkdiag(Q, ..., Q, Pf)
  Eigen::MatrixXd cal_R;  // blkdiag(R, ..., R)
};

StackedProblem build_stacked(const ProblemInstance& inst);

/// Stacked multiplier matrix
/// [[cal_B' cal_Q cal_B + cal_R, cal_B' cal_Q cal_G],
///  [*, cal_G' cal_Q cal_G - lambda I]].
/// Satisfies M(lambda) = M(0) - lambda diag(0, I) entrywise.
Eigen::MatrixXd stacked_multiplier_matrix(const StackedProblem& sp,
                                          double lambda);

/// One-shot value (1/(2 alpha)) x0' Psi(lambda) x0 + lambda/2 with
/// Psi = Q + cal_A'cal_Q cal_A - cal_A'cal_Q [B G] M(lambda)^-1 [B';G'] cal_Q cal_A.
/// Sizes are capped at N (m+q) <= 64; this is a verification path.
double stacked_value(double lambda, const Eigen::VectorXd& x0,
                     const ProblemInstance& inst);

struct StackedStationary {
  Eigen::VectorXd u;  // length N m
  Eigen::VectorXd z;  // length N q
};

/// Solves M(lambda) [u; z] = -[cal_B'; cal_G'] cal_Q cal_A x0.
StackedStationary stacked_stationary(double lambda, const Eigen::VectorXd& x0,
                                     const ProblemInstance& inst);

struct GridRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct GridGameResult {
  double value = 0.0;
  bool u0_on_boundary = false;  // grid-coverage check on the minimizing u0
};

/// Brute-force nested min-max over the discretized sequential game, scalar
/// systems (n = m = q = 1) with N <= 3. The remaining budget is tracked
/// through the recursion: mid-stage disturbance grids are clipped to
/// |w|^2 <= b, and the last stage is restricted to moves that exhaust the
/// budget within one grid step (the all-zero disturbance path is excluded).
/// The objective is the realized ratio V / sum |w_k|^2.
GridGameResult grid_game_solve(double x0, const ProblemInstance& inst,
                               GridRange u_range, GridRange w_range,
                               double step);

double grid_game_value(double x0, const ProblemInstance& inst,
                       GridRange u_range, GridRange w_range, double step);

}  // namespace sidar
