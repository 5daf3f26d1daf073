#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace sidar {

// Shared numerical thresholds.
inline constexpr double kSingularCondition = 1e14;  // block-matrix condition gate
inline constexpr double kLambdaFloor = 1e-12;       // evaluation floor when a ladder value is 0
inline constexpr double kBracketCap = 1e12;         // root-find bracket expansion limit

/// (M + M')/2. The result is exactly symmetric in floating point.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M);

/// Induced 2-norm of a symmetric matrix: max |eigenvalue| of (M + M')/2.
double sym_norm(const Eigen::MatrixXd& M);

/// Smallest eigenvalue of (M + M')/2.
double min_eigenvalue(const Eigen::MatrixXd& M);

/// 2-norm condition number from the SVD; +inf when the smallest singular
/// value is zero.
double condition_2norm(const Eigen::MatrixXd& M);

/// Principal symmetric square root of a PSD matrix (negative eigenvalues
/// from roundoff are clamped to zero).
Eigen::MatrixXd principal_sqrt(const Eigen::MatrixXd& M);

/// Moore-Penrose pseudoinverse of a symmetric matrix via eigendecomposition,
/// zeroing eigenvalues with |e| <= rel_tol * max|e|.
Eigen::MatrixXd pseudo_inverse_sym(const Eigen::MatrixXd& M, double rel_tol);

/// Root of a continuous nondecreasing function with f(lo) < 0 <= f(hi) by
/// bisection. Stops when the interval width is below tol_scale*(1+|mid|)
/// and returns the midpoint.
double bisect_increasing(const std::function<double(double)>& f, double lo,
                         double hi, double tol_scale);

/// Expands hi upward from lo+1 by doubling until f(hi) > 0. Throws
/// BracketFailure once hi exceeds kBracketCap.
double expand_bracket(const std::function<double(double)>& f, double lo,
                      const std::string& context);

/// Shortest decimal that round-trips a double (17 significant digits).
std::string format_full(double v);

}  // namespace sidar
