#pragma once

#include <vector>

#include "sidar/model.hpp"

namespace sidar {

/// Stagewise feasibility lower bounds lambda_N .. lambda_1, built backward
/// by the monotone fixed-point construction. lambda_k >= lambda_{k+1} holds
/// exactly as computed.
struct FeasibilityLadder {
  std::vector<double> lambdas;    // lambdas[i] = lambda_{N-i}, i = 0..N-1
  std::vector<double> residuals;  // |lambda_k - m(lambda_k)| on fixed-point rungs, else 0

  /// Ladder value lambda_k for k in [1, N].
  double lambda(int k) const { return lambdas.at(lambdas.size() - k); }
  double residual(int k) const { return residuals.at(residuals.size() - k); }

  /// Lower bound of the stage-k multiplier optimization, lambda_{k+1}.
  double lower_bound(int stage) const { return lambda(stage + 1); }
};

/// m(lambda) at stage k: the largest eigenvalue of G'Pi_{k+1}(lambda)G,
/// evaluated with a fresh partial sweep from stage N down to k+1.
/// Continuous and nonincreasing in lambda on the valid domain. Evaluation
/// applies the 1e-12 floor so Pf = 0 chains stay well posed.
double m_value(double lambda, int k, const ProblemInstance& inst);

/// Builds the full ladder: lambda_N = |G'Pf G|; each earlier rung either
/// reuses the previous value (blue case) or bisects the strictly increasing
/// n(lambda) = lambda - m(lambda) to its unique root (orange case).
FeasibilityLadder lambda_ladder(const ProblemInstance& inst);

}  // namespace sidar
