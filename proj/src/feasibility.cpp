#include "sidar/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sidar/numerics.hpp"
#include "sidar/riccati.hpp"

namespace sidar {

double m_value(double lambda, int k, const ProblemInstance& inst) {
  if (k < 0 || k > inst.N - 1) {
    throw std::invalid_argument("m_value: stage index out of range");
  }
  const TailSweep sweep =
      tail_sweep(std::max(lambda, kLambdaFloor), inst, k + 1);
  return sym_norm(inst.G.transpose() * sweep.Pi(k + 1) * inst.G);
}

FeasibilityLadder lambda_ladder(const ProblemInstance& inst) {
  FeasibilityLadder ladder;
  ladder.lambdas.resize(inst.N);
  ladder.residuals.assign(inst.N, 0.0);

  // lambda_N = |G'Pf G|, stored first.
  ladder.lambdas[0] = sym_norm(inst.G.transpose() * inst.Pf * inst.G);

  // Rung lambda_k is the admissibility bound for stage k-1, driven by
  // m_k(lambda) = |G'Pi_k(lambda)G| = m_value(lambda, k-1).
  for (int k = inst.N - 1; k >= 1; --k) {
    const double prev = ladder.lambdas[inst.N - 1 - k];  // lambda_{k+1}
    const double m_at_prev = m_value(prev, k - 1, inst);
    double lam = prev;
    if (m_at_prev > prev) {
      const auto gap = [&](double l) { return l - m_value(l, k - 1, inst); };
      const double hi = expand_bracket(gap, prev, "lambda_ladder");
      lam = bisect_increasing(gap, prev, hi, 1e-12);
      ladder.residuals[inst.N - k] = std::abs(lam - m_value(lam, k - 1, inst));
    }
    ladder.lambdas[inst.N - k] = lam;
  }
  return ladder;
}

}  // namespace sidar
