#include "sidar/regions.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "sidar/numerics.hpp"
#include "sidar/riccati.hpp"

namespace sidar {

RegionEllipsoid region_quadratic(int k, double budget,
                                 const ProblemInstance& inst) {
  return region_quadratic(k, budget, inst, lambda_ladder(inst));
}

RegionEllipsoid region_quadratic(int k, double budget,
                                 const ProblemInstance& inst,
                                 const FeasibilityLadder& ladder) {
  if (k < 0 || k > inst.N - 1) {
    throw std::invalid_argument("region_quadratic: stage index out of range");
  }
  RegionEllipsoid ell;
  ell.budget = budget;
  ell.stage = k;
  ell.lambda_lower = ladder.lower_bound(k);
  const TailSweep sweep =
      tail_sweep(std::max(ell.lambda_lower, kLambdaFloor), inst, k);
  const Eigen::MatrixXd Jt = tail_disturbance_matrix(sweep, k);
  ell.E = symmetrize(Jt.transpose() * Jt);
  return ell;
}

RegionFlag classify(const Eigen::VectorXd& x, double budget, int k,
                    const ProblemInstance& inst) {
  return classify(x, budget, k, inst, lambda_ladder(inst));
}

RegionFlag classify(const Eigen::VectorXd& x, double budget, int k,
                    const ProblemInstance& inst,
                    const FeasibilityLadder& ladder) {
  if (!(budget > 0.0)) {
    throw std::invalid_argument("classify: budget must be positive");
  }
  const RegionEllipsoid ell = region_quadratic(k, budget, inst, ladder);
  return ell.contains(x) ? RegionFlag::Linear : RegionFlag::Nonlinear;
}

Eigen::MatrixXd linear_gain(int k, const ProblemInstance& inst) {
  return linear_gain(k, inst, lambda_ladder(inst));
}

Eigen::MatrixXd linear_gain(int k, const ProblemInstance& inst,
                            const FeasibilityLadder& ladder) {
  if (k < 0 || k > inst.N - 1) {
    throw std::invalid_argument("linear_gain: stage index out of range");
  }
  const TailSweep sweep =
      tail_sweep(std::max(ladder.lower_bound(k), kLambdaFloor), inst, k);
  return sweep.stage(k).K;
}

void write_region_grid_csv(std::ostream& out,
                           const std::vector<Eigen::VectorXd>& states,
                           const std::vector<RegionFlag>& flags) {
  if (states.size() != flags.size()) {
    throw std::invalid_argument("region CSV: states/flags length mismatch");
  }
  const int n = states.empty() ? 0 : static_cast<int>(states.front().size());
  for (int i = 0; i < n; ++i) out << "x" << i << ",";
  out << "in_XL\n";
  for (size_t r = 0; r < states.size(); ++r) {
    for (int i = 0; i < n; ++i) out << format_full(states[r](i)) << ",";
    out << (flags[r] == RegionFlag::Linear ? 1 : 0) << "\n";
  }
}

}  // namespace sidar
