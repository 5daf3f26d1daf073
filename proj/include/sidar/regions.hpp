#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "sidar/feasibility.hpp"
#include "sidar/model.hpp"

namespace sidar {

enum class RegionFlag { Linear, Nonlinear };

/// Quadratic form of the linear-control region at one stage: membership is
/// x' E x <= budget with E the Gram matrix of the stacked disturbance gains
/// at the ladder lower bound, so E is PSD by construction.
struct RegionEllipsoid {
  Eigen::MatrixXd E;
  double budget = 0.0;
  int stage = 0;
  double lambda_lower = 0.0;

  /// Closed-region test with relative slack 1e-9 toward membership.
  bool contains(const Eigen::VectorXd& x) const {
    return x.dot(E * x) <= budget * (1.0 + 1e-9);
  }
};

/// Builds E = Jtilde_k(lambda_{k+1})' Jtilde_k(lambda_{k+1}) from the tail
/// sweep at the ladder lower bound.
RegionEllipsoid region_quadratic(int k, double budget,
                                 const ProblemInstance& inst);
RegionEllipsoid region_quadratic(int k, double budget,
                                 const ProblemInstance& inst,
                                 const FeasibilityLadder& ladder);

/// Linear iff x' E x <= budget (1 + 1e-9); the complement is the nonlinear
/// region.
RegionFlag classify(const Eigen::VectorXd& x, double budget, int k,
                    const ProblemInstance& inst);
RegionFlag classify(const Eigen::VectorXd& x, double budget, int k,
                    const ProblemInstance& inst,
                    const FeasibilityLadder& ladder);

/// State-independent gain valid inside the linear region: K_k at the ladder
/// lower bound.
Eigen::MatrixXd linear_gain(int k, const ProblemInstance& inst);
Eigen::MatrixXd linear_gain(int k, const ProblemInstance& inst,
                            const FeasibilityLadder& ladder);

/// CSV grid export `x...,in_XL` for plotting.
void write_region_grid_csv(std::ostream& out,
                           const std::vector<Eigen::VectorXd>& states,
                           const std::vector<RegionFlag>& flags);

}  // namespace sidar
