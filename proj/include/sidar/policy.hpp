#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "sidar/feasibility.hpp"
#include "sidar/model.hpp"

namespace sidar {

/// One stage of a closed-loop run: state, remaining budget, multiplier,
/// applied control and disturbance, and the region flag.
struct StageRecord {
  int k = 0;
  Eigen::VectorXd x;
  double b = 0.0;
  double lambda_star = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd w;
  bool in_XL = false;
};

struct Trajectory {
  std::vector<StageRecord> records;  // length N
  Eigen::VectorXd x_final;
  double realized_cost = 0.0;        // stage costs plus terminal cost
  double budget_used = 0.0;          // sum of |w_k|^2
};

struct ControlDecision {
  Eigen::VectorXd u;
  double lambda_star = 0.0;
  bool in_XL = false;
};

/// Online policy: solve the stage-k multiplier problem from (x, b) and apply
/// u = K_k(lambda*) x.
ControlDecision control(const Eigen::VectorXd& x, double b, int k,
                        const ProblemInstance& inst);
ControlDecision control(const Eigen::VectorXd& x, double b, int k,
                        const ProblemInstance& inst,
                        const FeasibilityLadder& ladder);

/// Adversary's stationary disturbance: solves
/// (G'Pi_{k+1}G - lambda* I) wbar = -G'Pi_{k+1}(A x + B u) and radially
/// projects wbar onto the remaining-budget ball of radius sqrt(b).
Eigen::VectorXd adversarial_disturbance(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& u, double b,
                                        int k, double lambda_star,
                                        const ProblemInstance& inst);

/// b - |w|^2 clamped at zero. `clamped` (optional) is set when |w|^2
/// exceeds b by more than 1e-9.
double budget_update(double b, const Eigen::VectorXd& w,
                     bool* clamped = nullptr);

enum class DisturbanceMode { Adversarial, Zero, Fixed, RandomSeeded };

struct DisturbanceSpec {
  DisturbanceMode mode = DisturbanceMode::Zero;
  std::vector<Eigen::VectorXd> fixed;  // per-stage w for Fixed mode
  std::uint64_t seed = 0;              // for RandomSeeded mode
};

/// Runs the full N-stage loop: control, disturbance, state update, budget
/// update. All modes keep |w_k|^2 within the remaining budget (supplied
/// sequences are radially projected). Deterministic for a fixed seed.
/// `on_record`, when set, is invoked after each stage (used to stream CSV
/// rows before a potential mid-run failure).
Trajectory simulate(const Eigen::VectorXd& x0, const ProblemInstance& inst,
                    const DisturbanceSpec& spec,
                    const std::function<void(const StageRecord&)>& on_record = {});

/// Trajectory CSV: header `k,x...,b,lambda_star,u...,w...,in_XL`, vector
/// fields flattened one column per entry, 17-digit decimals.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const ProblemInstance& inst);

}  // namespace sidar
