#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sidar/model.hpp"

namespace sidar {

/// Per-stage blocks produced by the backward sweep at one multiplier value.
/// The gain convention is M [K; J] = -d, so u = K x, z = J x, and the
/// closed-loop map is F = A + B K + G J.
struct StageData {
  Eigen::MatrixXd Pi_next;  // value matrix entering the stage
  Eigen::MatrixXd M;        // (m+q) x (m+q) block matrix
  Eigen::MatrixXd d;        // [B'Pi A; G'Pi A]
  Eigen::MatrixXd K;        // m x n control gain
  Eigen::MatrixXd J;        // q x n disturbance gain
  Eigen::MatrixXd F;        // n x n closed-loop map
};

/// Backward sweep restricted to stages start..N-1 (value matrices
/// Pi_start..Pi_N). Partial sweeps matter: the tail can be well posed at a
/// lambda for which earlier stages are already singular.
struct TailSweep {
  double lambda = 0.0;
  int start = 0;
  std::vector<Eigen::MatrixXd> Pis;    // Pis[k - start] = Pi_k
  std::vector<StageData> stages;       // stages[k - start] = stage k

  const Eigen::MatrixXd& Pi(int k) const { return Pis.at(k - start); }
  const StageData& stage(int k) const { return stages.at(k - start); }
};

/// Full-horizon sweep with the stacked disturbance-gain matrix and the
/// closed-loop transition products.
struct RiccatiSweep {
  double lambda = 0.0;
  std::vector<Eigen::MatrixXd> Pis;    // Pis[k] = Pi_k, k = 0..N
  std::vector<StageData> stages;       // stages[k], k = 0..N-1
  Eigen::MatrixXd Jtilde;              // (N q) x n, block row k = J_k Phi_k0
  std::vector<Eigen::MatrixXd> Phis;   // Phis[k] = Phi_k0, k = 0..N
};

/// [[B'Pi B + R, B'Pi G], [G'Pi B, G'Pi G - lambda I]], exactly symmetric.
Eigen::MatrixXd block_matrix(const Eigen::MatrixXd& Pi_next, double lambda,
                             const ProblemInstance& inst);

/// 2-norm condition estimate of a block matrix, flagged singular above 1e14.
struct ConditionDiagnostic {
  double condition = 0.0;
  bool singular = false;
};
ConditionDiagnostic check_invertibility(const Eigen::MatrixXd& M);

/// One backward step: Q + A'Pi A - A'Pi [B G] M^-1 [B'; G'] Pi A.
/// Throws SingularBlock when the block matrix fails the condition gate.
Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& Pi_next, double lambda,
                             const ProblemInstance& inst);

struct StageGains {
  Eigen::MatrixXd K, J, F;
};

/// Gains at one stage, solved from M [K; J] = -d by factorization.
StageGains gains(const Eigen::MatrixXd& Pi_next, double lambda,
                 const ProblemInstance& inst);

/// Full sweep from the terminal condition Pi_N = Pf down to stage 0.
RiccatiSweep backward_sweep(double lambda, const ProblemInstance& inst);

/// Sweep restricted to stages start..N-1; start = N yields just Pi_N = Pf.
TailSweep tail_sweep(double lambda, const ProblemInstance& inst, int start);

/// Stacked disturbance-gain matrix of the tail problem at stage k:
/// block row j-k is J_j Phi_{j,k} for j = k..N-1. Requires sweep.start <= k.
Eigen::MatrixXd tail_disturbance_matrix(const TailSweep& sweep, int k);

/// Closed-loop form of the step: Qbar + Abar'Pi Abar
/// - Abar'Pi G (G'Pi G - lambda I)^+ G'Pi Abar with Abar = A + BK and
/// Qbar = Q + K'RK. Agrees with riccati_step to 1e-10 relative.
Eigen::MatrixXd riccati_step_closed_loop(const Eigen::MatrixXd& Pi_next,
                                         double lambda,
                                         const ProblemInstance& inst);

/// Basar-Bernhard form Q + A'Pi (I + (B R^-1 B' - (1/lambda) G G') Pi)^-1 A.
/// Valid for strictly PD weights and lambda in the interior feasible range;
/// throws SingularInner when the inner matrix is singular.
Eigen::MatrixXd riccati_step_bb(const Eigen::MatrixXd& Pi_next, double lambda,
                                const ProblemInstance& inst);

}  // namespace sidar
