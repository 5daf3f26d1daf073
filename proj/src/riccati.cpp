#include "sidar/riccati.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "sidar/errors.hpp"
#include "sidar/numerics.hpp"

namespace sidar {

namespace {

struct StageSolve {
  Eigen::MatrixXd M;  // block matrix
  Eigen::MatrixXd d;  // [B'Pi A; G'Pi A]
  Eigen::MatrixXd X;  // M^-1 d
};

// Assembles and factors the stage system. `stage` is only used in the
// SingularBlock report (-1 for standalone calls).
StageSolve solve_stage(const Eigen::MatrixXd& Pi_next, double lambda,
                       const ProblemInstance& inst, int stage) {
  StageSolve s;
  s.M = block_matrix(Pi_next, lambda, inst);
  const ConditionDiagnostic diag = check_invertibility(s.M);
  if (diag.singular) {
    throw SingularBlock("block matrix M(lambda) singular at stage " +
                            std::to_string(stage) +
                            " (condition " + format_full(diag.condition) + ")",
                        stage, diag.condition);
  }
  const int m = inst.m();
  const int q = inst.q();
  const Eigen::MatrixXd PiA = Pi_next * inst.A;
  s.d.resize(m + q, inst.n());
  s.d.topRows(m) = inst.B.transpose() * PiA;
  s.d.bottomRows(q) = inst.G.transpose() * PiA;
  s.X = s.M.partialPivLu().solve(s.d);
  return s;
}

}  // namespace

Eigen::MatrixXd block_matrix(const Eigen::MatrixXd& Pi_next, double lambda,
                             const ProblemInstance& inst) {
  const int m = inst.m();
  const int q = inst.q();
  const Eigen::MatrixXd PB = Pi_next * inst.B;
  const Eigen::MatrixXd PG = Pi_next * inst.G;
  Eigen::MatrixXd M(m + q, m + q);
  M.topLeftCorner(m, m) = inst.B.transpose() * PB + inst.R;
  M.topRightCorner(m, q) = inst.B.transpose() * PG;
  M.bottomLeftCorner(q, m) = inst.G.transpose() * PB;
  M.bottomRightCorner(q, q) =
      inst.G.transpose() * PG - lambda * Eigen::MatrixXd::Identity(q, q);
  return symmetrize(M);
}

ConditionDiagnostic check_invertibility(const Eigen::MatrixXd& M) {
  ConditionDiagnostic diag;
  diag.condition = condition_2norm(M);
  diag.singular = !(diag.condition < kSingularCondition);
  return diag;
}

Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& Pi_next, double lambda,
                             const ProblemInstance& inst) {
  const StageSolve s = solve_stage(Pi_next, lambda, inst, -1);
  return symmetrize(inst.Q + inst.A.transpose() * Pi_next * inst.A -
                    s.d.transpose() * s.X);
}

StageGains gains(const Eigen::MatrixXd& Pi_next, double lambda,
                 const ProblemInstance& inst) {
  const StageSolve s = solve_stage(Pi_next, lambda, inst, -1);
  StageGains g;
  g.K = -s.X.topRows(inst.m());
  g.J = -s.X.bottomRows(inst.q());
  g.F = inst.A + inst.B * g.K + inst.G * g.J;
  return g;
}

TailSweep tail_sweep(double lambda, const ProblemInstance& inst, int start) {
  if (start < 0 || start > inst.N) {
    throw std::invalid_argument("tail_sweep: start stage out of range");
  }
  TailSweep sweep;
  sweep.lambda = lambda;
  sweep.start = start;
  sweep.Pis.resize(inst.N - start + 1);
  sweep.stages.resize(inst.N - start);
  sweep.Pis[inst.N - start] = inst.Pf;
  for (int k = inst.N - 1; k >= start; --k) {
    const Eigen::MatrixXd& Pi_next = sweep.Pis[k + 1 - start];
    const StageSolve s = solve_stage(Pi_next, lambda, inst, k);
    StageData& st = sweep.stages[k - start];
    st.Pi_next = Pi_next;
    st.M = s.M;
    st.d = s.d;
    st.K = -s.X.topRows(inst.m());
    st.J = -s.X.bottomRows(inst.q());
    st.F = inst.A + inst.B * st.K + inst.G * st.J;
    sweep.Pis[k - start] = symmetrize(
        inst.Q + inst.A.transpose() * Pi_next * inst.A - s.d.transpose() * s.X);
  }
  return sweep;
}

RiccatiSweep backward_sweep(double lambda, const ProblemInstance& inst) {
  TailSweep tail = tail_sweep(lambda, inst, 0);
  RiccatiSweep sweep;
  sweep.lambda = lambda;
  sweep.Pis = std::move(tail.Pis);
  sweep.stages = std::move(tail.stages);

  const int n = inst.n();
  const int q = inst.q();
  sweep.Phis.resize(inst.N + 1);
  sweep.Phis[0] = Eigen::MatrixXd::Identity(n, n);
  sweep.Jtilde.resize(inst.N * q, n);
  for (int k = 0; k < inst.N; ++k) {
    sweep.Jtilde.middleRows(k * q, q) = sweep.stages[k].J * sweep.Phis[k];
    sweep.Phis[k + 1] = sweep.stages[k].F * sweep.Phis[k];
  }
  return sweep;
}

Eigen::MatrixXd tail_disturbance_matrix(const TailSweep& sweep, int k) {
  if (k < sweep.start || k > sweep.start + static_cast<int>(sweep.stages.size())) {
    throw std::invalid_argument("tail_disturbance_matrix: stage out of range");
  }
  const int n = static_cast<int>(sweep.Pis.front().rows());
  const int last = sweep.start + static_cast<int>(sweep.stages.size());
  const int q = last > k ? static_cast<int>(sweep.stage(k).J.rows()) : 0;
  Eigen::MatrixXd Jt((last - k) * q, n);
  Eigen::MatrixXd Phi = Eigen::MatrixXd::Identity(n, n);
  for (int j = k; j < last; ++j) {
    Jt.middleRows((j - k) * q, q) = sweep.stage(j).J * Phi;
    Phi = sweep.stage(j).F * Phi;
  }
  return Jt;
}

Eigen::MatrixXd riccati_step_closed_loop(const Eigen::MatrixXd& Pi_next,
                                         double lambda,
                                         const ProblemInstance& inst) {
  const StageGains g = gains(Pi_next, lambda, inst);
  const Eigen::MatrixXd Abar = inst.A + inst.B * g.K;
  const Eigen::MatrixXd Qbar =
      inst.Q + g.K.transpose() * inst.R * g.K;
  const Eigen::MatrixXd S = symmetrize(
      inst.G.transpose() * Pi_next * inst.G -
      lambda * Eigen::MatrixXd::Identity(inst.q(), inst.q()));
  const Eigen::MatrixXd Spinv = pseudo_inverse_sym(S, 1e-12);
  const Eigen::MatrixXd PiG = Pi_next * inst.G;
  return symmetrize(Qbar + Abar.transpose() * Pi_next * Abar -
                    Abar.transpose() * PiG * Spinv * PiG.transpose() * Abar);
}

Eigen::MatrixXd riccati_step_bb(const Eigen::MatrixXd& Pi_next, double lambda,
                                const ProblemInstance& inst) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("riccati_step_bb requires lambda > 0");
  }
  const int n = inst.n();
  const Eigen::MatrixXd W =
      inst.B * inst.R.llt().solve(inst.B.transpose()) -
      (1.0 / lambda) * inst.G * inst.G.transpose();
  const Eigen::MatrixXd inner =
      Eigen::MatrixXd::Identity(n, n) + W * Pi_next;
  const double cond = condition_2norm(inner);
  if (!(cond < kSingularCondition)) {
    throw SingularInner("Basar-Bernhard inner matrix singular (condition " +
                        format_full(cond) + ")");
  }
  return symmetrize(inst.Q + inst.A.transpose() * Pi_next *
                                 inner.partialPivLu().solve(inst.A));
}

}  // namespace sidar
