#include "sidar/policy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "sidar/errors.hpp"
#include "sidar/multiplier.hpp"
#include "sidar/numerics.hpp"
#include "sidar/riccati.hpp"

namespace sidar {

namespace {

double floored(double lambda) { return std::max(lambda, kLambdaFloor); }

Eigen::VectorXd project_to_budget(const Eigen::VectorXd& w, double b) {
  const double nsq = w.squaredNorm();
  if (nsq <= b) return w;
  if (nsq == 0.0) return w;
  return w * std::sqrt(std::max(b, 0.0) / nsq);
}

}  // namespace

ControlDecision control(const Eigen::VectorXd& x, double b, int k,
                        const ProblemInstance& inst) {
  return control(x, b, k, inst, lambda_ladder(inst));
}

ControlDecision control(const Eigen::VectorXd& x, double b, int k,
                        const ProblemInstance& inst,
                        const FeasibilityLadder& ladder) {
  const MultiplierSolution sol = solve_multiplier(x, b, k, inst, ladder);
  const TailSweep sweep = tail_sweep(floored(sol.lambda_star), inst, k);
  ControlDecision dec;
  dec.u = sweep.stage(k).K * x;
  dec.lambda_star = sol.lambda_star;
  dec.in_XL = sol.at_lower_bound;
  return dec;
}

Eigen::VectorXd adversarial_disturbance(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& u, double b,
                                        int k, double lambda_star,
                                        const ProblemInstance& inst) {
  if (b < 0.0) throw std::invalid_argument("adversarial_disturbance: b < 0");
  const double lam = floored(lambda_star);
  const TailSweep sweep = tail_sweep(lam, inst, k + 1);
  const Eigen::MatrixXd& Pi = sweep.Pi(k + 1);
  const int q = inst.q();

  // (G'Pi G - lambda I) wbar = -G'Pi (A x + B u), solved as a PSD system.
  // At an orange-rung lambda* = lambda_{k+1} the matrix is singular by
  // construction (the fixed point is where it loses rank), but the system
  // stays consistent; the minimal-norm solution is taken, which resolves the
  // homogeneous case at x = 0 to wbar = 0. A genuinely inconsistent system
  // is the error case.
  const Eigen::MatrixXd H = symmetrize(
      lam * Eigen::MatrixXd::Identity(q, q) -
      inst.G.transpose() * Pi * inst.G);
  const Eigen::VectorXd rhs =
      inst.G.transpose() * (Pi * (inst.A * x + inst.B * u));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double emax = ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd y = es.eigenvectors().transpose() * rhs;
  for (int i = 0; i < q; ++i) {
    y(i) = std::abs(ev(i)) > 1e-12 * (emax + kLambdaFloor) ? y(i) / ev(i) : 0.0;
  }
  const Eigen::VectorXd wbar = es.eigenvectors() * y;
  if ((H * wbar - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) {
    throw SingularBlock(
        "disturbance system G'PiG - lambda I singular and inconsistent at stage " +
            std::to_string(k),
        k, emax > 0.0 && std::abs(ev(0)) > 0.0 ? emax / std::abs(ev(0)) : 0.0);
  }
  return project_to_budget(wbar, b);
}

double budget_update(double b, const Eigen::VectorXd& w, bool* clamped) {
  const double spent = w.squaredNorm();
  if (clamped) *clamped = spent > b + 1e-9;
  return std::max(b - spent, 0.0);
}

Trajectory simulate(const Eigen::VectorXd& x0, const ProblemInstance& inst,
                    const DisturbanceSpec& spec,
                    const std::function<void(const StageRecord&)>& on_record) {
  if (x0.size() != inst.n()) {
    throw std::invalid_argument("simulate: x0 dimension mismatch");
  }
  if (spec.mode == DisturbanceMode::Fixed &&
      static_cast<int>(spec.fixed.size()) < inst.N) {
    throw std::invalid_argument("simulate: fixed sequence shorter than horizon");
  }

  const FeasibilityLadder ladder = lambda_ladder(inst);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Trajectory traj;
  traj.records.reserve(inst.N);
  Eigen::VectorXd x = x0;
  double b = inst.alpha;
  double cost = 0.0;
  double used = 0.0;

  for (int k = 0; k < inst.N; ++k) {
    const ControlDecision dec = control(x, b, k, inst, ladder);

    Eigen::VectorXd w;
    switch (spec.mode) {
      case DisturbanceMode::Adversarial:
        w = adversarial_disturbance(x, dec.u, b, k, dec.lambda_star, inst);
        break;
      case DisturbanceMode::Zero:
        w = Eigen::VectorXd::Zero(inst.q());
        break;
      case DisturbanceMode::Fixed:
        if (spec.fixed[k].size() != inst.q()) {
          throw std::invalid_argument("simulate: fixed w dimension mismatch");
        }
        w = project_to_budget(spec.fixed[k], b);
        break;
      case DisturbanceMode::RandomSeeded: {
        Eigen::VectorXd dir(inst.q());
        do {
          for (int i = 0; i < inst.q(); ++i) dir(i) = normal(rng);
        } while (dir.norm() < 1e-12);
        dir.normalize();
        const double mag = unit(rng) * std::sqrt(b / (inst.N - k));
        w = project_to_budget(mag * dir, b);
        break;
      }
    }

    StageRecord rec;
    rec.k = k;
    rec.x = x;
    rec.b = b;
    rec.lambda_star = dec.lambda_star;
    rec.u = dec.u;
    rec.w = w;
    rec.in_XL = dec.in_XL;
    traj.records.push_back(rec);
    if (on_record) on_record(rec);

    cost += 0.5 * (x.dot(inst.Q * x) + dec.u.dot(inst.R * dec.u));
    used += w.squaredNorm();
    x = inst.A * x + inst.B * dec.u + inst.G * w;
    b = budget_update(b, w);
  }

  cost += 0.5 * x.dot(inst.Pf * x);
  traj.x_final = x;
  traj.realized_cost = cost;
  traj.budget_used = used;
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                          const ProblemInstance& inst) {
  out << "k";
  for (int i = 0; i < inst.n(); ++i) out << ",x" << i;
  out << ",b,lambda_star";
  for (int i = 0; i < inst.m(); ++i) out << ",u" << i;
  for (int i = 0; i < inst.q(); ++i) out << ",w" << i;
  out << ",in_XL\n";
  for (const StageRecord& r : traj.records) {
    out << r.k;
    for (int i = 0; i < inst.n(); ++i) out << "," << format_full(r.x(i));
    out << "," << format_full(r.b) << "," << format_full(r.lambda_star);
    for (int i = 0; i < inst.m(); ++i) out << "," << format_full(r.u(i));
    for (int i = 0; i < inst.q(); ++i) out << "," << format_full(r.w(i));
    out << "," << (r.in_XL ? 1 : 0) << "\n";
  }
}

}  // namespace sidar
