#include "sidar/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "sidar/errors.hpp"
#include "sidar/numerics.hpp"

namespace sidar {

StackedProblem build_stacked(const ProblemInstance& inst) {
  const int n = inst.n();
  const int m = inst.m();
  const int q = inst.q();
  const int N = inst.N;

  StackedProblem sp;
  sp.cal_A.resize(N * n, n);
  sp.cal_B = Eigen::MatrixXd::Zero(N * n, N * m);
  sp.cal_G = Eigen::MatrixXd::Zero(N * n, N * q);
  sp.cal_Q = Eigen::MatrixXd::Zero(N * n, N * n);
  sp.cal_R = Eigen::MatrixXd::Zero(N * m, N * m);

  // Powers of A fill the block column and the lower-triangular impulse
  // blocks A^{i-j} B (and with G).
  std::vector<Eigen::MatrixXd> Apow(N + 1);
  Apow[0] = Eigen::MatrixXd::Identity(n, n);
  for (int i = 1; i <= N; ++i) Apow[i] = inst.A * Apow[i - 1];

  for (int i = 0; i < N; ++i) {
    sp.cal_A.middleRows(i * n, n) = Apow[i + 1];
    for (int j = 0; j <= i; ++j) {
      sp.cal_B.block(i * n, j * m, n, m) = Apow[i - j] * inst.B;
      sp.cal_G.block(i * n, j * q, n, q) = Apow[i - j] * inst.G;
    }
    sp.cal_Q.block(i * n, i * n, n, n) = (i == N - 1) ? inst.Pf : inst.Q;
    sp.cal_R.block(i * m, i * m, m, m) = inst.R;
  }
  return sp;
}

Eigen::MatrixXd stacked_multiplier_matrix(const StackedProblem& sp,
                                          double lambda) {
  const Eigen::Index Nm = sp.cal_B.cols();
  const Eigen::Index Nq = sp.cal_G.cols();
  const Eigen::MatrixXd QB = sp.cal_Q * sp.cal_B;
  const Eigen::MatrixXd QG = sp.cal_Q * sp.cal_G;
  Eigen::MatrixXd M(Nm + Nq, Nm + Nq);
  M.topLeftCorner(Nm, Nm) = sp.cal_B.transpose() * QB + sp.cal_R;
  M.topRightCorner(Nm, Nq) = sp.cal_B.transpose() * QG;
  M.bottomLeftCorner(Nq, Nm) = sp.cal_G.transpose() * QB;
  M.bottomRightCorner(Nq, Nq) = sp.cal_G.transpose() * QG;
  M = symmetrize(M);
  // Subtracting lambda on the diagonal after symmetrization keeps the
  // identity M(lambda) = M(0) - lambda diag(0, I) exact entrywise.
  M.bottomRightCorner(Nq, Nq).diagonal().array() -= lambda;
  return M;
}

namespace {

void check_stacked_size(const ProblemInstance& inst) {
  if (inst.N * (inst.m() + inst.q()) > 64) {
    throw std::invalid_argument(
        "stacked oracle capped at N (m+q) <= 64; instance too large");
  }
}

struct StackedSystem {
  Eigen::MatrixXd M;    // multiplier matrix
  Eigen::MatrixXd rhs;  // [cal_B'; cal_G'] cal_Q cal_A
};

StackedSystem assemble(const StackedProblem& sp, double lambda) {
  StackedSystem sys;
  sys.M = stacked_multiplier_matrix(sp, lambda);
  const double cond = condition_2norm(sys.M);
  if (!(cond < kSingularCondition)) {
    throw SingularBlock("stacked multiplier matrix singular (condition " +
                            format_full(cond) + ")",
                        -1, cond);
  }
  const Eigen::MatrixXd QA = sp.cal_Q * sp.cal_A;
  sys.rhs.resize(sp.cal_B.cols() + sp.cal_G.cols(), sp.cal_A.cols());
  sys.rhs.topRows(sp.cal_B.cols()) = sp.cal_B.transpose() * QA;
  sys.rhs.bottomRows(sp.cal_G.cols()) = sp.cal_G.transpose() * QA;
  return sys;
}

}  // namespace

double stacked_value(double lambda, const Eigen::VectorXd& x0,
                     const ProblemInstance& inst) {
  check_stacked_size(inst);
  if (x0.size() != inst.n()) {
    throw std::invalid_argument("stacked_value: x0 dimension mismatch");
  }
  const StackedProblem sp = build_stacked(inst);
  const StackedSystem sys = assemble(sp, lambda);
  const Eigen::MatrixXd X = sys.M.partialPivLu().solve(sys.rhs);
  const Eigen::MatrixXd Psi =
      symmetrize(inst.Q + sp.cal_A.transpose() * sp.cal_Q * sp.cal_A -
                 sys.rhs.transpose() * X);
  return x0.dot(Psi * x0) / (2.0 * inst.alpha) + 0.5 * lambda;
}

StackedStationary stacked_stationary(double lambda, const Eigen::VectorXd& x0,
                                     const ProblemInstance& inst) {
  check_stacked_size(inst);
  if (x0.size() != inst.n()) {
    throw std::invalid_argument("stacked_stationary: x0 dimension mismatch");
  }
  const StackedProblem sp = build_stacked(inst);
  const StackedSystem sys = assemble(sp, lambda);
  const Eigen::VectorXd y = sys.M.partialPivLu().solve(
      Eigen::VectorXd(-(sys.rhs * x0)));
  StackedStationary out;
  out.u = y.head(sp.cal_B.cols());
  out.z = y.tail(sp.cal_G.cols());
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force discretized game.

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Grid {
  double lo = 0.0;
  double step = 1.0;
  int count = 0;
  double at(int i) const { return lo + i * step; }
};

Grid make_grid(GridRange r, double step, const char* name) {
  if (!(step > 0.0) || !(r.hi >= r.lo)) {
    throw std::invalid_argument(std::string(name) + " grid range invalid");
  }
  Grid g;
  g.lo = r.lo;
  g.step = step;
  g.count = static_cast<int>(std::floor((r.hi - r.lo) / step + 1e-9)) + 1;
  return g;
}

// Scalar game engine. States, moves, and weights are plain doubles; the
// recursion tracks (x, remaining budget, spent, accumulated stage cost).
struct ScalarGame {
  double a, b, g, qc, r, pf, alpha;
  int N;
  Grid ug, wg;

  struct LastStage {
    double value = kInf;
    int argmin = -1;
    bool admissible = false;
  };

  // Candidate last-stage disturbances: grid values with |v| <= sqrt(b) that
  // exhaust the remaining budget within one grid step.
  int exhausting_moves(double budget, double out[2]) const {
    const double bnn = std::max(budget, 0.0);
    const double root = std::sqrt(bnn);
    int cnt = 0;
    const double cap = bnn * (1.0 + 1e-12) + 1e-300;
    // Largest grid value <= root, and smallest >= -root.
    const int ip = static_cast<int>(std::floor((root - wg.lo) / wg.step + 1e-12));
    const int in = static_cast<int>(std::ceil((-root - wg.lo) / wg.step - 1e-12));
    for (const int idx : {ip, in}) {
      if (idx < 0 || idx >= wg.count) continue;
      const double v = wg.at(idx);
      if (v * v > cap) continue;
      if (root - std::abs(v) >= wg.step) continue;
      bool dup = false;
      for (int t = 0; t < cnt; ++t) dup = dup || (out[t] == v);
      if (!dup) out[cnt++] = v;
    }
    return cnt;
  }

  // Exact grid minimization of h(u) = max_v f_v(u), where each f_v is a
  // strictly convex parabola in u (R > 0). h is convex, hence unimodal on
  // the grid; the continuous argmin lies at an active vertex or a crossing,
  // so probing the grid neighbors of those points reproduces the full-scan
  // argmin.
  LastStage last_stage(double x, double budget, double spent,
                       double cost) const {
    double moves[2];
    const int nmov = exhausting_moves(budget, moves);
    if (nmov == 0) {
      throw EmptyGrid("budget clipping emptied the final disturbance grid");
    }

    struct Parab {
      double A2, A1, A0;
      double eval(double u) const { return (A2 * u + A1) * u + A0; }
    };
    Parab ps[2];
    int np = 0;
    for (int i = 0; i < nmov; ++i) {
      const double v = moves[i];
      const double den = spent + v * v;
      if (den <= 0.0) continue;  // all-zero disturbance path, excluded
      const double drift = a * x + g * v;
      ps[np].A2 = 0.5 * (r + pf * b * b) / den;
      ps[np].A1 = pf * b * drift / den;
      ps[np].A0 = (cost + 0.5 * qc * x * x + 0.5 * pf * drift * drift) / den;
      ++np;
    }
    LastStage out;
    if (np == 0) return out;  // inadmissible path (zero total disturbance)
    out.admissible = true;

    const auto h = [&](double u) {
      double v = ps[0].eval(u);
      for (int i = 1; i < np; ++i) v = std::max(v, ps[i].eval(u));
      return v;
    };

    // Continuous candidates: active vertices and pairwise crossings.
    double cand[6];
    int nc = 0;
    for (int i = 0; i < np; ++i) {
      const double vtx = -ps[i].A1 / (2.0 * ps[i].A2);
      if (ps[i].eval(vtx) >= h(vtx) - 1e-300) cand[nc++] = vtx;
    }
    if (np == 2) {
      const double dA2 = ps[0].A2 - ps[1].A2;
      const double dA1 = ps[0].A1 - ps[1].A1;
      const double dA0 = ps[0].A0 - ps[1].A0;
      // Equal-magnitude moves give equal denominators up to roundoff, so the
      // difference is linear for practical purposes; the quadratic branch
      // uses the cancellation-free root formula.
      if (std::abs(dA2) <= 1e-9 * (std::abs(ps[0].A2) + std::abs(ps[1].A2))) {
        if (std::abs(dA1) > 1e-300) cand[nc++] = -dA0 / dA1;
      } else {
        const double disc = dA1 * dA1 - 4.0 * dA2 * dA0;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          const double qf = -0.5 * (dA1 + (dA1 >= 0.0 ? sq : -sq));
          cand[nc++] = qf / dA2;
          if (qf != 0.0) cand[nc++] = dA0 / qf;
        }
      }
    }

    for (int c = 0; c < nc; ++c) {
      const double clamped = std::min(
          std::max(cand[c], ug.lo), ug.at(ug.count - 1));
      const int base = static_cast<int>((clamped - ug.lo) / ug.step);
      for (int di = -1; di <= 2; ++di) {
        const int idx = base + di;
        if (idx < 0 || idx >= ug.count) continue;
        const double val = h(ug.at(idx));
        if (val < out.value || (val == out.value && idx < out.argmin)) {
          out.value = val;
          out.argmin = idx;
        }
      }
    }
    return out;
  }

  // Middle stage: exhaustive min over the u grid of the max over the
  // budget-clipped w grid of the continuation value.
  std::optional<double> stage_value(int k, double x, double budget,
                                    double spent, double cost) const {
    if (k == N - 1) {
      const LastStage ls = last_stage(x, budget, spent, cost);
      if (!ls.admissible) return std::nullopt;
      return ls.value;
    }
    const double bnn = std::max(budget, 0.0);
    const double root = std::sqrt(bnn);
    const int jlo = std::max(
        0, static_cast<int>(std::ceil((-root - wg.lo) / wg.step - 1e-12)));
    const int jhi = std::min(
        wg.count - 1,
        static_cast<int>(std::floor((root - wg.lo) / wg.step + 1e-12)));
    if (jhi < jlo) {
      throw EmptyGrid("budget clipping emptied the stage-" +
                      std::to_string(k) + " disturbance grid");
    }
    const double cap = bnn * (1.0 + 1e-12) + 1e-300;

    double best = kInf;
    bool any_u = false;
    for (int i = 0; i < ug.count; ++i) {
      const double u = ug.at(i);
      const double c1 = cost + 0.5 * (qc * x * x + r * u * u);
      double worst = -kInf;
      bool any_w = false;
      for (int j = jlo; j <= jhi; ++j) {
        const double w = wg.at(j);
        if (w * w > cap) continue;
        const auto v = stage_value(k + 1, a * x + b * u + g * w,
                                   budget - w * w, spent + w * w, c1);
        if (!v) continue;
        any_w = true;
        worst = std::max(worst, *v);
      }
      if (!any_w) continue;
      any_u = true;
      best = std::min(best, worst);
    }
    if (!any_u) return std::nullopt;
    return best;
  }
};

}  // namespace

GridGameResult grid_game_solve(double x0, const ProblemInstance& inst,
                               GridRange u_range, GridRange w_range,
                               double step) {
  if (inst.n() != 1 || inst.m() != 1 || inst.q() != 1) {
    throw std::invalid_argument("grid game oracle requires a scalar system");
  }
  if (inst.N > 3) {
    throw std::invalid_argument("grid game oracle requires N <= 3");
  }
  ScalarGame game;
  game.a = inst.A(0, 0);
  game.b = inst.B(0, 0);
  game.g = inst.G(0, 0);
  game.qc = inst.Q(0, 0);
  game.r = inst.R(0, 0);
  game.pf = inst.Pf(0, 0);
  game.alpha = inst.alpha;
  game.N = inst.N;
  game.ug = make_grid(u_range, step, "u");
  game.wg = make_grid(w_range, step, "w");

  GridGameResult res;

  if (inst.N == 1) {
    const auto ls = game.last_stage(x0, inst.alpha, 0.0, 0.0);
    if (!ls.admissible) {
      throw EmptyGrid("no admissible nonzero disturbance at the given step");
    }
    res.value = ls.value;
    res.u0_on_boundary = (ls.argmin == 0 || ls.argmin == game.ug.count - 1);
    return res;
  }

  // Top stage: min over u0 (tracked for the coverage check), max over the
  // clipped w0 grid, recursing into the tail. Cells are independent; the u0
  // range is split across threads with an index-deterministic reduction.
  const double root = std::sqrt(inst.alpha);
  const int jlo = std::max(
      0, static_cast<int>(std::ceil((-root - game.wg.lo) / game.wg.step - 1e-12)));
  const int jhi = std::min(
      game.wg.count - 1,
      static_cast<int>(std::floor((root - game.wg.lo) / game.wg.step + 1e-12)));
  if (jhi < jlo) {
    throw EmptyGrid("budget clipping emptied the stage-0 disturbance grid");
  }
  const double cap = inst.alpha * (1.0 + 1e-12) + 1e-300;

  const int nthreads = std::max(
      1u, std::min(std::thread::hardware_concurrency(), 8u));
  std::vector<double> best(nthreads, kInf);
  std::vector<int> argmin(nthreads, -1);
  std::vector<std::exception_ptr> errors(nthreads);

  const auto worker = [&](int t) {
    try {
      for (int i = t; i < game.ug.count; i += nthreads) {
        const double u = game.ug.at(i);
        const double c1 = 0.5 * (game.qc * x0 * x0 + game.r * u * u);
        double worst = -kInf;
        bool any_w = false;
        for (int j = jlo; j <= jhi; ++j) {
          const double w = game.wg.at(j);
          if (w * w > cap) continue;
          const auto v = game.stage_value(
              1, game.a * x0 + game.b * u + game.g * w,
              inst.alpha - w * w, w * w, c1);
          if (!v) continue;
          any_w = true;
          worst = std::max(worst, *v);
        }
        if (!any_w) continue;
        if (worst < best[t] || (worst == best[t] && i < argmin[t])) {
          best[t] = worst;
          argmin[t] = i;
        }
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker, t);
  worker(0);
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  int bi = -1;
  double bv = kInf;
  for (int t = 0; t < nthreads; ++t) {
    if (argmin[t] < 0) continue;
    if (best[t] < bv || (best[t] == bv && argmin[t] < bi)) {
      bv = best[t];
      bi = argmin[t];
    }
  }
  if (bi < 0) {
    throw EmptyGrid("no admissible nonzero disturbance at the given step");
  }
  res.value = bv;
  res.u0_on_boundary = (bi == 0 || bi == game.ug.count - 1);
  return res;
}

double grid_game_value(double x0, const ProblemInstance& inst,
                       GridRange u_range, GridRange w_range, double step) {
  return grid_game_solve(x0, inst, u_range, w_range, step).value;
}

}  // namespace sidar
