#include <chrono>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>

#include "sidar/check.hpp"
#include "sidar/errors.hpp"
#include "sidar/feasibility.hpp"
#include "sidar/model.hpp"
#include "sidar/multiplier.hpp"
#include "sidar/numerics.hpp"
#include "sidar/oracle.hpp"
#include "sidar/policy.hpp"
#include "sidar/regions.hpp"
#include "sidar/riccati.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitSolverFailure = 3;

Eigen::VectorXd parse_vector(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("bad number: " + tok);
    vals.push_back(v);
  }
  if (vals.empty()) throw std::invalid_argument("empty vector");
  Eigen::VectorXd x(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) x(i) = vals[i];
  return x;
}

struct Range {
  double lo = 0.0, hi = 0.0;
  int count = 0;
  double at(int i) const {
    return count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
  }
};

Range parse_range(const std::string& text) {
  Range r;
  char c1 = 0, c2 = 0;
  std::stringstream ss(text);
  if (!(ss >> r.lo >> c1 >> r.hi >> c2 >> r.count) || c1 != ':' || c2 != ':' ||
      r.count < 1 || !(ss >> std::ws).eof()) {
    throw std::invalid_argument("range must be lo:hi:n, got " + text);
  }
  return r;
}

void print_ladder(const sidar::FeasibilityLadder& ladder) {
  const int N = static_cast<int>(ladder.lambdas.size());
  std::cout << "ladder:";
  for (double v : ladder.lambdas) std::cout << " " << sidar::format_full(v);
  std::cout << "  (lambda_" << N << " .. lambda_1)\n";
  std::cout << "residuals:";
  for (double v : ladder.residuals) std::cout << " " << sidar::format_full(v);
  std::cout << "\n";
}

int cmd_validate(const std::string& file) {
  const sidar::ProblemInstance inst = sidar::ProblemInstance::from_json_file(file);
  const sidar::ValidationReport rep = sidar::validate_instance(inst);
  std::cout << "dimensions: n=" << inst.n() << " m=" << inst.m()
            << " q=" << inst.q() << " N=" << inst.N
            << " alpha=" << sidar::format_full(inst.alpha) << "\n";
  std::cout << "A1 stabilizable: " << (rep.a1_stabilizable ? "pass" : "FAIL") << "\n";
  std::cout << "A1 detectable:   " << (rep.a1_detectable ? "pass" : "FAIL") << "\n";
  std::cout << "A2 range(G) in range(B): " << (rep.a2_range_inclusion ? "pass" : "FAIL") << "\n";
  std::cout << "A3 G'PfG nonzero: " << (rep.a3_terminal_coupling ? "pass" : "FAIL") << "\n";
  std::cout << "A4 Q > 0:  " << (rep.a4_state_pd ? "pass" : "FAIL") << "\n";
  std::cout << "A4 Pf > 0: " << (rep.a4_terminal_pd ? "pass" : "FAIL") << "\n";
  for (const auto& d : rep.diagnostics) std::cout << "warning: " << d << "\n";
  return kExitOk;
}

int cmd_ladder(const std::string& file) {
  const sidar::ProblemInstance inst = sidar::ProblemInstance::from_json_file(file);
  print_ladder(sidar::lambda_ladder(inst));
  return kExitOk;
}

int cmd_solve(const std::string& file, const std::string& x0_csv) {
  const sidar::ProblemInstance inst = sidar::ProblemInstance::from_json_file(file);
  const Eigen::VectorXd x0 = parse_vector(x0_csv);
  if (x0.size() != inst.n()) {
    throw std::invalid_argument("x0 must have " + std::to_string(inst.n()) +
                                " entries");
  }
  const sidar::FeasibilityLadder ladder = sidar::lambda_ladder(inst);
  print_ladder(ladder);
  const sidar::MultiplierSolution sol =
      sidar::solve_multiplier(x0, inst.alpha, 0, inst, ladder);
  std::cout << "lambda_star: " << sidar::format_full(sol.lambda_star) << "\n";
  std::cout << "value: " << sidar::format_full(sol.value) << "\n";
  std::cout << "region: " << (sol.at_lower_bound ? "L" : "NL") << "\n";
  std::cout << "z_norm_sq: " << sidar::format_full(sol.z_norm_sq) << "\n";
  const sidar::TailSweep sweep = sidar::tail_sweep(
      std::max(sol.lambda_star, sidar::kLambdaFloor), inst, 0);
  const Eigen::MatrixXd& K = sweep.stage(0).K;
  std::cout << "gain:";
  for (int i = 0; i < K.rows(); ++i) {
    for (int j = 0; j < K.cols(); ++j) {
      std::cout << " " << sidar::format_full(K(i, j));
    }
  }
  std::cout << "\n";
  return kExitOk;
}

std::vector<Eigen::VectorXd> read_w_file(const std::string& path, int N, int q) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open disturbance file: " + path);
  std::vector<Eigen::VectorXd> seq;
  std::string line;
  while (std::getline(in, line) && static_cast<int>(seq.size()) < N) {
    if (line.empty()) continue;
    Eigen::VectorXd w = parse_vector(line);
    if (w.size() != q) {
      throw std::invalid_argument("disturbance rows must have q=" +
                                  std::to_string(q) + " entries");
    }
    seq.push_back(std::move(w));
  }
  if (static_cast<int>(seq.size()) < N) {
    throw std::invalid_argument("disturbance file has fewer than N rows");
  }
  return seq;
}

int cmd_simulate(const std::string& file, const std::string& x0_csv,
                 const std::string& mode, std::uint64_t seed,
                 const std::string& out_path) {
  const sidar::ProblemInstance inst = sidar::ProblemInstance::from_json_file(file);
  const Eigen::VectorXd x0 = parse_vector(x0_csv);
  if (x0.size() != inst.n()) {
    throw std::invalid_argument("x0 must have " + std::to_string(inst.n()) +
                                " entries");
  }

  sidar::DisturbanceSpec spec;
  spec.seed = seed;
  if (mode == "adversarial") {
    spec.mode = sidar::DisturbanceMode::Adversarial;
  } else if (mode == "zero") {
    spec.mode = sidar::DisturbanceMode::Zero;
  } else if (mode == "random") {
    spec.mode = sidar::DisturbanceMode::RandomSeeded;
  } else if (mode.rfind("file:", 0) == 0) {
    spec.mode = sidar::DisturbanceMode::Fixed;
    spec.fixed = read_w_file(mode.substr(5), inst.N, inst.q());
  } else {
    throw std::invalid_argument(
        "mode must be adversarial|zero|random|file:<path>");
  }

  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
  out << "k";
  for (int i = 0; i < inst.n(); ++i) out << ",x" << i;
  out << ",b,lambda_star";
  for (int i = 0; i < inst.m(); ++i) out << ",u" << i;
  for (int i = 0; i < inst.q(); ++i) out << ",w" << i;
  out << ",in_XL\n";

  const auto stream_row = [&](const sidar::StageRecord& r) {
    out << r.k;
    for (int i = 0; i < inst.n(); ++i) out << "," << sidar::format_full(r.x(i));
    out << "," << sidar::format_full(r.b) << ","
        << sidar::format_full(r.lambda_star);
    for (int i = 0; i < inst.m(); ++i) out << "," << sidar::format_full(r.u(i));
    for (int i = 0; i < inst.q(); ++i) out << "," << sidar::format_full(r.w(i));
    out << "," << (r.in_XL ? 1 : 0) << "\n";
  };

  try {
    const sidar::Trajectory traj = sidar::simulate(x0, inst, spec, stream_row);
    out.flush();
    std::cout << "realized_cost: " << sidar::format_full(traj.realized_cost)
              << "\n";
    std::cout << "budget_used: " << sidar::format_full(traj.budget_used)
              << "\n";
    return kExitOk;
  } catch (const sidar::SolverError& e) {
    // Partial rows are already flushed; append a status row.
    out << "error,," << e.what() << "\n";
    out.flush();
    std::cerr << "solver failure mid-trajectory: " << e.what() << "\n";
    return kExitSolverFailure;
  }
}

int cmd_sweep(const std::string& file, const std::string& x0_spec,
              const std::string& b0_spec, const std::string& dir_csv,
              const std::string& out_path) {
  const sidar::ProblemInstance inst = sidar::ProblemInstance::from_json_file(file);
  const Range x0r = parse_range(x0_spec);
  const Range b0r = parse_range(b0_spec);
  if (!(b0r.lo > 0.0) || b0r.hi > inst.alpha) {
    throw std::invalid_argument("b0 range must lie in (0, alpha]");
  }
  Eigen::VectorXd dir;
  if (!dir_csv.empty()) {
    dir = parse_vector(dir_csv);
    if (dir.size() != inst.n()) {
      throw std::invalid_argument("direction must have n entries");
    }
  } else {
    if (inst.n() != 1) {
      throw std::invalid_argument(
          "sweep needs --dir for state dimension > 1");
    }
    dir = Eigen::VectorXd::Ones(1);
  }

  const sidar::FeasibilityLadder ladder = sidar::lambda_ladder(inst);
  const sidar::RegionEllipsoid ell0 =
      sidar::region_quadratic(0, inst.alpha, inst, ladder);

  struct Cell {
    double x0 = 0.0, b0 = 0.0, lambda = 0.0;
    Eigen::VectorXd u;
    bool in_XL = false;
    bool failed = false;
  };
  const int total = b0r.count * x0r.count;
  std::vector<Cell> cells(total);

  const auto eval_cell = [&](int idx) {
    Cell& c = cells[idx];
    c.b0 = b0r.at(idx / x0r.count);
    c.x0 = x0r.at(idx % x0r.count);
    const Eigen::VectorXd x = c.x0 * dir;
    try {
      const sidar::MultiplierSolution sol =
          sidar::solve_multiplier(x, c.b0, 0, inst, ladder);
      c.lambda = sol.lambda_star;
      const sidar::TailSweep sweep = sidar::tail_sweep(
          std::max(sol.lambda_star, sidar::kLambdaFloor), inst, 0);
      c.u = sweep.stage(0).K * x;
      c.in_XL = x.dot(ell0.E * x) <= c.b0 * (1.0 + 1e-9);
    } catch (const sidar::SolverError&) {
      c.failed = true;
    }
  };

  const int nthreads =
      std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < total; i += nthreads) eval_cell(i);
    });
  }
  for (int i = 0; i < total; i += nthreads) eval_cell(i);
  for (auto& th : pool) th.join();

  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot open output file: " + out_path);
  out << "x0,b0,lambda_star";
  if (inst.m() == 1) {
    out << ",u_star";
  } else {
    for (int i = 0; i < inst.m(); ++i) out << ",u_star" << i;
  }
  out << ",in_XL\n";
  int failures = 0;
  for (const Cell& c : cells) {
    out << sidar::format_full(c.x0) << "," << sidar::format_full(c.b0);
    if (c.failed) {
      ++failures;
      out << ",nan";
      for (int i = 0; i < inst.m(); ++i) out << ",nan";
      out << ",nan\n";
      continue;
    }
    out << "," << sidar::format_full(c.lambda);
    for (int i = 0; i < inst.m(); ++i) out << "," << sidar::format_full(c.u(i));
    out << "," << (c.in_XL ? 1 : 0) << "\n";
  }
  std::cout << "cells: " << total << "\n";
  std::cout << "failed_cells: " << failures << "\n";
  return failures == 0 ? kExitOk : kExitSolverFailure;
}

int run_check_on(const sidar::ProblemInstance& inst, std::uint64_t seed,
                 const std::string& label) {
  const sidar::CheckReport report = sidar::run_check_suite(inst, seed);
  if (report.skipped_a2) {
    std::cout << label
              << ": skipped (Assumption 2 violated: range(G) is not "
                 "contained in range(B))\n";
    return kExitOk;
  }
  for (const auto& s : report.suites) {
    if (s.skipped) {
      std::cout << label << ": " << s.name << ": skipped (" << s.detail
                << ")\n";
    } else if (s.passed) {
      std::cout << label << ": " << s.name << ": pass\n";
    }
  }
  if (const sidar::SuiteResult* f = report.first_failure()) {
    std::cout << label << ": " << f->name
              << ": FAIL residual=" << sidar::format_full(f->residual) << " ("
              << f->detail << ")\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_check(const std::string& file, int random_count, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  int status = kExitOk;
  if (!file.empty()) {
    const sidar::ProblemInstance inst =
        sidar::ProblemInstance::from_json_file(file);
    status = run_check_on(inst, seed, "instance");
  } else {
    std::mt19937_64 rng(seed);
    for (int i = 0; i < random_count && status == kExitOk; ++i) {
      const sidar::ProblemInstance inst = sidar::random_instance(rng);
      status = run_check_on(inst, rng(), "random[" + std::to_string(i) + "]");
    }
  }
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - start;
  std::cout << "runtime_seconds: " << sidar::format_full(elapsed.count())
            << "\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-horizon signal-bound disturbance attenuation solver"};
  app.require_subcommand(1);

  std::string file, x0_csv, mode = "zero", out_path, x0_spec, b0_spec, dir_csv;
  std::uint64_t seed = 0;
  int random_count = 0;

  auto* validate = app.add_subcommand("validate", "Check standing assumptions");
  validate->add_option("file", file)->required();

  auto* ladder = app.add_subcommand("ladder", "Print feasibility bounds");
  ladder->add_option("file", file)->required();

  auto* solve = app.add_subcommand("solve", "Solve the multiplier problem at x0");
  solve->add_option("file", file)->required();
  solve->add_option("--x0", x0_csv)->required();

  auto* simulate = app.add_subcommand("simulate", "Run the closed loop");
  simulate->add_option("file", file)->required();
  simulate->add_option("--x0", x0_csv)->required();
  simulate->add_option("--mode", mode,
                       "adversarial|zero|random|file:<path>");
  simulate->add_option("--seed", seed);
  simulate->add_option("--out", out_path)->required();

  auto* sweep = app.add_subcommand("sweep", "Grid of (x0, b0) solves");
  sweep->add_option("file", file)->required();
  sweep->add_option("--x0", x0_spec, "lo:hi:n")->required();
  sweep->add_option("--b0", b0_spec, "lo:hi:n")->required();
  sweep->add_option("--dir", dir_csv, "state direction for n > 1");
  sweep->add_option("--out", out_path)->required();

  auto* check = app.add_subcommand("check", "Run the verification suites");
  check->add_option("file", file);
  check->add_option("--random", random_count);
  check->add_option("--seed", seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(file);
    if (ladder->parsed()) return cmd_ladder(file);
    if (solve->parsed()) return cmd_solve(file, x0_csv);
    if (simulate->parsed()) return cmd_simulate(file, x0_csv, mode, seed, out_path);
    if (sweep->parsed()) return cmd_sweep(file, x0_spec, b0_spec, dir_csv, out_path);
    if (check->parsed()) {
      if (file.empty() && random_count <= 0) {
        std::cerr << "check needs an instance file or --random N\n";
        return kExitBadInput;
      }
      return cmd_check(file, random_count, seed);
    }
  } catch (const sidar::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolverFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitBadInput;
}
