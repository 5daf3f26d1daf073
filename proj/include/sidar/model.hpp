#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace sidar {

/// Full definition of one disturbance attenuation game: dynamics
/// x+ = Ax + Bu + Gw, stage cost (1/2)(x'Qx + u'Ru), terminal cost
/// (1/2)x'Pf x, horizon N, and total squared-disturbance budget alpha.
///
/// Construction validates dimensions and the type invariants (Q, Pf
/// symmetric PSD; R symmetric PD; N >= 1; alpha > 0) and throws
/// std::invalid_argument naming the offending field. Weight matrices are
/// stored exactly symmetrized. Instances are immutable after construction
/// and safe to share across threads.
struct ProblemInstance {
  Eigen::MatrixXd A;   // n x n state transition
  Eigen::MatrixXd B;   // n x m control input
  Eigen::MatrixXd G;   // n x q disturbance input
  Eigen::MatrixXd Q;   // n x n state weight, PSD
  Eigen::MatrixXd R;   // m x m control weight, PD
  Eigen::MatrixXd Pf;  // n x n terminal weight, PSD
  int N = 1;           // horizon length
  double alpha = 1.0;  // disturbance budget

  ProblemInstance(Eigen::MatrixXd A_, Eigen::MatrixXd B_, Eigen::MatrixXd G_,
                  Eigen::MatrixXd Q_, Eigen::MatrixXd R_, Eigen::MatrixXd Pf_,
                  int N_, double alpha_);

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int q() const { return static_cast<int>(G.cols()); }

  /// Parses the JSON instance schema: keys "A","B","G","Q","R","Pf"
  /// (row-major nested arrays), "N" (integer), "alpha" (number). All
  /// matrices required, no defaults.
  static ProblemInstance from_json_file(const std::string& path);
  static ProblemInstance from_json_text(const std::string& text);
};

/// Outcome of the deterministic standing-assumption checks. Violations are
/// reported, not fatal; the solver runs permissively.
struct ValidationReport {
  bool a1_stabilizable = false;
  bool a1_detectable = false;
  bool a2_range_inclusion = false;   // R(G) subset of R(B)
  bool a3_terminal_coupling = false; // G'Pf G != 0
  bool a4_state_pd = false;          // Q > 0
  bool a4_terminal_pd = false;       // Pf > 0
  std::vector<std::string> diagnostics;

  bool all_pass() const {
    return a1_stabilizable && a1_detectable && a2_range_inclusion &&
           a3_terminal_coupling && a4_state_pd && a4_terminal_pd;
  }
};

/// Checks Assumptions 1-4: Hautus tests for stabilizability/detectability,
/// the least-squares range-inclusion residual, terminal coupling, and
/// strict positive definiteness of Q and Pf. Pure and deterministic.
ValidationReport validate_instance(const ProblemInstance& inst);

}  // namespace sidar
