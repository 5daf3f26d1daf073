#include "sidar/model.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sidar/numerics.hpp"

namespace sidar {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_symmetric(const Eigen::MatrixXd& M, const std::string& name) {
  const double dev = (M - M.transpose()).norm();
  require(dev <= 1e-10 * (1.0 + M.norm()),
          name + " must be symmetric (relative deviation too large)");
}

// Rank of a complex matrix with the 1e-10 * sigma_max threshold.
int numeric_rank(const Eigen::MatrixXcd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double thresh = 1e-10 * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh) ++r;
  }
  return r;
}

}  // namespace

ProblemInstance::ProblemInstance(Eigen::MatrixXd A_, Eigen::MatrixXd B_,
                                 Eigen::MatrixXd G_, Eigen::MatrixXd Q_,
                                 Eigen::MatrixXd R_, Eigen::MatrixXd Pf_,
                                 int N_, double alpha_)
    : A(std::move(A_)),
      B(std::move(B_)),
      G(std::move(G_)),
      Q(std::move(Q_)),
      R(std::move(R_)),
      Pf(std::move(Pf_)),
      N(N_),
      alpha(alpha_) {
  require(A.rows() >= 1 && A.rows() == A.cols(), "A must be square and nonempty");
  const Eigen::Index nn = A.rows();
  require(B.rows() == nn, "B row count must match A");
  require(B.cols() >= 1, "B must have at least one column");
  require(G.rows() == nn, "G row count must match A");
  require(G.cols() >= 1, "G must have at least one column");
  require(Q.rows() == nn && Q.cols() == nn, "Q must be n x n");
  require(R.rows() == B.cols() && R.cols() == B.cols(), "R must be m x m");
  require(Pf.rows() == nn && Pf.cols() == nn, "Pf must be n x n");
  require(N >= 1, "N must be at least 1");
  require(alpha > 0.0, "alpha must be positive");

  check_symmetric(Q, "Q");
  check_symmetric(R, "R");
  check_symmetric(Pf, "Pf");
  Q = symmetrize(Q);
  R = symmetrize(R);
  Pf = symmetrize(Pf);

  require(min_eigenvalue(Q) >= -1e-10 * (1.0 + sym_norm(Q)),
          "Q must be positive semidefinite");
  require(min_eigenvalue(Pf) >= -1e-10 * (1.0 + sym_norm(Pf)),
          "Pf must be positive semidefinite");
  require(min_eigenvalue(R) > 1e-12 * sym_norm(R),
          "R must be positive definite");
}

namespace {

Eigen::MatrixXd parse_matrix(const nlohmann::json& j, const std::string& key) {
  if (!j.contains(key)) {
    throw std::invalid_argument("missing required matrix \"" + key + "\"");
  }
  const auto& v = j.at(key);
  if (!v.is_array() || v.empty() || !v[0].is_array()) {
    throw std::invalid_argument(key + " must be a nested (row-major) array");
  }
  const size_t rows = v.size();
  const size_t cols = v[0].size();
  Eigen::MatrixXd M(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    if (!v[i].is_array() || v[i].size() != cols) {
      throw std::invalid_argument(key + " rows must have equal length");
    }
    for (size_t k = 0; k < cols; ++k) {
      if (!v[i][k].is_number()) {
        throw std::invalid_argument(key + " entries must be numbers");
      }
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          v[i][k].get<double>();
    }
  }
  return M;
}

}  // namespace

ProblemInstance ProblemInstance::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid JSON: ") + e.what());
  }
  Eigen::MatrixXd A = parse_matrix(j, "A");
  Eigen::MatrixXd B = parse_matrix(j, "B");
  Eigen::MatrixXd G = parse_matrix(j, "G");
  Eigen::MatrixXd Q = parse_matrix(j, "Q");
  Eigen::MatrixXd R = parse_matrix(j, "R");
  Eigen::MatrixXd Pf = parse_matrix(j, "Pf");
  if (!j.contains("N") || !j.at("N").is_number_integer()) {
    throw std::invalid_argument("missing or non-integer \"N\"");
  }
  if (!j.contains("alpha") || !j.at("alpha").is_number()) {
    throw std::invalid_argument("missing or non-numeric \"alpha\"");
  }
  return ProblemInstance(std::move(A), std::move(B), std::move(G),
                         std::move(Q), std::move(R), std::move(Pf),
                         j.at("N").get<int>(), j.at("alpha").get<double>());
}

ProblemInstance ProblemInstance::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

ValidationReport validate_instance(const ProblemInstance& inst) {
  ValidationReport rep;
  const int n = inst.n();
  const Eigen::MatrixXcd Ac = inst.A.cast<std::complex<double>>();
  const Eigen::MatrixXcd Bc = inst.B.cast<std::complex<double>>();
  const Eigen::MatrixXd Qsqrt = principal_sqrt(inst.Q);
  const Eigen::MatrixXcd Cc = Qsqrt.cast<std::complex<double>>();

  // Assumption 1 via Hautus tests over the unstable eigenvalues of A.
  rep.a1_stabilizable = true;
  rep.a1_detectable = true;
  Eigen::EigenSolver<Eigen::MatrixXd> es(inst.A);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> lam = es.eigenvalues()(i);
    if (std::abs(lam) < 1.0) continue;
    Eigen::MatrixXcd Hs(n, n + inst.m());
    Hs << lam * Eigen::MatrixXcd::Identity(n, n) - Ac, Bc;
    if (numeric_rank(Hs) < n) {
      rep.a1_stabilizable = false;
      rep.diagnostics.push_back("A1: uncontrollable unstable mode at |lambda|=" +
                                format_full(std::abs(lam)));
    }
    Eigen::MatrixXcd Hd(2 * n, n);
    Hd << lam * Eigen::MatrixXcd::Identity(n, n) - Ac, Cc;
    if (numeric_rank(Hd) < n) {
      rep.a1_detectable = false;
      rep.diagnostics.push_back("A1: unobservable unstable mode at |lambda|=" +
                                format_full(std::abs(lam)));
    }
  }

  // Assumption 2: least-squares residual of projecting G onto R(B).
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(inst.B);
  const Eigen::MatrixXd resid = inst.G - inst.B * cod.solve(inst.G);
  rep.a2_range_inclusion = resid.norm() <= 1e-10 * (1.0 + inst.G.norm());
  if (!rep.a2_range_inclusion) {
    rep.diagnostics.push_back("A2: range(G) not contained in range(B), residual " +
                              format_full(resid.norm()));
  }

  // Assumption 3: nonzero terminal disturbance coupling.
  const Eigen::MatrixXd GPG = inst.G.transpose() * inst.Pf * inst.G;
  rep.a3_terminal_coupling = sym_norm(GPG) > 1e-12 * (1.0 + sym_norm(inst.Pf));
  if (!rep.a3_terminal_coupling) {
    rep.diagnostics.push_back("A3: G'Pf G is numerically zero");
  }

  // Assumption 4: strict positive definiteness.
  rep.a4_state_pd = min_eigenvalue(inst.Q) > 1e-12 * (1.0 + sym_norm(inst.Q));
  rep.a4_terminal_pd =
      min_eigenvalue(inst.Pf) > 1e-12 * (1.0 + sym_norm(inst.Pf));
  if (!rep.a4_state_pd) rep.diagnostics.push_back("A4: Q is not strictly PD");
  if (!rep.a4_terminal_pd) rep.diagnostics.push_back("A4: Pf is not strictly PD");

  return rep;
}

}  // namespace sidar
