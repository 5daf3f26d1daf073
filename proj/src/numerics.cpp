#include "sidar/numerics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "sidar/errors.hpp"

namespace sidar {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) {
  return 0.5 * (M + M.transpose()).eval();
}

double sym_norm(const Eigen::MatrixXd& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(M),
                                                    Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

double min_eigenvalue(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(M),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double condition_2norm(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 1.0;
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (smax == 0.0) return std::numeric_limits<double>::infinity();
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

Eigen::MatrixXd principal_sqrt(const Eigen::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(M));
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return symmetrize(es.eigenvectors() * d.asDiagonal() *
                    es.eigenvectors().transpose());
}

Eigen::MatrixXd pseudo_inverse_sym(const Eigen::MatrixXd& M, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(M));
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double emax = ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i)) > rel_tol * emax) inv(i) = 1.0 / ev(i);
  }
  return symmetrize(es.eigenvectors() * inv.asDiagonal() *
                    es.eigenvectors().transpose());
}

double bisect_increasing(const std::function<double(double)>& f, double lo,
                         double hi, double tol_scale) {
  double flo = f(lo);
  if (flo >= 0.0) return lo;
  while (hi - lo > tol_scale * (1.0 + 0.5 * std::abs(lo + hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // interval exhausted in fp
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double expand_bracket(const std::function<double(double)>& f, double lo,
                      const std::string& context) {
  double hi = lo + 1.0;
  while (f(hi) <= 0.0) {
    hi *= 2.0;
    if (hi > kBracketCap) {
      throw BracketFailure(context + ": no sign change below 1e12");
    }
  }
  return hi;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace sidar
