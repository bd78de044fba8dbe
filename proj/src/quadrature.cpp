#include "npamp/quadrature.hpp"

#include <Eigen/Dense>

#include "npamp/error.hpp"

namespace npamp {

QuadratureRule gauss_laguerre(int n) {
  if (n < 1) fail(ErrorKind::invalid_argument, "gauss_laguerre: need at least one node");
  // Jacobi matrix of the monic Laguerre recurrence: a_k = 2k+1, b_k = k.
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
  for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + 1.0;
  for (int k = 1; k < n; ++k) sub(k - 1) = k;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) fail(ErrorKind::numerical, "gauss_laguerre: eigensolver failed");

  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double v0 = solver.eigenvectors()(0, k);
    rule.nodes[static_cast<std::size_t>(k)] = solver.eigenvalues()(k);
    rule.weights[static_cast<std::size_t>(k)] = v0 * v0;  // mu_0 = ∫ e^{-u} du = 1
  }
  return rule;
}

QuadratureRule trapezoid(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) fail(ErrorKind::invalid_argument, "trapezoid: need n >= 2 and hi > lo");
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.assign(static_cast<std::size_t>(n), (hi - lo) / (n - 1));
  for (int i = 0; i < n; ++i) {
    // Mirror-symmetric construction keeps the grid exactly symmetric about the midpoint.
    const double t = (2.0 * i - (n - 1)) / (n - 1);
    rule.nodes[static_cast<std::size_t>(i)] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * t;
  }
  rule.weights.front() *= 0.5;
  rule.weights.back() *= 0.5;
  return rule;
}

}  // namespace npamp
