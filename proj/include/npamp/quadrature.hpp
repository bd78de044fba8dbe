#pragma once

#include <vector>

namespace npamp {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss–Laguerre rule for integrals of the form  ∫_0^∞ e^{-u} f(u) du.
// Nodes are ascending. Computed with the Golub–Welsch eigenvalue method.
QuadratureRule gauss_laguerre(int n);

// Composite trapezoid rule with `n` equally spaced nodes on [lo, hi].
QuadratureRule trapezoid(double lo, double hi, int n);

}  // namespace npamp
