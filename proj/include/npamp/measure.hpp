#pragma once

// Homodyne/heterodyne POVM discretizations, outcome distributions, mutual
// information, von Neumann entropy and Holevo quantities. All information
// quantities are in bits.

#include <cstddef>
#include <optional>
#include <vector>

#include "npamp/channels.hpp"
#include "npamp/fock.hpp"

namespace npamp {

enum class MeasurementKind { homodyne, heterodyne };

const char* to_string(MeasurementKind kind);

// Outcome points with trapezoid weights. Homodyne points are x values;
// heterodyne points are (x, p) pairs stored in `x` and `p` side by side.
struct MeasurementGrid {
  MeasurementKind kind = MeasurementKind::homodyne;
  std::vector<double> x;
  std::vector<double> p;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }

  static MeasurementGrid homodyne(double half_width, int points);
  static MeasurementGrid heterodyne(double half_width, int points_per_axis);
};

struct GridResolution {
  int homodyne_points = 96;
  int heterodyne_points = 32;  // per axis
  double span_sigmas = 6.0;

  GridResolution refined(int factor) const {
    return {homodyne_points * factor, heterodyne_points * factor, span_sigmas};
  }
};

// Grid over [-w, w] (or [-w, w]^2) with w = span_sigmas * sigma_max, where
// sigma_max^2 is the largest quadrature variance of `mode` (plus 1/2 for
// heterodyne outcomes).
MeasurementGrid adapted_grid(MeasurementKind kind, const DensityMatrix& rho, int mode,
                             const GridResolution& resolution = {});

// Column j holds phi_j with Pi_j = phi_j phi_j^dag. Homodyne: Hermite
// functions (density in dx). Heterodyne: |alpha>/sqrt(2 pi) with
// alpha = (x + i p)/sqrt(2) (density in dx dp).
CMatrix povm_vectors(const MeasurementGrid& grid, int dim);

LinearOperator povm_density(MeasurementKind kind, double x, double p, int dim);

struct JointDistribution {
  MeasurementGrid grid_a;
  MeasurementGrid grid_b;
  Eigen::MatrixXd masses;     // p(a, b) w_a w_b, negatives clipped
  double captured_mass = 0.0; // before renormalization
};

// Two-mode state, Alice = mode 0, Bob = mode 1. Throws a mass-deficit error
// if the grids capture less than 1 - 1e-3 of the probability.
JointDistribution joint_distribution(const DensityMatrix& rho, const MeasurementGrid& grid_a,
                                     const MeasurementGrid& grid_b);

double mutual_information(const JointDistribution& jd);

double entropy_bits(const RVector& eigenvalues);
double von_neumann_entropy(const DensityMatrix& rho);

struct ConditionalEnsemble {
  std::vector<double> probabilities;     // outcome masses, sum ~ 1
  std::vector<DensityMatrix> states;     // normalized states of the kept modes
  std::vector<std::size_t> grid_index;
  std::vector<int> register_value;       // ancilla outcome k, or -1
  std::size_t dropped = 0;               // zero-probability outcomes
  double captured_mass = 0.0;

  double mean_entropy() const;
};

// Measures `measured_mode` with the grid's POVM and, if given,
// `register_mode` projectively in the Fock basis. Kept modes are the rest,
// in their original order.
ConditionalEnsemble conditional_ensemble(const DensityMatrix& rho, int measured_mode,
                                         const MeasurementGrid& grid,
                                         std::optional<int> register_mode = std::nullopt);

// H(E;A) = S(rho) - sum_b P(b) S[rho_A(b)], Bob (mode 1) measured. For a
// three-mode (A, B, nu) state Bob also reads the ancilla register.
double holevo_direct(const DensityMatrix& rho, const MeasurementGrid& grid_b);

// H(E;B) = S(rho) - sum_a P(a) S[rho_B(a)], Alice (mode 0) measured.
double holevo_reverse(const DensityMatrix& rho, const MeasurementGrid& grid_a);

double holevo_direct(const AncillaBranches& state, const MeasurementGrid& grid_b);
double holevo_reverse(const AncillaBranches& state, const MeasurementGrid& grid_a);

// Entropy of the (A, B, nu) state held in factored form.
double von_neumann_entropy(const AncillaBranches& state);

}  // namespace npamp
