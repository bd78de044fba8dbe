#pragma once

// Truncated Fock-space linear algebra shared by every other module.
//
// Convention: x = (a + a^dag)/sqrt(2), p = (a - a^dag)/(i sqrt(2)), so the
// vacuum has quadrature variance 1/2. Multimode states are stored row-major
// over modes with mode 0 the slowest index.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "npamp/error.hpp"

namespace npamp {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kNegativeEigenvalueTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-10;

class HilbertSpec {
 public:
  explicit HilbertSpec(std::vector<int> mode_dims);
  static HilbertSpec single(int dim) { return HilbertSpec({dim}); }

  int num_modes() const { return static_cast<int>(dims_.size()); }
  int dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
  const std::vector<int>& mode_dims() const { return dims_; }
  std::size_t total_dim() const { return total_; }

  std::vector<int> occupation(std::size_t flat) const;
  std::size_t flat_index(std::span<const int> occupation) const;

  // Product of the dimensions of modes strictly before / after `mode`.
  std::size_t dim_before(int mode) const;
  std::size_t dim_after(int mode) const;

  HilbertSpec tensor(const HilbertSpec& other) const;
  HilbertSpec subspace(std::span<const int> modes) const;

  bool operator==(const HilbertSpec& other) const { return dims_ == other.dims_; }

 private:
  std::vector<int> dims_;
  std::size_t total_ = 1;
};

struct Ket {
  HilbertSpec space;
  CVector amplitudes;
  bool normalized = false;
  // Probability mass that the untruncated state carries above the cutoff.
  double tail_mass = 0.0;
};

class LinearOperator {
 public:
  LinearOperator(HilbertSpec space, CMatrix matrix);

  const HilbertSpec& space() const { return space_; }
  const CMatrix& matrix() const { return matrix_; }

  CVector apply(const CVector& v) const { return matrix_ * v; }
  LinearOperator adjoint() const { return {space_, matrix_.adjoint()}; }

 private:
  HilbertSpec space_;
  CMatrix matrix_;
};

class DensityMatrix {
 public:
  // `pre_norm_trace` is the trace the state had before its most recent
  // normalization (the success weight of a post-selecting map).
  DensityMatrix(HilbertSpec space, CMatrix matrix, double pre_norm_trace = 1.0);

  static DensityMatrix pure(const Ket& ket);

  const HilbertSpec& space() const { return space_; }
  const CMatrix& matrix() const { return matrix_; }
  double pre_norm_trace() const { return pre_norm_trace_; }

  double trace() const { return matrix_.trace().real(); }
  double purity() const;
  double hermiticity_defect() const;
  double min_eigenvalue() const;

  // Divides by the current trace and records it as pre_norm_trace.
  DensityMatrix normalized() const;
  DensityMatrix with_pre_norm_trace(double weight) const;

  // Tr[rho (I x op x I)] for a single-mode operator acting on `mode`.
  Complex expectation(int mode, const CMatrix& op) const;

  // Diagonal of the reduced state of one mode (photon-number distribution).
  RVector photon_distribution(int mode) const;

 private:
  HilbertSpec space_;
  CMatrix matrix_;
  double pre_norm_trace_;
};

enum class LadderKind { annihilate, create, number };

LinearOperator ladder_operator(LadderKind kind, int dim);

// <m|D(alpha)|n> from the associated-Laguerre closed form.
LinearOperator displacement_operator(int dim, Complex alpha);

// Raw truncated components e^{-|a|^2/2} a^n / sqrt(n!) for n < dim.
CVector coherent_amplitudes(int dim, Complex alpha);

// Coherent state renormalized over the truncated space. Throws a truncation
// error when the discarded tail mass exceeds 1e-4.
Ket coherent_ket(int dim, Complex alpha);

// Hermite functions psi_n(x) = <n|x>, n < dim.
RVector hermite_functions(int dim, double x);

// Improper quadrature eigenket |x>, returned unnormalized.
Ket quadrature_ket(int dim, double x);

LinearOperator tensor(const LinearOperator& a, const LinearOperator& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);

// Ascending real eigenvalues of the Hermitian part of `m`. Throws if `m` is
// not Hermitian within 1e-8 (relative to its largest entry).
RVector hermitian_eigenvalues(const CMatrix& m);
RVector hermitian_eigenvalues(const DensityMatrix& rho);

// (I x op x I) * m, with `op` acting on `mode` of `space`.
CMatrix apply_on_mode(const CMatrix& m, const HilbertSpec& space, int mode,
                      const CMatrix& op);

// (I x left x I) * rho * (I x right x I)^dag.
CMatrix sandwich_on_mode(const CMatrix& rho, const HilbertSpec& space, int mode,
                         const CMatrix& left, const CMatrix& right);

inline CMatrix conjugate_on_mode(const CMatrix& rho, const HilbertSpec& space,
                                 int mode, const CMatrix& op) {
  return sandwich_on_mode(rho, space, mode, op, op);
}

// Full-space matrix I x op x I; only meant for small spaces and tests.
CMatrix embed_on_mode(const CMatrix& op, const HilbertSpec& space, int mode);

}  // namespace npamp
