#include "npamp/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace npamp {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::post_selection: return "post-selection-impossible";
    case ErrorKind::quadrature: return "quadrature";
    case ErrorKind::mass_deficit: return "mass-deficit";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// HilbertSpec

HilbertSpec::HilbertSpec(std::vector<int> mode_dims) : dims_(std::move(mode_dims)) {
  if (dims_.empty()) fail(ErrorKind::invalid_argument, "HilbertSpec needs at least one mode");
  for (int d : dims_) {
    if (d < 2) {
      fail(ErrorKind::invalid_argument,
           "invalid-dimension: mode dimension " + std::to_string(d) + " < 2");
    }
    total_ *= static_cast<std::size_t>(d);
  }
}

std::vector<int> HilbertSpec::occupation(std::size_t flat) const {
  if (flat >= total_) fail(ErrorKind::invalid_argument, "flat index out of range");
  std::vector<int> occ(dims_.size());
  for (std::size_t m = dims_.size(); m-- > 0;) {
    const auto d = static_cast<std::size_t>(dims_[m]);
    occ[m] = static_cast<int>(flat % d);
    flat /= d;
  }
  return occ;
}

std::size_t HilbertSpec::flat_index(std::span<const int> occupation) const {
  if (occupation.size() != dims_.size()) {
    fail(ErrorKind::invalid_argument, "occupation tuple has wrong number of modes");
  }
  std::size_t flat = 0;
  for (std::size_t m = 0; m < dims_.size(); ++m) {
    if (occupation[m] < 0 || occupation[m] >= dims_[m]) {
      fail(ErrorKind::invalid_argument, "occupation out of range");
    }
    flat = flat * static_cast<std::size_t>(dims_[m]) + static_cast<std::size_t>(occupation[m]);
  }
  return flat;
}

std::size_t HilbertSpec::dim_before(int mode) const {
  std::size_t n = 1;
  for (int m = 0; m < mode; ++m) n *= static_cast<std::size_t>(dims_[static_cast<std::size_t>(m)]);
  return n;
}

std::size_t HilbertSpec::dim_after(int mode) const {
  std::size_t n = 1;
  for (int m = mode + 1; m < num_modes(); ++m) n *= static_cast<std::size_t>(dims_[static_cast<std::size_t>(m)]);
  return n;
}

HilbertSpec HilbertSpec::tensor(const HilbertSpec& other) const {
  std::vector<int> dims = dims_;
  dims.insert(dims.end(), other.dims_.begin(), other.dims_.end());
  return HilbertSpec(std::move(dims));
}

HilbertSpec HilbertSpec::subspace(std::span<const int> modes) const {
  std::vector<int> dims;
  for (int m : modes) dims.push_back(dim(m));
  return HilbertSpec(std::move(dims));
}

// ---------------------------------------------------------------------------
// Operators and states

LinearOperator::LinearOperator(HilbertSpec space, CMatrix matrix)
    : space_(std::move(space)), matrix_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(space_.total_dim());
  if (matrix_.rows() != n || matrix_.cols() != n) {
    fail(ErrorKind::invalid_argument, "operator matrix does not match its Hilbert space");
  }
}

DensityMatrix::DensityMatrix(HilbertSpec space, CMatrix matrix, double pre_norm_trace)
    : space_(std::move(space)), matrix_(std::move(matrix)), pre_norm_trace_(pre_norm_trace) {
  const auto n = static_cast<Eigen::Index>(space_.total_dim());
  if (matrix_.rows() != n || matrix_.cols() != n) {
    fail(ErrorKind::invalid_argument, "density matrix does not match its Hilbert space");
  }
}

DensityMatrix DensityMatrix::pure(const Ket& ket) {
  return DensityMatrix(ket.space, ket.amplitudes * ket.amplitudes.adjoint());
}

double DensityMatrix::purity() const {
  // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho.
  return matrix_.squaredNorm();
}

double DensityMatrix::hermiticity_defect() const {
  return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const { return hermitian_eigenvalues(matrix_)(0); }

DensityMatrix DensityMatrix::normalized() const {
  const double t = trace();
  if (!(t > 0.0) || !std::isfinite(t)) {
    fail(ErrorKind::post_selection, "cannot normalize a state with zero trace");
  }
  CMatrix m = matrix_ / t;
  m = 0.5 * (m + m.adjoint()).eval();
  return DensityMatrix(space_, std::move(m), t);
}

DensityMatrix DensityMatrix::with_pre_norm_trace(double weight) const {
  return DensityMatrix(space_, matrix_, weight);
}

Complex DensityMatrix::expectation(int mode, const CMatrix& op) const {
  return apply_on_mode(matrix_, space_, mode, op).trace();
}

RVector DensityMatrix::photon_distribution(int mode) const {
  const int d = space_.dim(mode);
  const std::size_t after = space_.dim_after(mode);
  RVector p = RVector::Zero(d);
  for (std::size_t i = 0; i < space_.total_dim(); ++i) {
    const auto n = static_cast<Eigen::Index>((i / after) % static_cast<std::size_t>(d));
    const auto ii = static_cast<Eigen::Index>(i);
    p(n) += matrix_(ii, ii).real();
  }
  return p;
}

LinearOperator ladder_operator(LadderKind kind, int dim) {
  if (dim < 2) fail(ErrorKind::invalid_argument, "invalid-dimension: ladder operator needs dim >= 2");
  CMatrix m = CMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) {
    const double s = std::sqrt(static_cast<double>(n));
    switch (kind) {
      case LadderKind::annihilate: m(n - 1, n) = s; break;
      case LadderKind::create: m(n, n - 1) = s; break;
      case LadderKind::number: m(n, n) = n; break;
    }
  }
  return LinearOperator(HilbertSpec::single(dim), std::move(m));
}

LinearOperator displacement_operator(int dim, Complex alpha) {
  if (dim < 2) fail(ErrorKind::invalid_argument, "invalid-dimension: displacement needs dim >= 2");
  const double x = std::norm(alpha);
  const double r = std::abs(alpha);
  const double theta = std::arg(alpha);
  CMatrix m = CMatrix::Zero(dim, dim);
  // Below the diagonal (row = col + k):
  //   <n+k|D|n> = sqrt(n!/(n+k)!) alpha^k e^{-x/2} L_n^(k)(x)
  // and above it alpha^k becomes (-alpha*)^k.
  std::vector<double> lag(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    const int nmax = dim - 1 - k;
    lag[0] = 1.0;
    if (nmax >= 1) lag[1] = 1.0 + k - x;
    for (int j = 1; j < nmax; ++j) {
      lag[static_cast<std::size_t>(j + 1)] =
          ((2.0 * j + 1.0 + k - x) * lag[static_cast<std::size_t>(j)] -
           (j + k) * lag[static_cast<std::size_t>(j - 1)]) / (j + 1.0);
    }
    const double rk = (k == 0) ? 1.0 : std::pow(r, k);
    const Complex below = std::polar(rk, k * theta);
    const Complex above = std::polar(rk, k * (std::numbers::pi - theta));
    for (int n = 0; n <= nmax; ++n) {
      const double pref =
          std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(n + k + 1.0)) - 0.5 * x);
      const double v = pref * lag[static_cast<std::size_t>(n)];
      m(n + k, n) = v * below;
      if (k > 0) m(n, n + k) = v * above;
    }
  }
  return LinearOperator(HilbertSpec::single(dim), std::move(m));
}

CVector coherent_amplitudes(int dim, Complex alpha) {
  CVector c(dim);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

Ket coherent_ket(int dim, Complex alpha) {
  if (dim < 2) fail(ErrorKind::invalid_argument, "invalid-dimension: coherent state needs dim >= 2");
  CVector c = coherent_amplitudes(dim, alpha);
  const double kept = c.squaredNorm();
  const double tail = std::max(0.0, 1.0 - kept);
  if (tail > 1e-4) {
    fail(ErrorKind::truncation, "coherent state |alpha|=" + std::to_string(std::abs(alpha)) +
                                    " loses " + std::to_string(tail) + " above cutoff " +
                                    std::to_string(dim));
  }
  c /= std::sqrt(kept);
  return Ket{HilbertSpec::single(dim), std::move(c), true, tail};
}

RVector hermite_functions(int dim, double x) {
  RVector psi(dim);
  psi(0) = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  if (dim > 1) psi(1) = std::numbers::sqrt2 * x * psi(0);
  for (int n = 2; n < dim; ++n) {
    psi(n) = std::sqrt(2.0 / n) * x * psi(n - 1) - std::sqrt((n - 1.0) / n) * psi(n - 2);
  }
  return psi;
}

Ket quadrature_ket(int dim, double x) {
  if (dim < 2) fail(ErrorKind::invalid_argument, "invalid-dimension: quadrature ket needs dim >= 2");
  return Ket{HilbertSpec::single(dim), hermite_functions(dim, x).cast<Complex>(), false, 0.0};
}

namespace {

CMatrix kronecker(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

LinearOperator tensor(const LinearOperator& a, const LinearOperator& b) {
  return LinearOperator(a.space().tensor(b.space()), kronecker(a.matrix(), b.matrix()));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(a.space().tensor(b.space()), kronecker(a.matrix(), b.matrix()),
                       a.pre_norm_trace() * b.pre_norm_trace());
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  if (keep.empty()) fail(ErrorKind::invalid_argument, "partial_trace: keep set is empty");
  const HilbertSpec& space = rho.space();
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  for (int m : kept) {
    if (m < 0 || m >= space.num_modes()) fail(ErrorKind::invalid_argument, "partial_trace: mode out of range");
  }
  std::vector<int> traced;
  for (int m = 0; m < space.num_modes(); ++m) {
    if (!std::binary_search(kept.begin(), kept.end(), m)) traced.push_back(m);
  }
  const HilbertSpec out_space = space.subspace(kept);
  if (traced.empty()) return DensityMatrix(out_space, rho.matrix(), rho.pre_norm_trace());

  const std::size_t n = space.total_dim();
  std::vector<Eigen::Index> kept_index(n);
  std::vector<std::size_t> traced_index(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto occ = space.occupation(i);
    std::size_t k = 0, t = 0;
    for (int m : kept) k = k * static_cast<std::size_t>(space.dim(m)) + static_cast<std::size_t>(occ[static_cast<std::size_t>(m)]);
    for (int m : traced) t = t * static_cast<std::size_t>(space.dim(m)) + static_cast<std::size_t>(occ[static_cast<std::size_t>(m)]);
    kept_index[i] = static_cast<Eigen::Index>(k);
    traced_index[i] = t;
  }
  const auto nk = static_cast<Eigen::Index>(out_space.total_dim());
  CMatrix out = CMatrix::Zero(nk, nk);
  const CMatrix& m = rho.matrix();
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) {
      if (traced_index[r] == traced_index[c]) {
        out(kept_index[r], kept_index[c]) += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
  }
  return DensityMatrix(out_space, std::move(out), rho.pre_norm_trace());
}

RVector hermitian_eigenvalues(const CMatrix& m) {
  if (m.rows() != m.cols()) fail(ErrorKind::invalid_argument, "eigenvalues of a non-square matrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    fail(ErrorKind::numerical, "hermitian_eigenvalues: matrix is not Hermitian");
  }
  const CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorKind::numerical, "eigendecomposition did not converge");
  return solver.eigenvalues();
}

RVector hermitian_eigenvalues(const DensityMatrix& rho) { return hermitian_eigenvalues(rho.matrix()); }

CMatrix apply_on_mode(const CMatrix& m, const HilbertSpec& space, int mode, const CMatrix& op) {
  const auto n = static_cast<Eigen::Index>(space.total_dim());
  const Eigen::Index dk = space.dim(mode);
  if (m.rows() != n) fail(ErrorKind::invalid_argument, "apply_on_mode: row count mismatch");
  if (op.rows() != dk || op.cols() != dk) fail(ErrorKind::invalid_argument, "apply_on_mode: operator size mismatch");
  const auto before = static_cast<Eigen::Index>(space.dim_before(mode));
  const auto after = static_cast<Eigen::Index>(space.dim_after(mode));
  CMatrix out(m.rows(), m.cols());
  const CMatrix opt = op.transpose();
  // Within a column the rows of one "before" slab form an (after x dk)
  // column-major block X with X(q, k) = m[(p, k, q), j]; the result is X op^T.
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index p = 0; p < before; ++p) {
      const Eigen::Index offset = j * n + p * dk * after;
      Eigen::Map<const CMatrix> x(m.data() + offset, after, dk);
      Eigen::Map<CMatrix> y(out.data() + offset, after, dk);
      y.noalias() = x * opt;
    }
  }
  return out;
}

CMatrix sandwich_on_mode(const CMatrix& rho, const HilbertSpec& space, int mode,
                         const CMatrix& left, const CMatrix& right) {
  const CMatrix half = apply_on_mode(rho, space, mode, left);
  return apply_on_mode(half.adjoint(), space, mode, right).adjoint();
}

CMatrix embed_on_mode(const CMatrix& op, const HilbertSpec& space, int mode) {
  const auto before = static_cast<Eigen::Index>(space.dim_before(mode));
  const auto after = static_cast<Eigen::Index>(space.dim_after(mode));
  return kronecker(kronecker(CMatrix::Identity(before, before), op), CMatrix::Identity(after, after));
}

}  // namespace npamp
