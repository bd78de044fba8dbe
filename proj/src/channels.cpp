#include "npamp/channels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "npamp/quadrature.hpp"

namespace npamp {

namespace {

CMatrix matrix_power(const CMatrix& m, int k) {
  CMatrix out = CMatrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < k; ++i) out = (out * m).eval();
  return out;
}

CMatrix annihilation(int dim) { return ladder_operator(LadderKind::annihilate, dim).matrix(); }

// Probability mass the exact (untruncated) a^dag^M would push above the cutoff,
// relative to the total output mass, given the input photon distribution.
double addition_leak_fraction(const RVector& p, int m_add) {
  const auto dim = static_cast<int>(p.size());
  double kept = 0.0, leaked = 0.0;
  for (int n = 0; n < dim; ++n) {
    double gain = 1.0;
    for (int j = 1; j <= m_add; ++j) gain *= n + j;
    (n + m_add < dim ? kept : leaked) += p(n) * gain;
  }
  const double total = kept + leaked;
  return total > 0.0 ? leaked / total : 0.0;
}

void check_addition_leak(const RVector& p, int m_add) {
  if (m_add <= 0) return;
  const double leak = addition_leak_fraction(p, m_add);
  if (leak > 1e-8) {
    fail(ErrorKind::truncation, "photon addition leaks " + std::to_string(leak) +
                                    " of the norm above cutoff " + std::to_string(p.size()) +
                                    "; raise the cutoff");
  }
}

// Applies a single-mode superoperator, given as a (d^2 x d^2) matrix acting on
// column-major vec(X), to every (d x d) block of `rho` that lives on `mode`.
CMatrix apply_superoperator(const CMatrix& rho, const HilbertSpec& space, int mode, const CMatrix& super) {
  const auto d = static_cast<Eigen::Index>(space.dim(mode));
  const auto before = static_cast<Eigen::Index>(space.dim_before(mode));
  const auto after = static_cast<Eigen::Index>(space.dim_after(mode));
  const Eigen::Index rest = before * after;
  auto flat = [&](Eigen::Index p, Eigen::Index m, Eigen::Index q) { return (p * d + m) * after + q; };

  CMatrix blocks(d * d, rest * rest);
  for (Eigen::Index p2 = 0; p2 < before; ++p2)
    for (Eigen::Index q2 = 0; q2 < after; ++q2)
      for (Eigen::Index p1 = 0; p1 < before; ++p1)
        for (Eigen::Index q1 = 0; q1 < after; ++q1) {
          const Eigen::Index b = (p1 * after + q1) + rest * (p2 * after + q2);
          for (Eigen::Index m2 = 0; m2 < d; ++m2)
            for (Eigen::Index m1 = 0; m1 < d; ++m1)
              blocks(m1 + d * m2, b) = rho(flat(p1, m1, q1), flat(p2, m2, q2));
        }
  const CMatrix mapped = super * blocks;
  CMatrix out(rho.rows(), rho.cols());
  for (Eigen::Index p2 = 0; p2 < before; ++p2)
    for (Eigen::Index q2 = 0; q2 < after; ++q2)
      for (Eigen::Index p1 = 0; p1 < before; ++p1)
        for (Eigen::Index q1 = 0; q1 < after; ++q1) {
          const Eigen::Index b = (p1 * after + q1) + rest * (p2 * after + q2);
          for (Eigen::Index m2 = 0; m2 < d; ++m2)
            for (Eigen::Index m1 = 0; m1 < d; ++m1)
              out(flat(p1, m1, q1), flat(p2, m2, q2)) = mapped(m1 + d * m2, b);
        }
  return out;
}

CMatrix gaussian_noise_superoperator(int dim, double delta, NoiseQuadrature nodes) {
  const QuadratureRule radial = gauss_laguerre(nodes.radial_nodes);
  const auto d2 = static_cast<Eigen::Index>(dim) * dim;
  CMatrix super = CMatrix::Zero(d2, d2);
  // ∫ e^{-|a|^2/Delta}/(pi Delta) f(a) d^2a = (1/2pi) ∫dθ ∫ e^{-u} f(sqrt(Delta u) e^{iθ}) du
  for (std::size_t k = 0; k < radial.nodes.size(); ++k) {
    const double r = std::sqrt(delta * radial.nodes[k]);
    const double w = radial.weights[k] / nodes.angular_nodes;
    for (int j = 0; j < nodes.angular_nodes; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / nodes.angular_nodes;
      const CMatrix disp = displacement_operator(dim, std::polar(r, theta)).matrix();
      // vec(D X D^dag) = (conj(D) (x) D) vec(X)
      const CMatrix dc = disp.conjugate();
      for (Eigen::Index c1 = 0; c1 < dim; ++c1)
        for (Eigen::Index c0 = 0; c0 < dim; ++c0)
          super.block(c0 * dim, c1 * dim, dim, dim) += (w * dc(c0, c1)) * disp;
    }
  }
  return super;
}

}  // namespace

void AmplifierConfig::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    fail(ErrorKind::invalid_argument, "amplifier delta=" + std::to_string(delta) + " must be >= 0");
  }
  if (m_add < 0 || n_sub < 0) fail(ErrorKind::invalid_argument, "amplifier photon counts must be >= 0");
  if (quadrature.radial_nodes < 1 || quadrature.angular_nodes < 1) {
    fail(ErrorKind::invalid_argument, "amplifier quadrature needs at least one node per axis");
  }
}

AncillaNoiseModel AncillaNoiseModel::make(double delta_prime) {
  if (!(delta_prime >= 0.0) || !std::isfinite(delta_prime)) {
    fail(ErrorKind::invalid_argument, "delta_prime must be >= 0");
  }
  AncillaNoiseModel model;
  model.delta_prime = delta_prime;
  const double side = std::exp(-0.5 * delta_prime);
  const double norm = std::sqrt(1.0 + 8.0 * side * side);
  model.betas[0] = 0.0;
  model.coefficients[0] = 1.0 / norm;
  for (int k = 1; k < kComponents; ++k) {
    model.betas[static_cast<std::size_t>(k)] =
        std::polar(std::sqrt(delta_prime), 2.0 * std::numbers::pi * k / 8.0);
    model.coefficients[static_cast<std::size_t>(k)] = side / norm;
  }
  return model;
}

double AncillaNoiseModel::mean_added_photons() const {
  double n = 0.0;
  for (int k = 1; k < kComponents; ++k) n += weight(k) * std::norm(betas[static_cast<std::size_t>(k)]);
  return n;
}

DensityMatrix loss_channel(const DensityMatrix& rho, int mode, double eta) {
  if (!(eta > 0.0) || eta > 1.0) {
    fail(ErrorKind::invalid_argument, "loss eta=" + std::to_string(eta) + " outside (0, 1]");
  }
  if (eta == 1.0) return rho;
  const HilbertSpec& space = rho.space();
  const int dim = space.dim(mode);
  const CMatrix a = annihilation(dim);
  // A_k = sqrt((1-eta)^k / k!) eta^{n/2} a^k
  Eigen::VectorXd eta_n(dim);
  for (int n = 0; n < dim; ++n) eta_n(n) = std::pow(eta, 0.5 * n);
  Eigen::VectorXd completeness = Eigen::VectorXd::Zero(dim);
  CMatrix out = CMatrix::Zero(rho.matrix().rows(), rho.matrix().cols());
  CMatrix a_pow = CMatrix::Identity(dim, dim);
  double coeff = 1.0;
  for (int k = 0; k < dim; ++k) {
    const CMatrix kraus = std::sqrt(coeff) * (eta_n.asDiagonal() * a_pow);
    out += conjugate_on_mode(rho.matrix(), space, mode, kraus);
    completeness += (kraus.adjoint() * kraus).diagonal().real();
    if ((completeness.array() - 1.0).abs().maxCoeff() < 1e-12) break;
    a_pow = (a_pow * a).eval();
    coeff *= (1.0 - eta) / (k + 1.0);
  }
  return DensityMatrix(space, 0.5 * (out + out.adjoint()), rho.pre_norm_trace());
}

DensityMatrix add_gaussian_noise(const DensityMatrix& rho, int mode, double delta, NoiseQuadrature nodes) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    fail(ErrorKind::invalid_argument, "noise variance must be >= 0");
  }
  if (delta == 0.0) return rho;
  if (nodes.radial_nodes < 1 || nodes.angular_nodes < 1) {
    fail(ErrorKind::invalid_argument, "noise quadrature needs at least one node per axis");
  }
  const HilbertSpec& space = rho.space();
  const CMatrix super = gaussian_noise_superoperator(space.dim(mode), delta, nodes);
  CMatrix out = apply_superoperator(rho.matrix(), space, mode, super);
  const double in_trace = rho.trace();
  const double out_trace = out.trace().real();
  const double drift = std::abs(out_trace - in_trace) / in_trace;
  if (drift > 1e-6) {
    fail(ErrorKind::quadrature, "Gaussian noise Delta=" + std::to_string(delta) +
                                    " changes the trace by " + std::to_string(drift) +
                                    " at cutoff " + std::to_string(space.dim(mode)));
  }
  out *= in_trace / out_trace;
  return DensityMatrix(space, 0.5 * (out + out.adjoint()), rho.pre_norm_trace());
}

DensityMatrix photon_subtract(const DensityMatrix& rho, int mode, int count) {
  if (count < 1) fail(ErrorKind::invalid_argument, "photon_subtract needs count >= 1");
  const HilbertSpec& space = rho.space();
  const CMatrix k = matrix_power(annihilation(space.dim(mode)), count);
  const CMatrix out = conjugate_on_mode(rho.matrix(), space, mode, k);
  const double weight = out.trace().real();
  if (!(weight > 1e-14 * rho.trace())) {
    fail(ErrorKind::post_selection, "photon subtraction from a state with no population above " +
                                        std::to_string(count - 1) + " photons");
  }
  return DensityMatrix(space, out).normalized();
}

DensityMatrix photon_add(const DensityMatrix& rho, int mode, int count) {
  if (count < 0) fail(ErrorKind::invalid_argument, "photon_add needs count >= 0");
  if (count == 0) return rho.normalized();
  const HilbertSpec& space = rho.space();
  check_addition_leak(rho.photon_distribution(mode), count);
  const CMatrix k = matrix_power(annihilation(space.dim(mode)).adjoint(), count);
  return DensityMatrix(space, conjugate_on_mode(rho.matrix(), space, mode, k)).normalized();
}

DensityMatrix amplifier(const DensityMatrix& rho, int mode, const AmplifierConfig& cfg) {
  cfg.validate();
  if (cfg.is_identity()) return rho.with_pre_norm_trace(1.0);
  const HilbertSpec& space = rho.space();
  const DensityMatrix noisy = add_gaussian_noise(rho, mode, cfg.delta, cfg.quadrature);
  check_addition_leak(noisy.photon_distribution(mode), cfg.m_add);
  const CMatrix a = annihilation(space.dim(mode));
  const CMatrix kraus = matrix_power(a, cfg.n_sub) * matrix_power(a.adjoint(), cfg.m_add);
  const CMatrix out = conjugate_on_mode(noisy.matrix(), space, mode, kraus);
  const double weight = out.trace().real();
  if (!(weight > 1e-14 * noisy.trace())) {
    fail(ErrorKind::post_selection, "amplifier output has zero trace");
  }
  return DensityMatrix(space, out).normalized().with_pre_norm_trace(weight / noisy.trace());
}

LinearOperator ideal_gain_operator(int dim, double g) {
  if (dim < 2) fail(ErrorKind::invalid_argument, "invalid-dimension: gain operator needs dim >= 2");
  if (!(g > 0.0)) fail(ErrorKind::invalid_argument, "gain must be positive");
  const double top = std::pow(g, dim - 1);
  if (!std::isfinite(top) || top > 1e300) fail(ErrorKind::numerical, "gain operator overflows");
  CMatrix m = CMatrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) m(n, n) = std::pow(g, n);
  return LinearOperator(HilbertSpec::single(dim), std::move(m));
}

DensityMatrix apply_channel(const DensityMatrix& rho, int mode, const ChannelConfig& channel,
                            NoiseQuadrature nodes) {
  channel.validate();
  const DensityMatrix lossy = loss_channel(rho, mode, channel.eta);
  return add_gaussian_noise(lossy, mode, channel.added_noise_variance(), nodes);
}

DensityMatrix attach_ancilla_noise(const DensityMatrix& rho_ab, const AncillaNoiseModel& model, int mode) {
  const HilbertSpec& space = rho_ab.space();
  const int dim = space.dim(mode);
  constexpr int kn = AncillaNoiseModel::kComponents;
  std::vector<CMatrix> disp;
  for (int k = 0; k < kn; ++k) disp.push_back(displacement_operator(dim, model.betas[static_cast<std::size_t>(k)]).matrix());
  const auto n = static_cast<Eigen::Index>(space.total_dim());
  CMatrix out(n * kn, n * kn);
  for (int k = 0; k < kn; ++k) {
    for (int k2 = 0; k2 < kn; ++k2) {
      const double c = model.coefficients[static_cast<std::size_t>(k)] * model.coefficients[static_cast<std::size_t>(k2)];
      const CMatrix blk = c * sandwich_on_mode(rho_ab.matrix(), space, mode, disp[static_cast<std::size_t>(k)],
                                               disp[static_cast<std::size_t>(k2)]);
      // Ancilla is the last (fastest) index.
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) out(i * kn + k, j * kn + k2) = blk(i, j);
    }
  }
  HilbertSpec out_space = space.tensor(HilbertSpec::single(kn));
  const double tr = out.trace().real();
  const double loss = rho_ab.trace() - tr;
  if (loss > 1e-8 * rho_ab.trace()) {
    fail(ErrorKind::truncation, "ancilla displacement sqrt(Delta')=" + std::to_string(std::sqrt(model.delta_prime)) +
                                    " leaks " + std::to_string(loss) + " above cutoff " + std::to_string(dim));
  }
  out *= rho_ab.trace() / tr;
  return DensityMatrix(std::move(out_space), 0.5 * (out + out.adjoint()), rho_ab.pre_norm_trace());
}

CMatrix density_factor(const DensityMatrix& rho, double threshold) {
  const CMatrix h = 0.5 * (rho.matrix() + rho.matrix().adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) fail(ErrorKind::numerical, "eigendecomposition did not converge");
  const RVector& vals = solver.eigenvalues();
  const double cut = threshold * vals(vals.size() - 1);
  Eigen::Index first = 0;
  while (first < vals.size() && vals(first) <= cut) ++first;
  const Eigen::Index r = vals.size() - first;
  CMatrix w(h.rows(), r);
  for (Eigen::Index j = 0; j < r; ++j) w.col(j) = solver.eigenvectors().col(first + j) * std::sqrt(vals(first + j));
  return w;
}

AncillaBranches amplify_with_ancilla(const DensityMatrix& rho_ab, const AncillaNoiseModel& model,
                                     int m_add, int n_sub, int mode) {
  if (m_add < 0 || n_sub < 0) fail(ErrorKind::invalid_argument, "amplifier photon counts must be >= 0");
  const HilbertSpec& space = rho_ab.space();
  const int dim = space.dim(mode);
  const double in_trace = rho_ab.trace();
  const CMatrix w = density_factor(rho_ab);

  AncillaBranches out{space, {}, 1.0};
  double displaced_trace = 0.0;
  RVector photons = RVector::Zero(dim);
  const std::size_t after = space.dim_after(mode);
  for (int k = 0; k < AncillaNoiseModel::kComponents; ++k) {
    const CMatrix disp = displacement_operator(dim, model.betas[static_cast<std::size_t>(k)]).matrix();
    CMatrix v = model.coefficients[static_cast<std::size_t>(k)] * apply_on_mode(w, space, mode, disp);
    const RVector row_mass = v.rowwise().squaredNorm();
    for (Eigen::Index i = 0; i < row_mass.size(); ++i) {
      photons(static_cast<Eigen::Index>((static_cast<std::size_t>(i) / after) % static_cast<std::size_t>(dim))) += row_mass(i);
    }
    displaced_trace += row_mass.sum();
    out.branches.push_back(std::move(v));
  }
  if (in_trace - displaced_trace > 1e-8 * in_trace) {
    fail(ErrorKind::truncation, "ancilla displacement leaks " + std::to_string(in_trace - displaced_trace) +
                                    " above cutoff " + std::to_string(dim));
  }
  check_addition_leak(photons, m_add);

  const CMatrix a = annihilation(dim);
  const CMatrix kraus = matrix_power(a, n_sub) * matrix_power(a.adjoint(), m_add);
  double weight = 0.0;
  for (auto& b : out.branches) {
    b = apply_on_mode(b, space, mode, kraus);
    weight += b.squaredNorm();
  }
  if (!(weight > 1e-14 * displaced_trace)) fail(ErrorKind::post_selection, "amplifier output has zero trace");
  const double scale = 1.0 / std::sqrt(weight);
  for (auto& b : out.branches) b *= scale;
  out.pre_norm_trace = weight / displaced_trace;
  return out;
}

DensityMatrix AncillaBranches::traced_over_ancilla() const {
  const auto n = static_cast<Eigen::Index>(two_mode.total_dim());
  CMatrix rho = CMatrix::Zero(n, n);
  for (const auto& b : branches) rho.noalias() += b * b.adjoint();
  return DensityMatrix(two_mode, 0.5 * (rho + rho.adjoint()), pre_norm_trace);
}

DensityMatrix AncillaBranches::to_density() const {
  const auto n = static_cast<Eigen::Index>(two_mode.total_dim());
  const auto kn = static_cast<Eigen::Index>(branches.size());
  CMatrix out(n * kn, n * kn);
  for (Eigen::Index k = 0; k < kn; ++k) {
    for (Eigen::Index k2 = 0; k2 < kn; ++k2) {
      const CMatrix blk = branches[static_cast<std::size_t>(k)] * branches[static_cast<std::size_t>(k2)].adjoint();
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) out(i * kn + k, j * kn + k2) = blk(i, j);
    }
  }
  return DensityMatrix(two_mode.tensor(HilbertSpec::single(static_cast<int>(kn))), std::move(out), pre_norm_trace);
}

}  // namespace npamp
