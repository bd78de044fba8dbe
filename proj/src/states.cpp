#include "npamp/states.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace npamp {

void TmsvParams::validate() const {
  if (!(squeezing >= 0.0) || squeezing > 1.0) {
    fail(ErrorKind::invalid_argument,
         "squeezing R=" + std::to_string(squeezing) + " outside [0, 1]");
  }
}

void ChannelConfig::validate() const {
  if (!(eta > 0.0) || eta > 1.0) {
    fail(ErrorKind::invalid_argument, "channel eta=" + std::to_string(eta) + " outside (0, 1]");
  }
  if (!(n_t >= 0.0) || !std::isfinite(n_t)) {
    fail(ErrorKind::invalid_argument, "channel n_t=" + std::to_string(n_t) + " must be >= 0");
  }
}

double CovarianceMatrix::uncertainty_margin() const {
  Eigen::Matrix4cd m = v.cast<Complex>();
  const Complex half_i(0.0, 0.5);
  for (int mode = 0; mode < 2; ++mode) {
    m(2 * mode, 2 * mode + 1) += half_i;
    m(2 * mode + 1, 2 * mode) -= half_i;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

CovarianceMatrix tmsv_covariance(const TmsvParams& params) {
  params.validate();
  const double c = 0.5 * std::cosh(2.0 * params.squeezing);
  const double s = 0.5 * std::sinh(2.0 * params.squeezing);
  CovarianceMatrix cm;
  cm.v << c, 0, s, 0,
          0, c, 0, -s,
          s, 0, c, 0,
          0, -s, 0, c;
  return cm;
}

DensityMatrix tmsv_fock(const TmsvParams& params, int dim) {
  params.validate();
  if (dim < 2) fail(ErrorKind::invalid_argument, "invalid-dimension: TMSV cutoff must be >= 2");
  const double lambda = std::tanh(params.squeezing);
  const double tail = std::pow(lambda, 2.0 * dim);
  if (tail > 1e-4) {
    fail(ErrorKind::truncation, "TMSV R=" + std::to_string(params.squeezing) +
                                    " loses mass " + std::to_string(tail) + " above cutoff " +
                                    std::to_string(dim));
  }
  HilbertSpec space({dim, dim});
  CVector psi = CVector::Zero(static_cast<Eigen::Index>(space.total_dim()));
  double amp = 1.0;
  for (int n = 0; n < dim; ++n) {
    psi(n * dim + n) = amp;
    amp *= lambda;
  }
  const double norm2 = psi.squaredNorm();
  psi /= std::sqrt(norm2);
  // Captured mass relative to the exact state with amplitude prefactor 1/cosh R.
  const double captured = norm2 * (1.0 - lambda * lambda);
  return DensityMatrix(space, psi * psi.adjoint(), captured);
}

CovarianceMatrix channel_covariance(const CovarianceMatrix& v, const ChannelConfig& channel) {
  channel.validate();
  const double t = std::sqrt(channel.eta);
  CovarianceMatrix out = v;
  // Xi = diag(1, 1, sqrt(eta), sqrt(eta)) acts on both sides.
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double fi = i >= 2 ? t : 1.0;
      const double fj = j >= 2 ? t : 1.0;
      out.v(i, j) = fi * fj * v.v(i, j);
    }
  }
  const double additive = 0.5 * (1.0 - channel.eta) + channel.added_noise_variance();
  out.v(2, 2) += additive;
  out.v(3, 3) += additive;
  return out;
}

double gaussian_mutual_information(const CovarianceMatrix& v, bool heterodyne_a, bool heterodyne_b) {
  std::vector<int> idx_a = heterodyne_a ? std::vector<int>{0, 1} : std::vector<int>{0};
  std::vector<int> idx_b = heterodyne_b ? std::vector<int>{2, 3} : std::vector<int>{2};
  std::vector<int> all = idx_a;
  all.insert(all.end(), idx_b.begin(), idx_b.end());
  auto block = [&](const std::vector<int>& idx) {
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        s(i, j) = v.v(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
      }
      const int q = idx[static_cast<std::size_t>(i)];
      const bool het = q < 2 ? heterodyne_a : heterodyne_b;
      if (het) s(i, i) += 0.5;
    }
    return s.determinant();
  };
  return 0.5 * std::log2(block(idx_a) * block(idx_b) / block(all));
}

double gaussian_homhom_mi(const CovarianceMatrix& v) {
  const double c = v.v(0, 2) / std::sqrt(v.v(0, 0) * v.v(2, 2));
  return -0.5 * std::log2(1.0 - c * c);
}

double bosonic_entropy(double n) {
  if (n <= 0.0) return 0.0;
  return (n + 1.0) * std::log2(n + 1.0) - n * std::log2(n);
}

CovarianceMatrix covariance_from_fock(const DensityMatrix& rho) {
  const HilbertSpec& space = rho.space();
  if (space.num_modes() != 2) fail(ErrorKind::invalid_argument, "covariance_from_fock needs two modes");
  std::vector<CMatrix> quad;  // x_A, p_A, x_B, p_B as single-mode matrices
  for (int mode = 0; mode < 2; ++mode) {
    const CMatrix a = ladder_operator(LadderKind::annihilate, space.dim(mode)).matrix();
    quad.push_back((a + a.adjoint()) / std::sqrt(2.0));
    quad.push_back((a - a.adjoint()) / Complex(0.0, std::sqrt(2.0)));
  }
  const CMatrix& m = rho.matrix();
  const double tr = rho.trace();
  Eigen::Vector4d mean;
  for (int i = 0; i < 4; ++i) mean(i) = rho.expectation(i / 2, quad[static_cast<std::size_t>(i)]).real() / tr;
  CovarianceMatrix cm;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      const auto& qi = quad[static_cast<std::size_t>(i)];
      const auto& qj = quad[static_cast<std::size_t>(j)];
      double sym;
      if (i / 2 == j / 2) {
        const CMatrix anti = qi * qj + qj * qi;
        sym = 0.5 * rho.expectation(i / 2, anti).real();
      } else {
        const CMatrix tmp = apply_on_mode(apply_on_mode(m, space, 1, qj), space, 0, qi);
        sym = tmp.trace().real();
      }
      cm.v(i, j) = cm.v(j, i) = sym / tr - mean(i) * mean(j);
    }
  }
  return cm;
}

}  // namespace npamp
