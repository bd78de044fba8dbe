#pragma once

#include <Eigen/Dense>

#include "npamp/fock.hpp"

namespace npamp {

struct TmsvParams {
  double squeezing = 0.3;  // R

  // Throws unless 0 <= R <= 1.
  void validate() const;
};

// Second moments ordered (x_A, p_A, x_B, p_B), vacuum variance 1/2.
struct CovarianceMatrix {
  Eigen::Matrix4d v = 0.5 * Eigen::Matrix4d::Identity();

  double operator()(int i, int j) const { return v(i, j); }

  // Smallest eigenvalue of V + (i/2) Omega.
  double uncertainty_margin() const;
  bool is_bona_fide(double tol = 1e-10) const { return uncertainty_margin() >= -tol; }
};

// How the scalar N_T of a noisy lossy channel turns into added quadrature
// variance on mode B:
//   excess  : V_B -> eta V_B + (1 - eta)/2 + N_T        (N_T survives eta = 1)
//   thermal : V_B -> eta V_B + (1 - eta)(1/2 + N_T)     (N_T = environment mean photon number)
// Both the covariance and the Fock channels go through added_noise_variance(),
// so they always agree.
enum class NoiseConvention { excess, thermal };

struct ChannelConfig {
  double eta = 1.0;
  double n_t = 0.0;
  NoiseConvention convention = NoiseConvention::excess;

  void validate() const;

  // Per-quadrature variance added on top of the pure-loss output.
  double added_noise_variance() const {
    return convention == NoiseConvention::thermal ? (1.0 - eta) * n_t : n_t;
  }
  bool is_ideal() const { return eta == 1.0 && added_noise_variance() == 0.0; }
};

CovarianceMatrix tmsv_covariance(const TmsvParams& params);

// Schmidt form sum_n lambda^n |n,n>, lambda = tanh R, normalized over the
// truncated space. pre_norm_trace holds the captured mass 1 - lambda^{2 dim}.
DensityMatrix tmsv_fock(const TmsvParams& params, int dim);

CovarianceMatrix channel_covariance(const CovarianceMatrix& v, const ChannelConfig& channel);

// Closed-form hom-hom mutual information (bits) of a zero-mean Gaussian state.
double gaussian_homhom_mi(const CovarianceMatrix& v);

// Closed-form mutual information (bits) for any homodyne(x)/heterodyne pair.
// Heterodyne adds 1/2 to each measured quadrature variance.
double gaussian_mutual_information(const CovarianceMatrix& v, bool heterodyne_a, bool heterodyne_b);

// Bosonic entropy g(n) = (n+1) log2(n+1) - n log2 n.
double bosonic_entropy(double mean_photons);

// Second moments of a two-mode Fock state, same ordering as CovarianceMatrix.
CovarianceMatrix covariance_from_fock(const DensityMatrix& rho);

}  // namespace npamp
