#pragma once

#include <array>
#include <vector>

#include "npamp/fock.hpp"
#include "npamp/states.hpp"

namespace npamp {

// Quadrature used for the Gaussian displacement average: Gauss–Laguerre in
// |alpha|^2 / Delta times a uniform rule in the phase.
struct NoiseQuadrature {
  int radial_nodes = 12;
  int angular_nodes = 16;
};

// Noise addition (Delta) -> M photon additions -> N photon subtractions.
struct AmplifierConfig {
  double delta = 0.0;
  int m_add = 0;
  int n_sub = 0;
  NoiseQuadrature quadrature;

  static AmplifierConfig high_fidelity(double delta = 0.0) { return {delta, 1, 1, {}}; }
  static AmplifierConfig noise_powered(double delta, int subtractions) { return {delta, 0, subtractions, {}}; }

  void validate() const;
  bool is_identity() const { return delta == 0.0 && m_add == 0 && n_sub == 0; }
};

// Discrete nine-component noise source: |nu> = sum_k c_k |k>, with
// beta_0 = 0 and beta_k = sqrt(Delta') e^{i 2 pi k / 8} for k = 1..8.
struct AncillaNoiseModel {
  static constexpr int kComponents = 9;

  double delta_prime = 0.0;
  std::array<Complex, kComponents> betas{};
  std::array<double, kComponents> coefficients{};  // normalized c_k

  static AncillaNoiseModel make(double delta_prime);

  // Mixture weights p_k = c_k^2.
  double weight(int k) const { return coefficients[static_cast<std::size_t>(k)] * coefficients[static_cast<std::size_t>(k)]; }
  double mean_added_photons() const;
};

DensityMatrix loss_channel(const DensityMatrix& rho, int mode, double eta);

DensityMatrix add_gaussian_noise(const DensityMatrix& rho, int mode, double delta,
                                 NoiseQuadrature nodes = {});

// a^N rho a^dag^N, normalized; pre_norm_trace holds the success weight.
DensityMatrix photon_subtract(const DensityMatrix& rho, int mode, int count);

// a^dag^M rho a^M, normalized; pre_norm_trace holds the success weight.
DensityMatrix photon_add(const DensityMatrix& rho, int mode, int count);

// pre_norm_trace = Tr[A(rho)] for the unnormalized amplifier map A.
DensityMatrix amplifier(const DensityMatrix& rho, int mode, const AmplifierConfig& cfg);

// G = g^n. Not a physical operation; only used as a reference.
LinearOperator ideal_gain_operator(int dim, double g);

// Loss eta followed by the Gaussian noise the convention prescribes.
DensityMatrix apply_channel(const DensityMatrix& rho, int mode, const ChannelConfig& channel,
                            NoiseQuadrature nodes = {});

// rho_AB (x) |nu><nu| conjugated by sum_k D(beta_k) (x) |k><k| acting on
// (B, nu). The result has modes (A, B, nu). Dense; meant for small cutoffs.
DensityMatrix attach_ancilla_noise(const DensityMatrix& rho_ab, const AncillaNoiseModel& model,
                                   int mode = 1);

// Ancilla-augmented state after amplification, kept in factored form:
//   rho_{AB nu} = sum_{k,k'} U_k U_k'^dag (x) |k><k'|
// with U_k = c_k K D(beta_k) W, rho_AB = W W^dag and K the amplifier's
// Kraus operator on B. The branches are normalized so the state has unit
// trace; pre_norm_trace is the amplifier success weight.
struct AncillaBranches {
  HilbertSpec two_mode;
  std::vector<CMatrix> branches;
  double pre_norm_trace = 1.0;

  int rank() const { return branches.empty() ? 0 : static_cast<int>(branches.front().cols()); }

  // Tr_nu: the two-mode state used for Alice–Bob mutual information.
  DensityMatrix traced_over_ancilla() const;

  // Unnormalized two-mode block for ancilla outcome k (U_k U_k^dag).
  CMatrix block(int k) const { return branches[static_cast<std::size_t>(k)] * branches[static_cast<std::size_t>(k)].adjoint(); }

  // Dense (A, B, nu) density matrix.
  DensityMatrix to_density() const;
};

// Factor used by AncillaBranches: columns sqrt(lambda_i) |psi_i> for the
// eigenpairs of rho with lambda_i > threshold * max lambda.
CMatrix density_factor(const DensityMatrix& rho, double threshold = 1e-12);

AncillaBranches amplify_with_ancilla(const DensityMatrix& rho_ab, const AncillaNoiseModel& model,
                                     int m_add, int n_sub, int mode = 1);

}  // namespace npamp
