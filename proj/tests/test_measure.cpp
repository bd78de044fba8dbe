#include <cmath>
#include <numbers>

#include <doctest.h>

#include "npamp/measure.hpp"

using namespace npamp;

namespace {

DensityMatrix thermal_state(int dim, double nbar) {
  CMatrix m = CMatrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) m(n, n) = std::pow(nbar, n) / std::pow(1 + nbar, n + 1);
  return DensityMatrix(HilbertSpec::single(dim), m / m.trace().real());
}

double g(double n) { return n <= 0.0 ? 0.0 : (n + 1) * std::log2(n + 1) - n * std::log2(n); }

struct Moments {
  double var_a = 0, var_b = 0, cov = 0;
};

// Second moments of the first coordinate of each party's outcome.
Moments grid_moments(const JointDistribution& jd) {
  Moments m;
  const double total = jd.masses.sum();
  for (Eigen::Index b = 0; b < jd.masses.cols(); ++b) {
    for (Eigen::Index a = 0; a < jd.masses.rows(); ++a) {
      const double p = jd.masses(a, b) / total;
      const double xa = jd.grid_a.x[static_cast<std::size_t>(a)];
      const double xb = jd.grid_b.x[static_cast<std::size_t>(b)];
      m.var_a += p * xa * xa;
      m.var_b += p * xb * xb;
      m.cov += p * xa * xb;
    }
  }
  return m;
}

double mi(const DensityMatrix& rho, MeasurementKind ka, MeasurementKind kb) {
  return mutual_information(joint_distribution(rho, adapted_grid(ka, rho, 0), adapted_grid(kb, rho, 1)));
}

constexpr auto hom = MeasurementKind::homodyne;
constexpr auto het = MeasurementKind::heterodyne;

}  // namespace

TEST_SUITE("measure") {

TEST_CASE("povm densities") {
  const LinearOperator h = povm_density(hom, 0.0, 0.0, 20);
  CHECK(std::abs(h.matrix()(0, 0).real() - 1.0 / std::sqrt(std::numbers::pi)) < 1e-14);
  CHECK(std::abs(h.matrix()(0, 0).real() - 0.5642) < 1e-4);

  const LinearOperator q = povm_density(het, 0.0, 0.0, 20);
  CHECK(std::abs(q.matrix()(0, 0).real() - 1.0 / (2 * std::numbers::pi)) < 1e-14);
  // Husimi function of the vacuum away from the origin.
  const LinearOperator q1 = povm_density(het, 1.0, -0.5, 30);
  CHECK(std::abs(q1.matrix()(0, 0).real() - std::exp(-(1.0 + 0.25) / 2) / (2 * std::numbers::pi)) < 1e-14);
}

TEST_CASE("grids are symmetric") {
  const MeasurementGrid h = MeasurementGrid::homodyne(5.0, 96);
  for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(h.x[i] + h.x[h.size() - 1 - i]) < 1e-14);
  const MeasurementGrid q = MeasurementGrid::heterodyne(5.0, 8);
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(std::abs(q.x[i] + q.x[q.size() - 1 - i]) < 1e-14);
    CHECK(std::abs(q.p[i] + q.p[q.size() - 1 - i]) < 1e-14);
  }
}

TEST_CASE("heterodyne resolution of the identity") {
  const MeasurementGrid grid = MeasurementGrid::heterodyne(6.0, 40);
  const CMatrix phi = povm_vectors(grid, 20);
  CMatrix sum = CMatrix::Zero(20, 20);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(j);
    sum += grid.weights[j] * phi.col(c) * phi.col(c).adjoint();
  }
  // Levels whose Husimi tail stays inside the window resolve the identity.
  CHECK((sum.topLeftCorner(7, 7) - CMatrix::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-3);
  CMatrix off = sum.topLeftCorner(10, 10);
  off.diagonal().setZero();
  CHECK(off.cwiseAbs().maxCoeff() < 1e-3);

  // Higher levels lose the mass outside [-6, 6]^2. Oracle: the exact window
  // integral of |<n|alpha>|^2 / (2 pi), expanded binomially into 1-D
  // moments m_k = int x^{2k} e^{-x^2/2} dx evaluated by fine Simpson.
  auto moment = [](int k) {
    const int n = 4000;
    const double h = 12.0 / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = -6.0 + i * h;
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * std::pow(x, 2 * k) * std::exp(-x * x / 2);
    }
    return acc * h / 3;
  };
  for (int n = 0; n < 10; ++n) {
    double window = 0.0;
    for (int k = 0; k <= n; ++k) {
      window += std::tgamma(n + 1) / (std::tgamma(k + 1) * std::tgamma(n - k + 1)) * moment(k) * moment(n - k);
    }
    window /= std::pow(2.0, n) * std::tgamma(n + 1) * 2 * std::numbers::pi;
    CHECK(std::abs(sum(n, n).real() - window) < 1e-3);
  }
}

TEST_CASE("product states factorize") {
  const DensityMatrix rho = tensor(thermal_state(12, 0.3), DensityMatrix::pure(coherent_ket(12, Complex(0.3, 0.2))));
  for (auto [ka, kb] : {std::pair{hom, hom}, std::pair{het, hom}, std::pair{het, het}}) {
    const JointDistribution jd = joint_distribution(rho, adapted_grid(ka, rho, 0), adapted_grid(kb, rho, 1));
    const Eigen::MatrixXd p = jd.masses / jd.masses.sum();
    const Eigen::VectorXd pa = p.rowwise().sum();
    const Eigen::VectorXd pb = p.colwise().sum().transpose();
    CHECK((p - pa * pb.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(mutual_information(jd)) < 1e-10);
  }
}

TEST_CASE("tmsv joint moments") {
  const DensityMatrix rho = tmsv_fock({0.3}, 20);
  const double v = std::cosh(0.6) / 2, c = std::sinh(0.6) / 2;

  const Moments hh = grid_moments(joint_distribution(rho, adapted_grid(hom, rho, 0), adapted_grid(hom, rho, 1)));
  CHECK(std::abs(hh.var_a - v) < 1e-3);
  CHECK(std::abs(hh.cov / std::sqrt(hh.var_a * hh.var_b) - std::tanh(0.6)) < 1e-3);
  CHECK(std::abs(std::tanh(0.6) - 0.53705) < 1e-5);

  const Moments qq = grid_moments(joint_distribution(rho, adapted_grid(het, rho, 0), adapted_grid(het, rho, 1)));
  CHECK(std::abs(qq.var_a - (std::cosh(0.6) + 1) / 2) < 1e-3);
  CHECK(std::abs(qq.var_b - (std::cosh(0.6) + 1) / 2) < 1e-3);
  CHECK(std::abs(qq.cov - c) < 1e-3);
}

TEST_CASE("mutual information against the gaussian closed form") {
  const DensityMatrix rho = tmsv_fock({0.3}, 20);
  const CovarianceMatrix v = tmsv_covariance({0.3});
  const double hh = mi(rho, hom, hom);
  CHECK(std::abs(hh - 0.2455) < 1e-3);
  CHECK(std::abs(hh - gaussian_mutual_information(v, false, false)) < 1e-3);
  const double qq = mi(rho, het, het);
  CHECK(qq < hh);
  CHECK(std::abs(qq - gaussian_mutual_information(v, true, true)) < 1e-3);
  CHECK(std::abs(mi(rho, hom, het) - gaussian_mutual_information(v, false, true)) < 1e-3);

  const DensityMatrix lossy = apply_channel(rho, 1, {0.9, 0.1});
  const CovarianceMatrix vl = channel_covariance(v, {0.9, 0.1});
  CHECK(std::abs(mi(lossy, het, hom) - gaussian_mutual_information(vl, true, false)) < 1e-3);
}

TEST_CASE("mass deficit is detected") {
  const DensityMatrix rho = tmsv_fock({0.3}, 20);
  CHECK_THROWS_AS(joint_distribution(rho, MeasurementGrid::homodyne(0.5, 20), MeasurementGrid::homodyne(6.0, 96)),
                  Error);
  try {
    joint_distribution(rho, MeasurementGrid::homodyne(0.5, 20), MeasurementGrid::homodyne(6.0, 96));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::mass_deficit);
  }
}

TEST_CASE("von neumann entropy") {
  CHECK(std::abs(von_neumann_entropy(tmsv_fock({0.3}, 20))) < 1e-9);
  CHECK(std::abs(von_neumann_entropy(thermal_state(80, 0.2)) - g(0.2)) < 1e-10);
  const int keep_a[] = {0};
  const DensityMatrix reduced = partial_trace(tmsv_fock({0.3}, 30), keep_a);
  CHECK(std::abs(von_neumann_entropy(reduced) - g(std::pow(std::sinh(0.3), 2))) < 1e-9);
  RVector tiny(3);
  tiny << 1.0, 1e-15, -1e-15;
  CHECK(entropy_bits(tiny) == 0.0);
}

TEST_CASE("conditional ensembles") {
  const DensityMatrix th = thermal_state(10, 0.3);
  const DensityMatrix prod = tensor(th, DensityMatrix::pure(coherent_ket(10, 0.4)));
  const ConditionalEnsemble ens = conditional_ensemble(prod, 1, adapted_grid(hom, prod, 1));
  double worst = 0.0;
  for (const DensityMatrix& s : ens.states) worst = std::max(worst, (s.matrix() - th.matrix()).cwiseAbs().maxCoeff());
  CHECK(worst < 1e-10);
  CHECK(std::abs(ens.captured_mass - 1.0) < 1e-3);

  const DensityMatrix rho = tmsv_fock({0.3}, 20);
  const ConditionalEnsemble cond = conditional_ensemble(rho, 1, adapted_grid(hom, rho, 1));
  CMatrix avg = CMatrix::Zero(20, 20);
  double min_purity = 1.0;
  for (std::size_t i = 0; i < cond.states.size(); ++i) {
    avg += cond.probabilities[i] * cond.states[i].matrix();
    min_purity = std::min(min_purity, cond.states[i].purity());
    CHECK(cond.states[i].hermiticity_defect() < 1e-12);
  }
  CHECK(min_purity > 1 - 1e-6);
  const int keep_a[] = {0};
  CHECK((avg - partial_trace(rho, keep_a).matrix()).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(std::abs(cond.mean_entropy()) < 1e-6);
}

TEST_CASE("holevo quantities vanish on pure states") {
  const DensityMatrix rho = tmsv_fock({0.3}, 20);
  for (auto kind : {hom, het}) {
    CHECK(std::abs(holevo_direct(rho, adapted_grid(kind, rho, 1))) < 2e-3);
    CHECK(std::abs(holevo_reverse(rho, adapted_grid(kind, rho, 0))) < 2e-3);
  }
}

TEST_CASE("holevo on a product of thermal states") {
  const DensityMatrix ta = thermal_state(30, 0.2), tb = thermal_state(30, 0.4);
  const DensityMatrix prod = tensor(ta, tb);
  const double s_ab = von_neumann_entropy(prod);
  CHECK(std::abs(s_ab - g(0.2) - g(0.4)) < 1e-9);
  CHECK(std::abs(holevo_direct(prod, adapted_grid(hom, prod, 1)) - (s_ab - von_neumann_entropy(ta))) < 1e-6);
  CHECK(std::abs(holevo_reverse(prod, adapted_grid(het, prod, 0)) - (s_ab - von_neumann_entropy(tb))) < 1e-6);
}

TEST_CASE("holevo on noisy and lossy channels") {
  const DensityMatrix rho = tmsv_fock({0.3}, 20);
  const DensityMatrix lossy = apply_channel(rho, 1, {0.9, 0.1});
  const double hd = holevo_direct(lossy, adapted_grid(hom, lossy, 1));
  const double hr = holevo_reverse(lossy, adapted_grid(hom, lossy, 0));
  CHECK(hd > 2e-3);
  CHECK(hr > 2e-3);
  CHECK(std::abs(hd - hr) > 1e-3);

  // Same channel on both arms: the two reconciliations coincide.
  const DensityMatrix sym = apply_channel(apply_channel(rho, 0, {1.0, 0.1}), 1, {1.0, 0.1});
  for (auto kind : {hom, het}) {
    const double d = holevo_direct(sym, adapted_grid(kind, sym, 1));
    const double r = holevo_reverse(sym, adapted_grid(kind, sym, 0));
    CHECK(d > 0.0);
    CHECK(std::abs(d - r) < 1e-3);
  }
}

TEST_CASE("factored and dense ancilla holevo agree") {
  const DensityMatrix rho = apply_channel(tmsv_fock({0.3}, 12), 1, {0.9, 0.1});
  const AncillaNoiseModel model = AncillaNoiseModel::make(0.1);
  const AncillaBranches branches = amplify_with_ancilla(rho, model, 0, 2);
  const DensityMatrix dense = branches.to_density();
  CHECK(std::abs(von_neumann_entropy(branches) - von_neumann_entropy(dense)) < 1e-9);

  const DensityMatrix ab = branches.traced_over_ancilla();
  const MeasurementGrid gb = adapted_grid(het, ab, 1);
  const MeasurementGrid ga = adapted_grid(hom, ab, 0);
  CHECK(std::abs(holevo_direct(branches, gb) - holevo_direct(dense, gb)) < 1e-8);
  CHECK(std::abs(holevo_reverse(branches, ga) - holevo_reverse(dense, ga)) < 1e-8);

  // Bob's direct-reconciliation outcome includes the ancilla register.
  const ConditionalEnsemble ens = conditional_ensemble(dense, 1, gb, 2);
  CHECK(std::abs(von_neumann_entropy(dense) - ens.mean_entropy() - holevo_direct(dense, gb)) < 1e-8);
}

TEST_CASE("data processing under the noise step") {
  const DensityMatrix rho = tmsv_fock({0.3}, 20);
  for (auto [ka, kb] : {std::pair{hom, hom}, std::pair{het, het}}) {
    const double before = mi(rho, ka, kb);
    double prev = before;
    for (double delta : {0.1, 0.3}) {
      const double after = mi(add_gaussian_noise(rho, 1, delta), ka, kb);
      CHECK(after <= prev + 1e-10);
      CHECK(after >= -1e-10);
      prev = after;
    }
  }
}

TEST_CASE("renormalization consistency") {
  const DensityMatrix rho = tmsv_fock({0.3}, 20);
  const DensityMatrix amp = amplifier(rho, 1, AmplifierConfig::noise_powered(0.2, 1));
  const DensityMatrix raw(amp.space(), amp.matrix() * amp.pre_norm_trace());
  const MeasurementGrid ga = adapted_grid(hom, amp, 0), gb = adapted_grid(hom, amp, 1);
  const double a = mutual_information(joint_distribution(amp, ga, gb));
  const double b = mutual_information(joint_distribution(raw, ga, gb));
  CHECK(std::abs(a - b) < 1e-10);
}

}  // TEST_SUITE
