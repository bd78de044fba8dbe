#include "npamp/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "npamp/quadrature.hpp"

namespace npamp {

const char* to_string(MeasurementKind kind) {
  return kind == MeasurementKind::homodyne ? "homodyne" : "heterodyne";
}

MeasurementGrid MeasurementGrid::homodyne(double half_width, int points) {
  const QuadratureRule rule = trapezoid(-half_width, half_width, points);
  return {MeasurementKind::homodyne, rule.nodes, {}, rule.weights};
}

MeasurementGrid MeasurementGrid::heterodyne(double half_width, int points_per_axis) {
  const QuadratureRule rule = trapezoid(-half_width, half_width, points_per_axis);
  MeasurementGrid grid{MeasurementKind::heterodyne, {}, {}, {}};
  const std::size_t n = rule.nodes.size();
  grid.x.reserve(n * n);
  grid.p.reserve(n * n);
  grid.weights.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      grid.x.push_back(rule.nodes[i]);
      grid.p.push_back(rule.nodes[j]);
      grid.weights.push_back(rule.weights[i] * rule.weights[j]);
    }
  }
  return grid;
}

MeasurementGrid adapted_grid(MeasurementKind kind, const DensityMatrix& rho, int mode,
                             const GridResolution& resolution) {
  const int mode_arr[] = {mode};
  const DensityMatrix reduced = partial_trace(rho, mode_arr).normalized();
  const int dim = reduced.space().dim(0);
  const CMatrix a = ladder_operator(LadderKind::annihilate, dim).matrix();
  const CMatrix x = (a + a.adjoint()) / std::sqrt(2.0);
  const CMatrix p = (a - a.adjoint()) / Complex(0.0, std::sqrt(2.0));
  const CMatrix& m = reduced.matrix();
  const double mx = (m * x).trace().real();
  const double mp = (m * p).trace().real();
  const double vx = (m * x * x).trace().real() - mx * mx;
  const double vp = (m * p * p).trace().real() - mp * mp;
  double var = std::max(vx, vp);
  if (kind == MeasurementKind::heterodyne) var += 0.5;
  const double half_width = resolution.span_sigmas * std::sqrt(var) + std::max(std::abs(mx), std::abs(mp));
  return kind == MeasurementKind::homodyne
             ? MeasurementGrid::homodyne(half_width, resolution.homodyne_points)
             : MeasurementGrid::heterodyne(half_width, resolution.heterodyne_points);
}

CMatrix povm_vectors(const MeasurementGrid& grid, int dim) {
  CMatrix phi(dim, static_cast<Eigen::Index>(grid.size()));
  const double het_norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    if (grid.kind == MeasurementKind::homodyne) {
      phi.col(col) = hermite_functions(dim, grid.x[j]).cast<Complex>();
    } else {
      const Complex alpha = Complex(grid.x[j], grid.p[j]) / std::sqrt(2.0);
      phi.col(col) = het_norm * coherent_amplitudes(dim, alpha);
    }
  }
  return phi;
}

LinearOperator povm_density(MeasurementKind kind, double x, double p, int dim) {
  MeasurementGrid g{kind, {x}, {}, {1.0}};
  if (kind == MeasurementKind::heterodyne) g.p = {p};
  const CMatrix phi = povm_vectors(g, dim);
  return LinearOperator(HilbertSpec::single(dim), phi * phi.adjoint());
}

namespace {

// P(mu + d mu', j) = conj(phi_j[mu]) phi_j[mu'], so that
// sum_{mu,mu'} P(mu + d mu', j) X(mu, mu') = phi_j^dag X phi_j.
CMatrix pair_products(const CMatrix& phi) {
  const Eigen::Index d = phi.rows();
  CMatrix out(d * d, phi.cols());
  for (Eigen::Index j = 0; j < phi.cols(); ++j)
    for (Eigen::Index m2 = 0; m2 < d; ++m2)
      for (Eigen::Index m1 = 0; m1 < d; ++m1) out(m1 + d * m2, j) = std::conj(phi(m1, j)) * phi(m2, j);
  return out;
}

// Index bookkeeping for splitting a multimode space into
// (kept modes, measured mode, optional register mode).
struct Split {
  std::vector<int> kept_modes;
  Eigen::Index kept_dim = 1;
  Eigen::Index measured_dim = 1;
  int register_dim = 1;
  std::vector<Eigen::Index> kept, measured;
  std::vector<int> reg;
};

Split make_split(const HilbertSpec& space, int measured_mode, std::optional<int> register_mode) {
  if (measured_mode < 0 || measured_mode >= space.num_modes()) {
    fail(ErrorKind::invalid_argument, "measured mode out of range");
  }
  if (register_mode && (*register_mode < 0 || *register_mode >= space.num_modes() || *register_mode == measured_mode)) {
    fail(ErrorKind::invalid_argument, "register mode out of range");
  }
  Split s;
  for (int m = 0; m < space.num_modes(); ++m) {
    if (m == measured_mode || (register_mode && m == *register_mode)) continue;
    s.kept_modes.push_back(m);
    s.kept_dim *= space.dim(m);
  }
  if (s.kept_modes.empty()) fail(ErrorKind::invalid_argument, "conditional ensemble needs a kept mode");
  s.measured_dim = space.dim(measured_mode);
  if (register_mode) s.register_dim = space.dim(*register_mode);
  const std::size_t n = space.total_dim();
  s.kept.resize(n);
  s.measured.resize(n);
  s.reg.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto occ = space.occupation(i);
    Eigen::Index k = 0;
    for (int m : s.kept_modes) k = k * space.dim(m) + occ[static_cast<std::size_t>(m)];
    s.kept[i] = k;
    s.measured[i] = occ[static_cast<std::size_t>(measured_mode)];
    if (register_mode) s.reg[i] = occ[static_cast<std::size_t>(*register_mode)];
  }
  return s;
}

// R(kappa + dK kappa', mu + dM mu') = rho[(kappa, mu, k), (kappa', mu', k)].
CMatrix regroup(const CMatrix& rho, const Split& s, int register_value) {
  CMatrix r = CMatrix::Zero(s.kept_dim * s.kept_dim, s.measured_dim * s.measured_dim);
  const auto n = static_cast<std::size_t>(rho.rows());
  for (std::size_t c = 0; c < n; ++c) {
    if (s.reg[c] != register_value) continue;
    for (std::size_t rr = 0; rr < n; ++rr) {
      if (s.reg[rr] != register_value) continue;
      r(s.kept[rr] + s.kept_dim * s.kept[c], s.measured[rr] + s.measured_dim * s.measured[c]) =
          rho(static_cast<Eigen::Index>(rr), static_cast<Eigen::Index>(c));
    }
  }
  return r;
}

constexpr Eigen::Index kColumnChunk = 512;

// Calls visit(grid_index, unnormalized conditional matrix) for every outcome.
template <typename Visit>
void for_each_conditional(const CMatrix& regrouped, Eigen::Index kept_dim, const CMatrix& pairs, Visit&& visit) {
  for (Eigen::Index start = 0; start < pairs.cols(); start += kColumnChunk) {
    const Eigen::Index len = std::min(kColumnChunk, pairs.cols() - start);
    const CMatrix cols = regrouped * pairs.middleCols(start, len);
    for (Eigen::Index j = 0; j < len; ++j) {
      Eigen::Map<const CMatrix> m(cols.col(j).data(), kept_dim, kept_dim);
      visit(static_cast<std::size_t>(start + j), m);
    }
  }
}

double hermitian_entropy_of(const CMatrix& m, double trace) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(0.5 * (m + m.adjoint()) / trace, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorKind::numerical, "eigendecomposition did not converge");
  return entropy_bits(solver.eigenvalues());
}

struct EntropyAverage {
  double weighted = 0.0;
  double mass = 0.0;
  std::size_t dropped = 0;

  void add(double p, double s) {
    weighted += p * s;
    mass += p;
  }
  double mean() const { return mass > 0.0 ? weighted / mass : 0.0; }
};

void check_captured(double mass, const char* what) {
  if (!(mass >= 1.0 - 1e-3) || mass > 1.0 + 1e-3) {
    fail(ErrorKind::mass_deficit, std::string(what) + ": measurement grid captures probability " +
                                      std::to_string(mass) + " (outside 1 +- 1e-3)");
  }
}

EntropyAverage dense_conditional_entropy(const DensityMatrix& rho, int measured_mode,
                                         const MeasurementGrid& grid, std::optional<int> register_mode) {
  const Split s = make_split(rho.space(), measured_mode, register_mode);
  const CMatrix pairs = pair_products(povm_vectors(grid, static_cast<int>(s.measured_dim)));
  const double total = rho.trace();
  EntropyAverage avg;
  for (int k = 0; k < s.register_dim; ++k) {
    const CMatrix r = regroup(rho.matrix(), s, k);
    for_each_conditional(r, s.kept_dim, pairs, [&](std::size_t j, const auto& m) {
      const double tr = m.trace().real();
      const double p = tr * grid.weights[j] / total;
      if (!(tr > 1e-300) || p <= 0.0) {
        ++avg.dropped;
        return;
      }
      avg.add(p, hermitian_entropy_of(m, tr));
    });
  }
  return avg;
}

}  // namespace

JointDistribution joint_distribution(const DensityMatrix& rho, const MeasurementGrid& grid_a,
                                     const MeasurementGrid& grid_b) {
  const HilbertSpec& space = rho.space();
  if (space.num_modes() != 2) fail(ErrorKind::invalid_argument, "joint_distribution needs a two-mode state");
  const Eigen::Index da = space.dim(0);
  const Eigen::Index db = space.dim(1);
  const CMatrix phi_a = povm_vectors(grid_a, static_cast<int>(da));
  const CMatrix pairs_b = pair_products(povm_vectors(grid_b, static_cast<int>(db)));
  const auto na = static_cast<Eigen::Index>(grid_a.size());

  // Hermiticity pairs (kappa, kappa') with (kappa', kappa): only kappa <= kappa'
  // is formed, and Re[z C] is split into real products. Diagonal pairs take
  // one real column, off-diagonal pairs two (real and imaginary parts).
  struct Pair {
    Eigen::Index k1, k2, col;
  };
  std::vector<Pair> pairs;
  Eigen::Index cols = 0;
  for (Eigen::Index k2 = 0; k2 < da; ++k2) {
    for (Eigen::Index k1 = 0; k1 <= k2; ++k1) {
      pairs.push_back({k1, k2, cols});
      cols += k1 == k2 ? 1 : 2;
    }
  }
  const auto npairs = static_cast<Eigen::Index>(pairs.size());
  CMatrix blocks(npairs, db * db);
  for (Eigen::Index q = 0; q < npairs; ++q) {
    const Pair& pr = pairs[static_cast<std::size_t>(q)];
    for (Eigen::Index m2 = 0; m2 < db; ++m2)
      for (Eigen::Index m1 = 0; m1 < db; ++m1) blocks(q, m1 + db * m2) = rho.matrix()(pr.k1 * db + m1, pr.k2 * db + m2);
  }
  Eigen::MatrixXd left(na, cols);
  for (Eigen::Index a = 0; a < na; ++a) {
    for (const Pair& pr : pairs) {
      const Complex z = std::conj(phi_a(pr.k1, a)) * phi_a(pr.k2, a);
      if (pr.k1 == pr.k2) {
        left(a, pr.col) = z.real();
      } else {
        left(a, pr.col) = 2.0 * z.real();
        left(a, pr.col + 1) = -2.0 * z.imag();
      }
    }
  }

  Eigen::MatrixXd masses(na, pairs_b.cols());
  Eigen::MatrixXd right(cols, kColumnChunk);
  for (Eigen::Index start = 0; start < pairs_b.cols(); start += kColumnChunk) {
    const Eigen::Index len = std::min(kColumnChunk, pairs_b.cols() - start);
    const CMatrix cond = blocks * pairs_b.middleCols(start, len);  // Bob-conditioned Alice operators
    for (Eigen::Index j = 0; j < len; ++j) {
      for (Eigen::Index q = 0; q < npairs; ++q) {
        const Pair& pr = pairs[static_cast<std::size_t>(q)];
        right(pr.col, j) = cond(q, j).real();
        if (pr.k1 != pr.k2) right(pr.col + 1, j) = cond(q, j).imag();
      }
    }
    masses.middleCols(start, len).noalias() = left * right.leftCols(len);
  }
  const double total = rho.trace();
  for (Eigen::Index b = 0; b < masses.cols(); ++b) {
    for (Eigen::Index a = 0; a < masses.rows(); ++a) {
      const double v = masses(a, b) * grid_a.weights[static_cast<std::size_t>(a)] *
                       grid_b.weights[static_cast<std::size_t>(b)] / total;
      masses(a, b) = v > 0.0 ? v : 0.0;
    }
  }
  JointDistribution jd{grid_a, grid_b, std::move(masses), 0.0};
  jd.captured_mass = jd.masses.sum();
  check_captured(jd.captured_mass, "joint_distribution");
  return jd;
}

double mutual_information(const JointDistribution& jd) {
  const double total = jd.masses.sum();
  if (!(total > 0.0)) return 0.0;
  const Eigen::MatrixXd p = jd.masses / total;
  const Eigen::VectorXd pa = p.rowwise().sum();
  const Eigen::VectorXd pb = p.colwise().sum().transpose();
  double info = 0.0;
  for (Eigen::Index b = 0; b < p.cols(); ++b) {
    for (Eigen::Index a = 0; a < p.rows(); ++a) {
      const double v = p(a, b);
      if (v <= 0.0) continue;
      info += v * std::log2(std::max(v, 1e-300) / std::max(pa(a) * pb(b), 1e-300));
    }
  }
  return info;
}

double entropy_bits(const RVector& eigenvalues) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double l = eigenvalues(i);
    if (l < 1e-14) continue;
    s -= l * std::log2(l);
  }
  return s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  return entropy_bits(hermitian_eigenvalues(rho.matrix()) / rho.trace());
}

double ConditionalEnsemble::mean_entropy() const {
  double weighted = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    weighted += probabilities[i] * von_neumann_entropy(states[i]);
    mass += probabilities[i];
  }
  return mass > 0.0 ? weighted / mass : 0.0;
}

ConditionalEnsemble conditional_ensemble(const DensityMatrix& rho, int measured_mode,
                                         const MeasurementGrid& grid, std::optional<int> register_mode) {
  const HilbertSpec& space = rho.space();
  const Split s = make_split(space, measured_mode, register_mode);
  const CMatrix pairs = pair_products(povm_vectors(grid, static_cast<int>(s.measured_dim)));
  const HilbertSpec kept_space = space.subspace(s.kept_modes);
  const double total = rho.trace();
  ConditionalEnsemble ens;
  for (int k = 0; k < s.register_dim; ++k) {
    const CMatrix r = regroup(rho.matrix(), s, k);
    for_each_conditional(r, s.kept_dim, pairs, [&](std::size_t j, const auto& m) {
      const double tr = m.trace().real();
      const double p = tr * grid.weights[j] / total;
      if (!(tr > 1e-300) || p <= 0.0) {
        ++ens.dropped;
        return;
      }
      CMatrix state = m / tr;
      state = 0.5 * (state + state.adjoint()).eval();
      ens.probabilities.push_back(p);
      ens.states.emplace_back(kept_space, std::move(state), tr);
      ens.grid_index.push_back(j);
      ens.register_value.push_back(register_mode ? k : -1);
    });
  }
  for (double p : ens.probabilities) ens.captured_mass += p;
  check_captured(ens.captured_mass, "conditional_ensemble");
  return ens;
}

namespace {

// rho = sum_{k,k'} U_k U_k'^dag (x) |k><k'| over (A, B[, register]) with unit
// trace. A plain two-mode state is the single-branch case U_0 = W.
using Branches = std::vector<CMatrix>;

double factor_entropy(const CMatrix& y, double trace) {
  const CMatrix small = y.rows() <= y.cols() ? CMatrix(y * y.adjoint()) : CMatrix(y.adjoint() * y);
  return hermitian_entropy_of(small, trace);
}

double branches_entropy(const Branches& branches) {
  const Eigen::Index r = branches.front().cols();
  CMatrix gram = CMatrix::Zero(r, r);
  for (const auto& b : branches) gram.noalias() += b.adjoint() * b;
  return entropy_bits(hermitian_eigenvalues(gram) / gram.trace().real());
}

constexpr Eigen::Index kOutcomeChunk = 256;

// Bob reads B with the grid POVM and the register projectively; the
// conditional Alice state for (b, k) is Y Y^dag with
// Y(kappa, r) = sum_mu conj(phi_b[mu]) U_k(kappa dB + mu, r).
EntropyAverage direct_conditional(const HilbertSpec& space, const Branches& branches, const MeasurementGrid& grid_b) {
  const Eigen::Index da = space.dim(0);
  const Eigen::Index db = space.dim(1);
  const Eigen::Index r = branches.front().cols();
  const CMatrix phi_conj = povm_vectors(grid_b, static_cast<int>(db)).conjugate();
  const auto nb = static_cast<Eigen::Index>(grid_b.size());
  EntropyAverage avg;
  for (const CMatrix& u : branches) {
    // Column-major U viewed as (mu) x (kappa + dA r).
    Eigen::Map<const CMatrix> t(u.data(), db, da * r);
    for (Eigen::Index start = 0; start < nb; start += kOutcomeChunk) {
      const Eigen::Index len = std::min(kOutcomeChunk, nb - start);
      const CMatrix zt = t.transpose() * phi_conj.middleCols(start, len);
      for (Eigen::Index j = 0; j < len; ++j) {
        Eigen::Map<const CMatrix> y(zt.col(j).data(), da, r);
        const double tr = y.squaredNorm();
        const double p = tr * grid_b.weights[static_cast<std::size_t>(start + j)];
        if (!(tr > 1e-300) || p <= 0.0) {
          ++avg.dropped;
          continue;
        }
        avg.add(p, factor_entropy(y, tr));
      }
    }
  }
  return avg;
}

// Alice measures A; Bob's side (B and the register) is left in
// sum_{k,k'} Y_k Y_k'^dag (x) |k><k'|, whose spectrum is that of the stacked Y.
EntropyAverage reverse_conditional(const HilbertSpec& space, const Branches& branches, const MeasurementGrid& grid_a) {
  const Eigen::Index da = space.dim(0);
  const Eigen::Index db = space.dim(1);
  const Eigen::Index r = branches.front().cols();
  const auto nk = static_cast<Eigen::Index>(branches.size());
  const CMatrix phi_conj = povm_vectors(grid_a, static_cast<int>(da)).conjugate();
  const auto na = static_cast<Eigen::Index>(grid_a.size());

  std::vector<CMatrix> v;  // V_k(kappa, mu + dB r) = U_k(kappa dB + mu, r)
  for (const CMatrix& u : branches) {
    CMatrix vk(da, db * r);
    for (Eigen::Index c = 0; c < r; ++c)
      for (Eigen::Index m = 0; m < db; ++m)
        for (Eigen::Index k = 0; k < da; ++k) vk(k, m + db * c) = u(k * db + m, c);
    v.push_back(std::move(vk));
  }
  EntropyAverage avg;
  std::vector<CMatrix> zt(static_cast<std::size_t>(nk));
  CMatrix stacked(nk * db, r);
  for (Eigen::Index start = 0; start < na; start += kOutcomeChunk) {
    const Eigen::Index len = std::min(kOutcomeChunk, na - start);
    for (Eigen::Index k = 0; k < nk; ++k) {
      zt[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k)].transpose() * phi_conj.middleCols(start, len);
    }
    for (Eigen::Index j = 0; j < len; ++j) {
      for (Eigen::Index k = 0; k < nk; ++k) {
        stacked.middleRows(k * db, db) = Eigen::Map<const CMatrix>(zt[static_cast<std::size_t>(k)].col(j).data(), db, r);
      }
      const double tr = stacked.squaredNorm();
      const double p = tr * grid_a.weights[static_cast<std::size_t>(start + j)];
      if (!(tr > 1e-300) || p <= 0.0) {
        ++avg.dropped;
        continue;
      }
      avg.add(p, factor_entropy(stacked, tr));
    }
  }
  return avg;
}

Branches single_branch(const DensityMatrix& rho) {
  return {density_factor(rho) / std::sqrt(rho.trace())};
}

void require_two_mode(const HilbertSpec& space, const char* what) {
  if (space.num_modes() != 2) fail(ErrorKind::invalid_argument, std::string(what) + " needs modes (A, B)");
}

}  // namespace

double holevo_direct(const DensityMatrix& rho, const MeasurementGrid& grid_b) {
  const int modes = rho.space().num_modes();
  if (modes == 3) {
    // Dense path for an explicit (A, B, nu) state; Bob also reads nu.
    const EntropyAverage avg = dense_conditional_entropy(rho, 1, grid_b, 2);
    check_captured(avg.mass, "holevo_direct");
    return von_neumann_entropy(rho) - avg.mean();
  }
  require_two_mode(rho.space(), "holevo_direct");
  const Branches branches = single_branch(rho);
  const EntropyAverage avg = direct_conditional(rho.space(), branches, grid_b);
  check_captured(avg.mass, "holevo_direct");
  return branches_entropy(branches) - avg.mean();
}

double holevo_reverse(const DensityMatrix& rho, const MeasurementGrid& grid_a) {
  const int modes = rho.space().num_modes();
  if (modes == 3) {
    const EntropyAverage avg = dense_conditional_entropy(rho, 0, grid_a, std::nullopt);
    check_captured(avg.mass, "holevo_reverse");
    return von_neumann_entropy(rho) - avg.mean();
  }
  require_two_mode(rho.space(), "holevo_reverse");
  const Branches branches = single_branch(rho);
  const EntropyAverage avg = reverse_conditional(rho.space(), branches, grid_a);
  check_captured(avg.mass, "holevo_reverse");
  return branches_entropy(branches) - avg.mean();
}

double von_neumann_entropy(const AncillaBranches& state) { return branches_entropy(state.branches); }

double holevo_direct(const AncillaBranches& state, const MeasurementGrid& grid_b) {
  require_two_mode(state.two_mode, "holevo_direct");
  const EntropyAverage avg = direct_conditional(state.two_mode, state.branches, grid_b);
  check_captured(avg.mass, "holevo_direct");
  return branches_entropy(state.branches) - avg.mean();
}

double holevo_reverse(const AncillaBranches& state, const MeasurementGrid& grid_a) {
  require_two_mode(state.two_mode, "holevo_reverse");
  const EntropyAverage avg = reverse_conditional(state.two_mode, state.branches, grid_a);
  check_captured(avg.mass, "holevo_reverse");
  return branches_entropy(state.branches) - avg.mean();
}

}  // namespace npamp
