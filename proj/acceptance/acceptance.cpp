// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
// Criteria 2, 7 and 8 are read from the CSV of the `table` command, which is
// also what criterion 10 runs twice.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "npamp/report_io.hpp"

using namespace npamp;

namespace {

int failures = 0;
std::ofstream report_file("acceptance_report.txt");

void report(int id, bool pass, const std::string& what) {
  char head[32];
  std::snprintf(head, sizeof head, "criterion %2d: %s  ", id, pass ? "PASS" : "FAIL");
  std::printf("%s%s\n", head, what.c_str());
  std::fflush(stdout);
  report_file << head << what << std::endl;
  failures += pass ? 0 : 1;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Largest |change| over the convergence reruns; NaN-free reports only.
double worst_delta(const ScenarioReport& r) {
  if (!r.ok() || !r.convergence.checked) return INFINITY;
  return std::max(r.convergence.cutoff_delta, r.convergence.grid_delta);
}

struct Conv {
  double worst = 0.0;
  void add(double d) { worst = std::max(worst, std::isnan(d) ? INFINITY : d); }
};

// ---------------------------------------------------------------- criterion 1

void gaussian_mi_oracle(Conv& conv) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string detail;
  std::vector<ScenarioConfig> cfgs;
  for (double r : {0.1, 0.3, 0.5}) {
    ScenarioConfig c;
    c.tmsv.squeezing = r;
    c.amplifier = AmplifierConfig{};
    c.cutoff = 20;
    c.reconciliation = Reconciliation::none;
    c.convergence_check = false;
    const ScenarioReport rep = run_scenario_once(c);
    const double expect = -0.5 * std::log2(1 - std::pow(std::tanh(2 * r), 2));
    const double err = std::abs(rep.i0 - expect);
    worst = std::max(worst, std::isfinite(err) ? err : INFINITY);
    detail += " R=" + fmt("%.1f", r) + ":" + fmt("%.6f", rep.i0) + "/" + fmt("%.6f", expect);
    cfgs.push_back(c);
  }
  const double elapsed = seconds_since(t0);
  report(1, worst < 1e-3 && elapsed < 5.0,
         "hom-hom MI vs closed form, max err " + fmt("%.2e", worst) + " bits (tol 1e-3), " +
             fmt("%.2f", elapsed) + " s (< 5 s);" + detail);
  for (ScenarioConfig c : cfgs) {
    c.convergence_check = true;
    conv.add(worst_delta(run_scenario(c)));
  }
}

// ---------------------------------------------------------------- criterion 3

double geometric_error(double delta, int dim, NoiseQuadrature q, RVector* diag = nullptr) {
  CMatrix vac = CMatrix::Zero(dim, dim);
  vac(0, 0) = 1.0;
  const DensityMatrix out = add_gaussian_noise(DensityMatrix(HilbertSpec::single(dim), vac), 0, delta, q);
  double worst = 0.0;
  for (int n = 0; n < dim; ++n) {
    const double p = std::pow(delta, n) / std::pow(1 + delta, n + 1);
    worst = std::max(worst, std::abs(out.matrix()(n, n).real() - p));
  }
  if (diag) *diag = out.matrix().diagonal().real();
  return worst;
}

void thermal_noise_oracle(Conv& conv) {
  double worst = 0.0;
  for (double delta : {0.1, 0.3}) {
    RVector base, more, fine;
    worst = std::max(worst, geometric_error(delta, 30, {12, 16}, &base));
    geometric_error(delta, 35, {12, 16}, &more);
    geometric_error(delta, 30, {24, 32}, &fine);
    conv.add((more.head(30) - base).cwiseAbs().maxCoeff());
    conv.add((fine - base).cwiseAbs().maxCoeff());
  }
  report(3, worst < 1e-6,
         "noise on vacuum vs geometric distribution, Delta 0.1 and 0.3, 12x16 nodes: max err " + fmt("%.2e", worst) +
             " (tol 1e-6)");
}

// ---------------------------------------------------------------- criterion 4

double mean_photons(const DensityMatrix& rho) {
  const CMatrix n = ladder_operator(LadderKind::number, rho.space().dim(0)).matrix();
  return rho.expectation(0, n).real() / rho.trace();
}

double subtraction_mean(double delta, int dim, NoiseQuadrature q) {
  CMatrix vac = CMatrix::Zero(dim, dim);
  vac(0, 0) = 1.0;
  AmplifierConfig cfg = AmplifierConfig::noise_powered(delta, 1);
  cfg.quadrature = q;
  return mean_photons(amplifier(DensityMatrix(HilbertSpec::single(dim), vac), 0, cfg));
}

double hfa_gain(double alpha, int dim) {
  const DensityMatrix out = amplifier(DensityMatrix::pure(coherent_ket(dim, alpha)), 0, AmplifierConfig::high_fidelity());
  const CMatrix a = ladder_operator(LadderKind::annihilate, dim).matrix();
  return out.expectation(0, a).real() / out.trace() / alpha;
}

void gain_mechanism(Conv& conv) {
  double worst = 0.0;
  std::string detail;
  for (double delta : {0.1, 0.2, 0.3}) {
    const double m = subtraction_mean(delta, 40, {});
    worst = std::max(worst, std::abs(m - 2 * delta));
    detail += " " + fmt("%.6f", m);
    conv.add(std::abs(subtraction_mean(delta, 45, {}) - m));
    conv.add(std::abs(subtraction_mean(delta, 40, {24, 32}) - m));
  }
  const double g = hfa_gain(0.05, 25);
  conv.add(std::abs(hfa_gain(0.05, 30) - g));
  const bool pass = worst < 1e-4 && std::abs(g - 2.0) <= 0.02 * 2.0;
  report(4, pass,
         "subtraction after noise on vacuum gives 2 Delta (Delta 0.1/0.2/0.3 ->" + detail + "), max err " +
             fmt("%.2e", worst) + " (tol 1e-4); HFA gain at alpha 0.05 = " + fmt("%.5f", g) + " (2.0 within 2%)");
}

// ---------------------------------------------------------------- criterion 5

void purity_claims(Conv& conv) {
  auto purities = [](int dim, NoiseQuadrature q) {
    const DensityMatrix rho = tmsv_fock({0.3}, dim);
    const double hfa = amplifier(rho, 1, AmplifierConfig::high_fidelity()).purity();
    AmplifierConfig npa = AmplifierConfig::noise_powered(0.2, 1);
    npa.quadrature = q;
    return std::array<double, 3>{rho.purity(), hfa, amplifier(rho, 1, npa).purity()};
  };
  const auto p = purities(20, {});
  const auto more = purities(25, {});
  const auto fine = purities(20, {24, 32});
  for (int i = 0; i < 3; ++i) {
    conv.add(std::abs(more[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(i)]));
    conv.add(std::abs(fine[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(i)]));
  }
  const bool pass = p[1] >= 1 - 1e-6 && p[2] <= p[0] - 1e-3;
  report(5, pass,
         "HFA purity on TMSV " + fmt("%.9f", p[1]) + " (>= 1 - 1e-6); NPA(0.2, N=1) purity " + fmt("%.6f", p[2]) +
             " vs input " + fmt("%.6f", p[0]) + " (drop >= 1e-3)");
}

// ---------------------------------------------------------------- criterion 6

ScenarioReport surface_point(const std::string& op, double delta, MeasurementKind ka, MeasurementKind kb) {
  ScenarioConfig c;
  const Operation o = *operation_by_name(op);
  c.amplifier = AmplifierConfig{delta, o.m_add, o.n_sub, {}};
  c.kind_a = ka;
  c.kind_b = kb;
  c.cutoff = 20;
  c.reconciliation = Reconciliation::none;
  return run_scenario(c);
}

void amplifier_ordering(Conv& conv) {
  using K = MeasurementKind;
  const ScenarioReport hfa = surface_point("hfa", 0.0, K::homodyne, K::homodyne);
  const ScenarioReport npa2 = surface_point("npa2", 0.0, K::homodyne, K::homodyne);
  const ScenarioReport npa3 = surface_point("npa3", 0.0, K::homodyne, K::homodyne);
  for (const auto* r : {&hfa, &npa2, &npa3}) conv.add(worst_delta(*r));
  const bool positive = hfa.d_i > 0 && npa2.d_i > 0 && npa3.d_i > 0;
  const bool hfa_beats = hfa.d_i > npa2.d_i;

  // Coherent-state protocols: Alice heterodynes.
  bool overcome = false;
  std::string detail;
  for (auto kb : {K::homodyne, K::heterodyne}) {
    const ScenarioReport ref = surface_point("hfa", 0.0, K::heterodyne, kb);
    conv.add(worst_delta(ref));
    double best = -INFINITY, best_delta = 0.0;
    for (int k = 0; k <= 12; ++k) {
      const double delta = 0.05 * k;
      const ScenarioReport r = surface_point("npa3", delta, K::heterodyne, kb);
      conv.add(worst_delta(r));
      if (r.ok() && r.d_i > best) {
        best = r.d_i;
        best_delta = delta;
      }
    }
    overcome = overcome || best > ref.d_i;
    detail += std::string(" het-") + (kb == K::homodyne ? "hom" : "het") + ": max npa3 " + fmt("%.4f", best) +
              " at Delta " + fmt("%.2f", best_delta) + " vs hfa " + fmt("%.4f", ref.d_i) + ";";
  }
  report(6, positive && hfa_beats && overcome,
         "hom-hom ideal R=0.3 Delta=0: D_I hfa " + fmt("%.4f", hfa.d_i) + ", npa2 " + fmt("%.4f", npa2.d_i) +
             ", npa3 " + fmt("%.4f", npa3.d_i) + " (all > 0, hfa > npa2);" + detail);
}

// ------------------------------------------------------- table (2, 7, 8, 10)

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NPAMP_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Row = std::map<std::string, std::string>;

std::vector<Row> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> cols;
  std::vector<Row> rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
    return out;
  };
  if (std::getline(in, line)) cols = split(line);
  while (std::getline(in, line)) {
    const auto f = split(line);
    Row r;
    for (std::size_t i = 0; i < cols.size() && i < f.size(); ++i) r[cols[i]] = f[i];
    rows.push_back(std::move(r));
  }
  return rows;
}

double num(const Row& r, const std::string& key) { return std::strtod(r.at(key).c_str(), nullptr); }

bool table_row_converged(const Row& r) { return r.at("converged") == "true"; }

struct Pending {
  bool pass = false;
  std::string what;
};

Pending table_criteria(int& table_unconverged) {
  const auto t0 = std::chrono::steady_clock::now();
  const int c1 = run_cli("table --out acceptance_table_1.csv");
  const double first = seconds_since(t0);
  const int c2 = run_cli("table --out acceptance_table_2.csv");
  const std::string a = slurp("acceptance_table_1.csv");
  const std::string b = slurp("acceptance_table_2.csv");
  const std::vector<Row> rows = parse_csv(a);

  // 2: ideal channel.
  {
    double worst = 0.0;
    int n = 0;
    for (const Row& r : rows) {
      if (num(r, "eta") != 1.0 || num(r, "n_t") != 0.0) continue;
      ++n;
      for (const char* k : {"h_ea0", "h_ea", "h_eb0", "h_eb"}) {
        const double h = num(r, k);
        worst = std::max(worst, std::isfinite(h) ? std::abs(h) : INFINITY);
      }
      table_unconverged += table_row_converged(r) ? 0 : 1;
    }
    report(2, n == 24 && worst <= 2e-3,
           "ideal channel, 4 protocols x {npa2, hfa} x Delta {0, 0.1, 0.2} (" + std::to_string(n) +
               " rows, ancilla noise): max |H(E;A)|, |H(E;B)| = " + fmt("%.2e", worst) + " bits (tol 2e-3)");
  }
  // 7: eta = 1, N_T = 0.1.
  {
    double lowest = INFINITY;
    int n = 0;
    for (const Row& r : rows) {
      if (num(r, "eta") != 1.0 || num(r, "n_t") != 0.1) continue;
      ++n;
      const double d = num(r, "d_i_bits");
      lowest = std::min(lowest, std::isfinite(d) ? d : -INFINITY);
      table_unconverged += table_row_converged(r) ? 0 : 1;
    }
    report(7, n == 24 && lowest > 0.0,
           "noisy channel eta=1 N_T=0.1, both presets, 4 protocols, Delta {0, 0.1, 0.2} (" + std::to_string(n) +
               " rows): min Delta I = " + fmt("%.4f", lowest) + " bits (> 0)");
  }
  // 8: eta = 0.9, N_T = 0.1, het-het NPA.
  {
    double highest = -INFINITY;
    int n = 0;
    std::string detail;
    for (const Row& r : rows) {
      if (num(r, "eta") != 0.9 || num(r, "n_t") != 0.1 || num(r, "m_add") != 0.0) continue;
      if (r.at("kind_a") != "heterodyne" || r.at("kind_b") != "heterodyne") continue;
      ++n;
      const double di = num(r, "d_i_bits");
      const double net_dir = di - (num(r, "h_ea") - num(r, "h_ea0"));
      const double net_rev = di - (num(r, "h_eb") - num(r, "h_eb0"));
      for (double v : {net_dir, net_rev}) highest = std::max(highest, std::isfinite(v) ? v : INFINITY);
      detail += " Delta " + fmt("%.1f", num(r, "delta")) + ": " + fmt("%.4f", net_dir) + "/" + fmt("%.4f", net_rev) + ";";
      table_unconverged += table_row_converged(r) ? 0 : 1;
    }
    report(8, n == 3 && highest <= 0.0,
           "realistic channel het-het NPA, Delta I - Delta H (direct/reverse):" + detail + " max " +
               fmt("%.4f", highest) + " (<= 0)");
  }
  return {c1 == 0 && c2 == 0 && !a.empty() && a == b,
          "two `table` runs: exit " + std::to_string(c1) + "/" + std::to_string(c2) + ", " + std::to_string(a.size()) +
             " bytes, " + (a == b ? "byte-identical" : "DIFFERENT") + " (first run " + fmt("%.0f", first) + " s)"};
}

}  // namespace

int main() {
  Conv conv;
  int table_unconverged = 0;
  Pending determinism;
  try {
    gaussian_mi_oracle(conv);
    thermal_noise_oracle(conv);
    gain_mechanism(conv);
    purity_claims(conv);
    amplifier_ordering(conv);
    determinism = table_criteria(table_unconverged);
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  report(9, conv.worst < 1e-3 && table_unconverged == 0,
         "cutoff +5 and doubled grids/nodes: max change " + fmt("%.2e", conv.worst) +
             " (tol 1e-3) over criteria 1, 3-6; table rows used by 2, 7, 8 unconverged: " +
             std::to_string(table_unconverged));
  report(10, determinism.pass, determinism.what);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
