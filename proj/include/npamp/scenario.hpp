#pragma once

// End-to-end pipeline: TMSV -> channel on B -> amplifier on B -> measurement,
// plus sweeps, the four-channel table and cutoff/grid convergence studies.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "npamp/channels.hpp"
#include "npamp/measure.hpp"
#include "npamp/states.hpp"

namespace npamp {

enum class NoiseModel { gaussian, ancilla };
enum class Reconciliation { none, direct, reverse, both };
enum class Placement { after, before };  // amplifier relative to the channel

const char* to_string(NoiseModel m);
const char* to_string(Reconciliation r);
const char* to_string(Placement p);
const char* to_string(NoiseConvention c);

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ScenarioConfig {
  TmsvParams tmsv;
  ChannelConfig channel;
  AmplifierConfig amplifier = AmplifierConfig::high_fidelity();
  NoiseModel noise_model = NoiseModel::gaussian;
  double delta_prime = kNaN;  // NaN: follow amplifier.delta
  MeasurementKind kind_a = MeasurementKind::homodyne;
  MeasurementKind kind_b = MeasurementKind::homodyne;
  int cutoff = 0;  // 0: 20 for the Gaussian model, 15 with the ancilla
  GridResolution grid;
  Reconciliation reconciliation = Reconciliation::both;
  Placement placement = Placement::after;
  bool convergence_check = true;
  double convergence_tolerance = 1e-3;
  std::string label;  // free-form tag carried into reports

  int effective_cutoff() const;
  double effective_delta_prime() const { return std::isnan(delta_prime) ? amplifier.delta : delta_prime; }
  bool wants_direct() const { return reconciliation == Reconciliation::direct || reconciliation == Reconciliation::both; }
  bool wants_reverse() const { return reconciliation == Reconciliation::reverse || reconciliation == Reconciliation::both; }

  // Throws ErrorKind::config naming the offending field.
  void validate() const;
};

struct ConvergenceDiagnostics {
  bool checked = false;
  double cutoff_delta = kNaN;  // max |change| over reported bits, cutoff + 5
  double grid_delta = kNaN;    // same, grids doubled
  bool converged = true;
};

struct ScenarioReport {
  ScenarioConfig config;
  double i0 = kNaN;
  double i = kNaN;
  double d_i = kNaN;
  double h_ea0 = kNaN;
  double h_ea = kNaN;
  double h_eb0 = kNaN;
  double h_eb = kNaN;
  double success_weight = kNaN;
  double purity = kNaN;
  int cutoff = 0;
  std::size_t grid_points_a = 0;
  std::size_t grid_points_b = 0;
  std::size_t dropped_outcomes = 0;
  ConvergenceDiagnostics convergence;
  std::string error;  // set when the point failed (sweeps keep going)
  std::optional<ErrorKind> error_kind;

  bool ok() const { return error.empty(); }
};

ScenarioReport run_scenario(const ScenarioConfig& cfg);

// Same pipeline without the convergence reruns.
ScenarioReport run_scenario_once(const ScenarioConfig& cfg);

struct SweepAxis {
  std::string name;  // "R" or "delta"
  double min = 0.0;
  double max = 0.0;
  int steps = 2;

  double value(int k) const {
    const double t = static_cast<double>(k) / (steps - 1);
    return min * (1.0 - t) + max * t;
  }
};

// Named amplifier settings used by sweeps and the table. The sweep's delta
// axis overrides the operation's delta.
struct Operation {
  std::string name;
  int m_add = 0;
  int n_sub = 0;
};

std::optional<Operation> operation_by_name(const std::string& name);  // npa1..npa3, hfa

struct SweepSpec {
  ScenarioConfig base;
  std::vector<SweepAxis> axes;  // 1 or 2; first axis varies slowest
  std::vector<Operation> operations;  // empty: use base.amplifier as is

  static SweepSpec surface_default(const ScenarioConfig& base);
  void validate() const;
};

// Rows are ordered operation-major, then by the axes. Failed points carry
// their error and the sweep continues.
std::vector<ScenarioReport> run_sweep(const SweepSpec& spec, int workers = 1);

struct ChannelPreset {
  const char* name;
  double eta;
  double n_t;
};

inline constexpr ChannelPreset kChannelPresets[] = {
    {"ideal", 1.0, 0.0},
    {"noisy", 1.0, 0.1},
    {"lossy", 0.9, 0.0},
    {"realistic", 0.9, 0.1},
};

std::optional<ChannelPreset> channel_preset(const std::string& name);

// {NPA with two subtractions, HFA} x deltas x four protocols x four channels.
struct TableSpec {
  ScenarioConfig base;
  std::vector<double> deltas{0.0, 0.1, 0.2};
  int npa_subtractions = 2;

  static TableSpec standard(ScenarioConfig base);
  std::vector<ScenarioConfig> enumerate() const;
};

std::vector<ScenarioReport> run_table(const TableSpec& spec, int workers = 1);

// Runs cfg at cutoff, cutoff+5, cutoff+10 with grid factors 1 and 2.
struct ConvergeSpec {
  ScenarioConfig base;
  std::vector<int> cutoff_offsets{0, 5, 10};
  std::vector<int> grid_factors{1, 2};
};

struct ConvergeRow {
  int cutoff = 0;
  int grid_factor = 1;
  ScenarioReport report;
};

std::vector<ConvergeRow> run_converge(const ConvergeSpec& spec, int workers = 1);

// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace npamp
