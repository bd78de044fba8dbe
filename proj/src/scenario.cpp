#include "npamp/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

namespace npamp {

const char* to_string(NoiseModel m) { return m == NoiseModel::gaussian ? "gaussian" : "ancilla"; }

const char* to_string(Reconciliation r) {
  switch (r) {
    case Reconciliation::none: return "none";
    case Reconciliation::direct: return "direct";
    case Reconciliation::reverse: return "reverse";
    case Reconciliation::both: return "both";
  }
  return "?";
}

const char* to_string(Placement p) { return p == Placement::after ? "after" : "before"; }

const char* to_string(NoiseConvention c) { return c == NoiseConvention::excess ? "excess" : "thermal"; }

int ScenarioConfig::effective_cutoff() const {
  if (cutoff > 0) return cutoff;
  return noise_model == NoiseModel::ancilla ? 15 : 20;
}

namespace {

template <typename F>
auto at_path(const char* path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(path) + ": " + e.what());
  }
}

void config_check(bool ok, const std::string& path, const std::string& what) {
  if (!ok) fail(ErrorKind::config, path + ": " + what);
}

template <typename F>
void as_config(const char* path, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    throw Error(ErrorKind::config, std::string(path) + ": " + e.what());
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  as_config("tmsv.R", [&] { tmsv.validate(); });
  as_config("channel", [&] { channel.validate(); });
  as_config("amplifier", [&] { amplifier.validate(); });
  config_check(cutoff == 0 || cutoff >= 2, "cutoff", "must be >= 2");
  config_check(cutoff <= 80, "cutoff", "must be <= 80");
  config_check(grid.homodyne_points >= 8, "grid.homodyne_points", "must be >= 8");
  config_check(grid.heterodyne_points >= 8, "grid.heterodyne_points", "must be >= 8");
  config_check(grid.span_sigmas >= 3.0, "grid.span_sigmas", "must be >= 3");
  config_check(convergence_tolerance > 0.0, "convergence_tolerance", "must be > 0");
  config_check(std::isnan(delta_prime) || (delta_prime >= 0.0 && std::isfinite(delta_prime)), "delta_prime",
               "must be >= 0");
  if (noise_model == NoiseModel::ancilla) {
    config_check(placement == Placement::after, "placement",
                 "the ancilla noise model needs the amplifier after the channel");
  }
}

namespace {

struct InfoValues {
  double i = kNaN;
  double h_ea = kNaN;
  double h_eb = kNaN;
  std::size_t points_a = 0;
  std::size_t points_b = 0;
};

InfoValues gaussian_info(const DensityMatrix& rho, const ScenarioConfig& cfg) {
  InfoValues out;
  const MeasurementGrid ga = adapted_grid(cfg.kind_a, rho, 0, cfg.grid);
  const MeasurementGrid gb = adapted_grid(cfg.kind_b, rho, 1, cfg.grid);
  out.points_a = ga.size();
  out.points_b = gb.size();
  out.i = mutual_information(joint_distribution(rho, ga, gb));
  if (cfg.wants_direct()) out.h_ea = holevo_direct(rho, gb);
  if (cfg.wants_reverse()) out.h_eb = holevo_reverse(rho, ga);
  return out;
}

InfoValues ancilla_info(const AncillaBranches& state, const DensityMatrix& rho, const ScenarioConfig& cfg) {
  InfoValues out;
  const MeasurementGrid ga = adapted_grid(cfg.kind_a, rho, 0, cfg.grid);
  const MeasurementGrid gb = adapted_grid(cfg.kind_b, rho, 1, cfg.grid);
  out.points_a = ga.size();
  out.points_b = gb.size();
  out.i = mutual_information(joint_distribution(rho, ga, gb));
  if (cfg.wants_direct()) out.h_ea = holevo_direct(state, gb);
  if (cfg.wants_reverse()) out.h_eb = holevo_reverse(state, ga);
  return out;
}

}  // namespace

ScenarioReport run_scenario_once(const ScenarioConfig& cfg) {
  cfg.validate();
  ScenarioReport rep;
  rep.config = cfg;
  rep.cutoff = cfg.effective_cutoff();
  const int d = rep.cutoff;
  const NoiseQuadrature nodes = cfg.amplifier.quadrature;

  const DensityMatrix rho0 = at_path("tmsv", [&] { return tmsv_fock(cfg.tmsv, d); });
  const DensityMatrix rho_ch = at_path("channel", [&] { return apply_channel(rho0, 1, cfg.channel, nodes); });
  const InfoValues base = at_path("measurement", [&] { return gaussian_info(rho_ch, cfg); });
  rep.i0 = base.i;
  rep.h_ea0 = base.h_ea;
  rep.h_eb0 = base.h_eb;

  InfoValues amp;
  if (cfg.noise_model == NoiseModel::ancilla) {
    const AncillaNoiseModel model = AncillaNoiseModel::make(cfg.effective_delta_prime());
    const AncillaBranches state = at_path("amplifier", [&] {
      return amplify_with_ancilla(rho_ch, model, cfg.amplifier.m_add, cfg.amplifier.n_sub, 1);
    });
    const DensityMatrix rho_ab = state.traced_over_ancilla();
    amp = at_path("measurement", [&] { return ancilla_info(state, rho_ab, cfg); });
    rep.success_weight = state.pre_norm_trace;
    rep.purity = rho_ab.purity();
  } else {
    DensityMatrix rho_amp = rho_ch;
    if (cfg.amplifier.is_identity()) {
      rho_amp = rho_ch.with_pre_norm_trace(1.0);
    } else if (cfg.placement == Placement::after) {
      rho_amp = at_path("amplifier", [&] { return amplifier(rho_ch, 1, cfg.amplifier); });
    } else {
      const DensityMatrix pre = at_path("amplifier", [&] { return amplifier(rho0, 1, cfg.amplifier); });
      rho_amp = at_path("channel", [&] { return apply_channel(pre, 1, cfg.channel, nodes); })
                    .with_pre_norm_trace(pre.pre_norm_trace());
    }
    amp = at_path("measurement", [&] { return gaussian_info(rho_amp, cfg); });
    rep.success_weight = rho_amp.pre_norm_trace();
    rep.purity = rho_amp.purity();
  }
  rep.i = amp.i;
  rep.h_ea = amp.h_ea;
  rep.h_eb = amp.h_eb;
  rep.d_i = rep.i - rep.i0;
  rep.grid_points_a = amp.points_a;
  rep.grid_points_b = amp.points_b;
  return rep;
}

namespace {

double max_change(const ScenarioReport& a, const ScenarioReport& b) {
  const std::pair<double, double> pairs[] = {{a.i0, b.i0},     {a.i, b.i},       {a.h_ea0, b.h_ea0},
                                             {a.h_ea, b.h_ea}, {a.h_eb0, b.h_eb0}, {a.h_eb, b.h_eb}};
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    if (std::isnan(x) && std::isnan(y)) continue;
    const double diff = std::abs(x - y);
    if (std::isnan(diff)) return kNaN;
    worst = std::max(worst, diff);
  }
  return worst;
}

}  // namespace

ScenarioReport run_scenario(const ScenarioConfig& cfg) {
  ScenarioReport rep = run_scenario_once(cfg);
  if (!cfg.convergence_check) return rep;
  rep.convergence.checked = true;

  ScenarioConfig bigger = cfg;
  bigger.cutoff = rep.cutoff + 5;
  ScenarioConfig finer = cfg;
  finer.grid = cfg.grid.refined(2);
  auto delta_for = [&](const ScenarioConfig& c) {
    try {
      return max_change(rep, run_scenario_once(c));
    } catch (const Error&) {
      return kNaN;
    }
  };
  rep.convergence.cutoff_delta = delta_for(bigger);
  rep.convergence.grid_delta = delta_for(finer);
  rep.convergence.converged = rep.convergence.cutoff_delta < cfg.convergence_tolerance &&
                              rep.convergence.grid_delta < cfg.convergence_tolerance;
  return rep;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

ScenarioReport run_recorded(const ScenarioConfig& cfg) {
  try {
    return run_scenario(cfg);
  } catch (const Error& e) {
    ScenarioReport rep;
    rep.config = cfg;
    rep.cutoff = cfg.effective_cutoff();
    rep.error = e.what();
    rep.error_kind = e.kind();
    rep.convergence.converged = false;
    return rep;
  } catch (const std::exception& e) {
    ScenarioReport rep;
    rep.config = cfg;
    rep.cutoff = cfg.effective_cutoff();
    rep.error = e.what();
    rep.error_kind = ErrorKind::numerical;
    rep.convergence.converged = false;
    return rep;
  }
}

std::vector<ScenarioReport> run_all(const std::vector<ScenarioConfig>& configs, int workers) {
  std::vector<ScenarioReport> out(configs.size());
  parallel_for(configs.size(), workers, [&](std::size_t i) { out[i] = run_recorded(configs[i]); });
  return out;
}

}  // namespace

std::optional<Operation> operation_by_name(const std::string& name) {
  if (name == "hfa") return Operation{"hfa", 1, 1};
  if (name == "npa1") return Operation{"npa1", 0, 1};
  if (name == "npa2") return Operation{"npa2", 0, 2};
  if (name == "npa3") return Operation{"npa3", 0, 3};
  return std::nullopt;
}

SweepSpec SweepSpec::surface_default(const ScenarioConfig& base) {
  SweepSpec spec;
  spec.base = base;
  spec.axes = {{"R", 0.05, 0.65, 13}, {"delta", 0.0, 0.6, 13}};
  spec.operations = {*operation_by_name("npa2"), *operation_by_name("npa3"), *operation_by_name("hfa")};
  return spec;
}

void SweepSpec::validate() const {
  config_check(!axes.empty() && axes.size() <= 2, "sweep.axes", "need one or two axes");
  for (std::size_t k = 0; k < axes.size(); ++k) {
    const std::string path = "sweep.axes[" + std::to_string(k) + "]";
    const SweepAxis& ax = axes[k];
    config_check(ax.name == "R" || ax.name == "delta", path + ".name", "must be R or delta");
    config_check(ax.steps >= 2, path + ".steps", "must be >= 2");
    config_check(std::isfinite(ax.min) && std::isfinite(ax.max), path, "bounds must be finite");
  }
  config_check(axes.size() < 2 || axes[0].name != axes[1].name, "sweep.axes", "axes must differ");
}

std::vector<ScenarioReport> run_sweep(const SweepSpec& spec, int workers) {
  spec.validate();
  std::vector<Operation> ops = spec.operations;
  const bool keep_amplifier = ops.empty();
  if (keep_amplifier) ops.push_back({spec.base.label, spec.base.amplifier.m_add, spec.base.amplifier.n_sub});
  const int n0 = spec.axes[0].steps;
  const int n1 = spec.axes.size() > 1 ? spec.axes[1].steps : 1;

  std::vector<ScenarioConfig> configs;
  for (const Operation& op : ops) {
    for (int k0 = 0; k0 < n0; ++k0) {
      for (int k1 = 0; k1 < n1; ++k1) {
        ScenarioConfig cfg = spec.base;
        if (!keep_amplifier) {
          cfg.amplifier.m_add = op.m_add;
          cfg.amplifier.n_sub = op.n_sub;
          cfg.label = op.name;
        }
        for (std::size_t a = 0; a < spec.axes.size(); ++a) {
          const double v = spec.axes[a].value(a == 0 ? k0 : k1);
          if (spec.axes[a].name == "R") cfg.tmsv.squeezing = v;
          else cfg.amplifier.delta = v;
        }
        configs.push_back(std::move(cfg));
      }
    }
  }
  return run_all(configs, workers);
}

std::optional<ChannelPreset> channel_preset(const std::string& name) {
  for (const auto& p : kChannelPresets) {
    if (name == p.name) return p;
  }
  return std::nullopt;
}

TableSpec TableSpec::standard(ScenarioConfig base) {
  TableSpec spec;
  spec.base = std::move(base);
  return spec;
}

std::vector<ScenarioConfig> TableSpec::enumerate() const {
  using K = MeasurementKind;
  const std::pair<K, K> protocols[] = {
      {K::homodyne, K::homodyne}, {K::heterodyne, K::heterodyne},
      {K::homodyne, K::heterodyne}, {K::heterodyne, K::homodyne}};
  const Operation ops[] = {{"npa" + std::to_string(npa_subtractions), 0, npa_subtractions}, {"hfa", 1, 1}};
  std::vector<ScenarioConfig> out;
  for (const auto& preset : kChannelPresets) {
    for (const Operation& op : ops) {
      for (double delta : deltas) {
        for (const auto& [ka, kb] : protocols) {
          ScenarioConfig cfg = base;
          cfg.channel.eta = preset.eta;
          cfg.channel.n_t = preset.n_t;
          cfg.amplifier.delta = delta;
          cfg.amplifier.m_add = op.m_add;
          cfg.amplifier.n_sub = op.n_sub;
          cfg.kind_a = ka;
          cfg.kind_b = kb;
          cfg.label = std::string(preset.name) + ":" + op.name;
          out.push_back(std::move(cfg));
        }
      }
    }
  }
  return out;
}

std::vector<ScenarioReport> run_table(const TableSpec& spec, int workers) {
  config_check(!spec.deltas.empty(), "table.deltas", "must not be empty");
  config_check(spec.npa_subtractions >= 1, "table.npa_subtractions", "must be >= 1");
  return run_all(spec.enumerate(), workers);
}

std::vector<ConvergeRow> run_converge(const ConvergeSpec& spec, int workers) {
  spec.base.validate();
  config_check(!spec.cutoff_offsets.empty() && !spec.grid_factors.empty(), "converge", "empty study");
  const int c0 = spec.base.effective_cutoff();
  std::vector<ConvergeRow> rows;
  std::vector<ScenarioConfig> configs;
  for (int off : spec.cutoff_offsets) {
    for (int g : spec.grid_factors) {
      config_check(g >= 1, "converge.grid_factors", "must be >= 1");
      ScenarioConfig cfg = spec.base;
      cfg.cutoff = c0 + off;
      cfg.grid = spec.base.grid.refined(g);
      cfg.convergence_check = false;
      rows.push_back({cfg.cutoff, g, {}});
      configs.push_back(std::move(cfg));
    }
  }
  const auto reports = run_all(configs, workers);
  for (std::size_t k = 0; k < rows.size(); ++k) rows[k].report = reports[k];
  return rows;
}

}  // namespace npamp
