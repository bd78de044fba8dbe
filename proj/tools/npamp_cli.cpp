// Batch front-end over libnpamp: scenario, sweep, table, converge.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "npamp/npamp.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

int exit_code(npamp_status s) {
  switch (s) {
    case NPAMP_OK: return 0;
    case NPAMP_INVALID_ARGUMENT:
    case NPAMP_CONFIG: return kExitConfig;
    case NPAMP_IO: return kExitIo;
    default: return kExitNumerical;
  }
}

struct Options {
  std::string config;
  std::string out;
  std::string format;
  std::optional<int> cutoff;
  std::optional<int> workers;
  std::string channel;
  std::string noise_model;
  std::optional<double> delta_prime;
  std::optional<double> squeezing;
  std::optional<double> delta;
  std::string amplifier;
  std::string protocol;
  std::string reconciliation;
  std::string placement;
  std::vector<std::string> settings;
  bool no_convergence = false;
  bool strict = false;
};

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Failure {
  npamp_status status;
};

void check(npamp_status s) {
  if (s != NPAMP_OK) throw Failure{s};
}

npamp_config* build_config(const Options& o) {
  npamp_config* cfg = nullptr;
  check(o.config.empty() ? npamp_config_new(&cfg) : npamp_config_from_file(o.config.c_str(), &cfg));
  std::vector<std::pair<std::string, std::string>> sets;
  if (o.squeezing) sets.emplace_back("R", number(*o.squeezing));
  if (!o.channel.empty()) sets.emplace_back("channel", "\"" + o.channel + "\"");
  if (!o.amplifier.empty()) sets.emplace_back("amplifier", "\"" + o.amplifier + "\"");
  if (o.delta) sets.emplace_back("amplifier.delta", number(*o.delta));
  if (!o.noise_model.empty()) sets.emplace_back("noise_model", "\"" + o.noise_model + "\"");
  if (o.delta_prime) sets.emplace_back("delta_prime", number(*o.delta_prime));
  if (!o.protocol.empty()) sets.emplace_back("protocol", "\"" + o.protocol + "\"");
  if (!o.reconciliation.empty()) sets.emplace_back("reconciliation", "\"" + o.reconciliation + "\"");
  if (!o.placement.empty()) sets.emplace_back("placement", "\"" + o.placement + "\"");
  if (o.cutoff) sets.emplace_back("cutoff", std::to_string(*o.cutoff));
  if (o.workers) sets.emplace_back("workers", std::to_string(*o.workers));
  if (o.no_convergence) sets.emplace_back("convergence_check", "false");
  for (const auto& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "npamp: --set expects key=value, got '" << kv << "'\n";
      npamp_config_free(cfg);
      throw Failure{NPAMP_CONFIG};
    }
    sets.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [key, value] : sets) {
    const npamp_status s = npamp_config_set(cfg, key.c_str(), value.c_str());
    if (s != NPAMP_OK) {
      npamp_config_free(cfg);
      throw Failure{s};
    }
  }
  return cfg;
}

npamp_format pick_format(const Options& o) {
  if (o.format == "json") return NPAMP_FORMAT_JSON;
  if (o.format == "csv") return NPAMP_FORMAT_CSV;
  const bool json_ext = o.out.size() >= 5 && o.out.compare(o.out.size() - 5, 5, ".json") == 0;
  return json_ext ? NPAMP_FORMAT_JSON : NPAMP_FORMAT_CSV;
}

using Runner = npamp_status (*)(const npamp_config*, npamp_results**);

int run(const Options& o, Runner runner) {
  npamp_config* cfg = build_config(o);
  npamp_results* res = nullptr;
  const npamp_status s = runner(cfg, &res);
  npamp_config_free(cfg);
  check(s);

  const npamp_format fmt = pick_format(o);
  npamp_status ws;
  if (o.out.empty()) {
    char* text = nullptr;
    ws = npamp_results_to_string(res, fmt, &text);
    if (ws == NPAMP_OK) {
      std::fwrite(text, 1, std::char_traits<char>::length(text), stdout);
      npamp_string_free(text);
    }
  } else {
    ws = npamp_results_write(res, fmt, o.out.c_str());
  }
  if (ws != NPAMP_OK) {
    npamp_results_free(res);
    throw Failure{ws};
  }

  const std::size_t total = npamp_results_size(res);
  const std::size_t failed = npamp_results_failed(res);
  const std::size_t unconverged = npamp_results_unconverged(res);
  for (std::size_t i = 0; i < total; ++i) {
    const std::string err = npamp_results_error(res, i);
    if (!err.empty()) std::cerr << "npamp: row " << i << " failed: " << err << "\n";
  }
  if (unconverged > 0) std::cerr << "npamp: " << unconverged << " of " << total << " rows unconverged\n";
  npamp_results_free(res);

  if (total > 0 && failed == total) return kExitNumerical;
  if (o.strict && (failed > 0 || unconverged > 0)) return kExitNumerical;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noiseless amplification of two-mode squeezed vacuum for CV-QKD"};
  app.set_version_flag("--version", std::string(npamp_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--config", o.config, "JSON config file");
  app.add_option("--out", o.out, "output path (stdout if omitted)");
  app.add_option("--format", o.format, "csv or json (default: from --out extension, else csv)")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--cutoff", o.cutoff, "Fock cutoff per mode")->check(CLI::Range(2, 80));
  app.add_option("--workers", o.workers, "concurrent sweep points")->check(CLI::PositiveNumber);
  app.add_option("--channel", o.channel, "channel preset")
      ->check(CLI::IsMember({"ideal", "noisy", "lossy", "realistic"}));
  app.add_option("--noise-model", o.noise_model, "amplifier noise model")
      ->check(CLI::IsMember({"gaussian", "ancilla"}));
  app.add_option("--delta-prime", o.delta_prime, "ancilla noise parameter (default: delta)");
  app.add_option("-R,--squeezing", o.squeezing, "TMSV squeezing R");
  app.add_option("--delta", o.delta, "amplifier noise Delta");
  app.add_option("--amplifier", o.amplifier, "amplifier preset")
      ->check(CLI::IsMember({"hfa", "npa1", "npa2", "npa3", "none"}));
  app.add_option("--protocol", o.protocol, "kind_a-kind_b, e.g. hom-het");
  app.add_option("--reconciliation", o.reconciliation, "none, direct, reverse or both");
  app.add_option("--placement", o.placement, "amplifier after or before the channel");
  app.add_option("--set", o.settings, "override a config key: key=value (repeatable)");
  app.add_flag("--no-convergence", o.no_convergence, "skip the cutoff+5 / grid x2 reruns");
  app.add_flag("--strict", o.strict, "exit 3 if any row failed or is unconverged");

  auto* scenario = app.add_subcommand("scenario", "run one configuration");
  auto* sweep = app.add_subcommand("sweep", "(R, delta) surfaces");
  auto* table = app.add_subcommand("table", "four-channel comparison table");
  auto* converge = app.add_subcommand("converge", "cutoff / grid convergence study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (scenario->parsed()) return run(o, npamp_run_scenario);
    if (sweep->parsed()) return run(o, npamp_run_sweep);
    if (table->parsed()) return run(o, npamp_run_table);
    if (converge->parsed()) return run(o, npamp_run_converge);
  } catch (const Failure& f) {
    const char* msg = npamp_last_error();
    if (msg && *msg) std::cerr << "npamp: " << msg << "\n";
    return exit_code(f.status);
  }
  return kExitConfig;
}
