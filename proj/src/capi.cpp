#include "npamp/npamp.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "npamp/report_io.hpp"

struct npamp_config {
  npamp::ConfigDocument doc;
};

struct npamp_results {
  std::string command;
  std::vector<npamp::ScenarioReport> reports;
  std::vector<npamp::ConvergeRow> converge;  // set only by npamp_run_converge

  bool is_converge() const { return command == "converge"; }
  const npamp::ScenarioReport& at(size_t i) const { return is_converge() ? converge[i].report : reports[i]; }
  size_t size() const { return is_converge() ? converge.size() : reports.size(); }
};

namespace {

thread_local std::string g_last_error;

npamp_status status_for(npamp::ErrorKind kind) {
  using npamp::ErrorKind;
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_argument: return NPAMP_CONFIG;
    case ErrorKind::io: return NPAMP_IO;
    default: return NPAMP_NUMERICAL;
  }
}

npamp_status record(npamp_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <typename F>
npamp_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return NPAMP_OK;
  } catch (const npamp::Error& e) {
    return record(status_for(e.kind()), std::string(npamp::to_string(e.kind())) + ": " + e.what());
  } catch (const std::bad_alloc&) {
    return record(NPAMP_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(NPAMP_INTERNAL, e.what());
  } catch (...) {
    return record(NPAMP_INTERNAL, "unknown exception");
  }
}

npamp_status null_arg(const char* name) {
  return record(NPAMP_INVALID_ARGUMENT, std::string(name) + " must not be null");
}

npamp::MeasurementKind kind_from(int k) {
  if (k != NPAMP_HOMODYNE && k != NPAMP_HETERODYNE) npamp::fail(npamp::ErrorKind::invalid_argument, "unknown kind");
  return k == NPAMP_HOMODYNE ? npamp::MeasurementKind::homodyne : npamp::MeasurementKind::heterodyne;
}

std::string render(const npamp_results& res, npamp_format format) {
  const bool json = format == NPAMP_FORMAT_JSON;
  if (res.is_converge()) return json ? npamp::converge_json(res.converge) : npamp::converge_csv(res.converge);
  return json ? npamp::reports_json(res.reports, res.command) : npamp::reports_csv(res.reports);
}

bool valid_format(npamp_format f) { return f == NPAMP_FORMAT_CSV || f == NPAMP_FORMAT_JSON; }

}  // namespace

extern "C" {

const char* npamp_version(void) { return NPAMP_VERSION; }

const char* npamp_last_error(void) { return g_last_error.c_str(); }

npamp_status npamp_config_new(npamp_config** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new npamp_config{}; });
}

npamp_status npamp_config_from_json(const char* text, npamp_config** out) {
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new npamp_config{npamp::parse_config(text)}; });
}

npamp_status npamp_config_from_file(const char* path, npamp_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new npamp_config{npamp::load_config(path)}; });
}

npamp_status npamp_config_set(npamp_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("cfg");
  if (!key) return null_arg("key");
  if (!value) return null_arg("value");
  // Apply to a copy so a rejected value leaves the config untouched.
  return guarded([&] {
    npamp::ConfigDocument doc = cfg->doc;
    npamp::apply_setting(doc, key, value);
    cfg->doc = std::move(doc);
  });
}

void npamp_config_free(npamp_config* cfg) { delete cfg; }

npamp_status npamp_run_scenario(const npamp_config* cfg, npamp_results** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto res = std::make_unique<npamp_results>();
    res->command = "scenario";
    res->reports.push_back(npamp::run_scenario(cfg->doc.scenario));
    *out = res.release();
  });
}

npamp_status npamp_run_sweep(const npamp_config* cfg, npamp_results** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto res = std::make_unique<npamp_results>();
    res->command = "sweep";
    res->reports = npamp::run_sweep(cfg->doc.sweep_spec(), cfg->doc.workers);
    *out = res.release();
  });
}

npamp_status npamp_run_table(const npamp_config* cfg, npamp_results** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const npamp::TableSpec spec = cfg->doc.table_spec();
    spec.base.validate();
    auto res = std::make_unique<npamp_results>();
    res->command = "table";
    res->reports = npamp::run_table(spec, cfg->doc.workers);
    *out = res.release();
  });
}

npamp_status npamp_run_converge(const npamp_config* cfg, npamp_results** out) {
  if (!cfg) return null_arg("cfg");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto res = std::make_unique<npamp_results>();
    res->command = "converge";
    res->converge = npamp::run_converge(cfg->doc.converge_spec(), cfg->doc.workers);
    *out = res.release();
  });
}

size_t npamp_results_size(const npamp_results* res) { return res ? res->size() : 0; }

size_t npamp_results_failed(const npamp_results* res) {
  size_t n = 0;
  for (size_t i = 0; res && i < res->size(); ++i) n += res->at(i).ok() ? 0 : 1;
  return n;
}

size_t npamp_results_unconverged(const npamp_results* res) {
  size_t n = 0;
  for (size_t i = 0; res && i < res->size(); ++i) {
    const auto& r = res->at(i);
    n += r.ok() && !r.convergence.converged ? 1 : 0;
  }
  return n;
}

npamp_status npamp_results_get(const npamp_results* res, size_t index, npamp_report* out) {
  if (!res) return null_arg("res");
  if (!out) return null_arg("out");
  if (index >= res->size()) return record(NPAMP_INVALID_ARGUMENT, "index out of range");
  const npamp::ScenarioReport& r = res->at(index);
  const npamp::ScenarioConfig& c = r.config;
  npamp_report o{};
  o.r = c.tmsv.squeezing;
  o.delta = c.amplifier.delta;
  o.delta_prime = c.effective_delta_prime();
  o.m_add = c.amplifier.m_add;
  o.n_sub = c.amplifier.n_sub;
  o.eta = c.channel.eta;
  o.n_t = c.channel.n_t;
  o.kind_a = c.kind_a == npamp::MeasurementKind::homodyne ? NPAMP_HOMODYNE : NPAMP_HETERODYNE;
  o.kind_b = c.kind_b == npamp::MeasurementKind::homodyne ? NPAMP_HOMODYNE : NPAMP_HETERODYNE;
  o.ancilla = c.noise_model == npamp::NoiseModel::ancilla ? 1 : 0;
  o.i0_bits = r.i0;
  o.i_bits = r.i;
  o.d_i_bits = r.d_i;
  o.h_ea0 = r.h_ea0;
  o.h_ea = r.h_ea;
  o.h_eb0 = r.h_eb0;
  o.h_eb = r.h_eb;
  o.success_weight = r.success_weight;
  o.purity = r.purity;
  o.converged = r.ok() && r.convergence.converged ? 1 : 0;
  o.failed = r.ok() ? 0 : 1;
  o.cutoff = r.cutoff;
  o.grid_factor = res->is_converge() ? res->converge[index].grid_factor : 1;
  o.cutoff_delta = r.convergence.cutoff_delta;
  o.grid_delta = r.convergence.grid_delta;
  *out = o;
  return NPAMP_OK;
}

const char* npamp_results_error(const npamp_results* res, size_t index) {
  if (!res || index >= res->size()) return "";
  return res->at(index).error.c_str();
}

npamp_status npamp_results_to_string(const npamp_results* res, npamp_format format, char** out) {
  if (!res) return null_arg("res");
  if (!out) return null_arg("out");
  if (!valid_format(format)) return record(NPAMP_INVALID_ARGUMENT, "unknown format");
  *out = nullptr;
  return guarded([&] {
    const std::string text = render(*res, format);
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

npamp_status npamp_results_write(const npamp_results* res, npamp_format format, const char* path) {
  if (!res) return null_arg("res");
  if (!path) return null_arg("path");
  if (!valid_format(format)) return record(NPAMP_INVALID_ARGUMENT, "unknown format");
  return guarded([&] { npamp::write_text_file(path, render(*res, format)); });
}

void npamp_results_free(npamp_results* res) { delete res; }

void npamp_string_free(char* s) { std::free(s); }

npamp_status npamp_gaussian_mutual_information(double r, double eta, double n_t, int kind_a, int kind_b,
                                               double* out_bits) {
  if (!out_bits) return null_arg("out_bits");
  return guarded([&] {
    npamp::ChannelConfig ch;
    ch.eta = eta;
    ch.n_t = n_t;
    const auto v = npamp::channel_covariance(npamp::tmsv_covariance({r}), ch);
    *out_bits = npamp::gaussian_mutual_information(v, kind_from(kind_a) == npamp::MeasurementKind::heterodyne,
                                                   kind_from(kind_b) == npamp::MeasurementKind::heterodyne);
  });
}

}  // extern "C"
