#include "npamp/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace npamp {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  fail(ErrorKind::config, key + ": " + what);
}

double as_number(const std::string& key, const json& v) {
  if (!v.is_number()) bad(key, "expected a number");
  return v.get<double>();
}

int as_int(const std::string& key, const json& v) {
  if (!v.is_number_integer()) bad(key, "expected an integer");
  return v.get<int>();
}

bool as_bool(const std::string& key, const json& v) {
  if (!v.is_boolean()) bad(key, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) bad(key, "expected a string");
  return v.get<std::string>();
}

MeasurementKind as_kind(const std::string& key, const json& v) {
  const std::string s = as_string(key, v);
  if (s == "homodyne" || s == "hom") return MeasurementKind::homodyne;
  if (s == "heterodyne" || s == "het") return MeasurementKind::heterodyne;
  bad(key, "unknown measurement '" + s + "' (homodyne|heterodyne)");
}

void set_amplifier_preset(AmplifierConfig& amp, const std::string& key, const std::string& name) {
  if (name == "none") {
    amp.m_add = 0;
    amp.n_sub = 0;
    return;
  }
  const auto op = operation_by_name(name);
  if (!op) bad(key, "unknown amplifier preset '" + name + "' (hfa|npa1|npa2|npa3|none)");
  amp.m_add = op->m_add;
  amp.n_sub = op->n_sub;
}

void set_channel_preset(ChannelConfig& ch, const std::string& key, const std::string& name) {
  const auto preset = channel_preset(name);
  if (!preset) bad(key, "unknown channel '" + name + "' (ideal|noisy|lossy|realistic)");
  ch.eta = preset->eta;
  ch.n_t = preset->n_t;
}

std::vector<SweepAxis> as_axes(const std::string& key, const json& v) {
  if (!v.is_array()) bad(key, "expected an array of axes");
  std::vector<SweepAxis> axes;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const std::string path = key + "[" + std::to_string(k) + "]";
    const json& a = v[k];
    if (!a.is_object()) bad(path, "expected an object");
    SweepAxis axis;
    for (const auto& [name, val] : a.items()) {
      if (name == "name") axis.name = as_string(path + ".name", val);
      else if (name == "min") axis.min = as_number(path + ".min", val);
      else if (name == "max") axis.max = as_number(path + ".max", val);
      else if (name == "steps") axis.steps = as_int(path + ".steps", val);
      else bad(path + "." + name, "unknown key");
    }
    axes.push_back(axis);
  }
  return axes;
}

template <typename T, typename Conv>
std::vector<T> as_list(const std::string& key, const json& v, Conv conv) {
  if (!v.is_array()) bad(key, "expected an array");
  std::vector<T> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(conv(key + "[" + std::to_string(k) + "]", v[k]));
  return out;
}

void apply_json(ConfigDocument& doc, const std::string& key, const json& v);

void apply_object(ConfigDocument& doc, const std::string& prefix, const json& obj) {
  // A preset goes first so explicit fields next to it override it.
  if (obj.contains("preset")) apply_json(doc, prefix + ".preset", obj.at("preset"));
  for (const auto& [name, val] : obj.items()) {
    if (name != "preset") apply_json(doc, prefix + "." + name, val);
  }
}

void apply_json(ConfigDocument& doc, const std::string& key, const json& v) {
  ScenarioConfig& s = doc.scenario;
  if (key == "R" || key == "tmsv.R") {
    s.tmsv.squeezing = as_number(key, v);
  } else if (key == "tmsv") {
    if (!v.is_object()) bad(key, "expected an object");
    apply_object(doc, key, v);
  } else if (key == "channel" || key == "amplifier" || key == "grid" || key == "sweep" || key == "table" ||
             key == "converge") {
    if (v.is_string() && (key == "channel" || key == "amplifier")) {
      apply_json(doc, key + ".preset", v);
    } else if (v.is_object()) {
      apply_object(doc, key, v);
    } else {
      bad(key, "expected an object");
    }
  } else if (key == "channel.preset") {
    set_channel_preset(s.channel, key, as_string(key, v));
  } else if (key == "channel.eta") {
    s.channel.eta = as_number(key, v);
  } else if (key == "channel.n_t") {
    s.channel.n_t = as_number(key, v);
  } else if (key == "channel.n_t_convention") {
    const std::string c = as_string(key, v);
    if (c == "excess") s.channel.convention = NoiseConvention::excess;
    else if (c == "thermal") s.channel.convention = NoiseConvention::thermal;
    else bad(key, "unknown convention '" + c + "' (excess|thermal)");
  } else if (key == "amplifier.preset") {
    set_amplifier_preset(s.amplifier, key, as_string(key, v));
  } else if (key == "amplifier.delta") {
    s.amplifier.delta = as_number(key, v);
  } else if (key == "amplifier.m_add") {
    s.amplifier.m_add = as_int(key, v);
  } else if (key == "amplifier.n_sub") {
    s.amplifier.n_sub = as_int(key, v);
  } else if (key == "amplifier.radial_nodes") {
    s.amplifier.quadrature.radial_nodes = as_int(key, v);
  } else if (key == "amplifier.angular_nodes") {
    s.amplifier.quadrature.angular_nodes = as_int(key, v);
  } else if (key == "noise_model") {
    const std::string m = as_string(key, v);
    if (m == "gaussian") s.noise_model = NoiseModel::gaussian;
    else if (m == "ancilla") s.noise_model = NoiseModel::ancilla;
    else bad(key, "unknown noise model '" + m + "' (gaussian|ancilla)");
    doc.noise_model_explicit = true;
  } else if (key == "delta_prime") {
    s.delta_prime = v.is_null() ? kNaN : as_number(key, v);
  } else if (key == "kind_a") {
    s.kind_a = as_kind(key, v);
  } else if (key == "kind_b") {
    s.kind_b = as_kind(key, v);
  } else if (key == "protocol") {
    const std::string p = as_string(key, v);
    const auto dash = p.find('-');
    if (dash == std::string::npos) bad(key, "expected <kind_a>-<kind_b>, e.g. hom-het");
    s.kind_a = as_kind(key, p.substr(0, dash));
    s.kind_b = as_kind(key, p.substr(dash + 1));
  } else if (key == "cutoff") {
    s.cutoff = as_int(key, v);
    doc.cutoff_explicit = true;
  } else if (key == "grid.homodyne_points") {
    s.grid.homodyne_points = as_int(key, v);
  } else if (key == "grid.heterodyne_points") {
    s.grid.heterodyne_points = as_int(key, v);
  } else if (key == "grid.span_sigmas") {
    s.grid.span_sigmas = as_number(key, v);
  } else if (key == "reconciliation") {
    const std::string r = as_string(key, v);
    if (r == "none") s.reconciliation = Reconciliation::none;
    else if (r == "direct") s.reconciliation = Reconciliation::direct;
    else if (r == "reverse") s.reconciliation = Reconciliation::reverse;
    else if (r == "both") s.reconciliation = Reconciliation::both;
    else bad(key, "unknown reconciliation '" + r + "' (none|direct|reverse|both)");
  } else if (key == "placement") {
    const std::string p = as_string(key, v);
    if (p == "after") s.placement = Placement::after;
    else if (p == "before") s.placement = Placement::before;
    else bad(key, "unknown placement '" + p + "' (after|before)");
  } else if (key == "convergence_check") {
    s.convergence_check = as_bool(key, v);
  } else if (key == "convergence_tolerance") {
    s.convergence_tolerance = as_number(key, v);
  } else if (key == "label") {
    s.label = as_string(key, v);
  } else if (key == "workers") {
    doc.workers = as_int(key, v);
    if (doc.workers < 1) bad(key, "must be >= 1");
  } else if (key == "sweep.axes") {
    doc.sweep_axes = as_axes(key, v);
  } else if (key == "sweep.operations") {
    doc.sweep_operations = as_list<Operation>(key, v, [](const std::string& k, const json& e) {
      const std::string name = as_string(k, e);
      const auto op = operation_by_name(name);
      if (!op) bad(k, "unknown operation '" + name + "' (hfa|npa1|npa2|npa3)");
      return *op;
    });
  } else if (key == "table.deltas") {
    doc.table_deltas = as_list<double>(key, v, as_number);
  } else if (key == "table.npa_subtractions") {
    doc.table_npa_subtractions = as_int(key, v);
  } else if (key == "converge.cutoff_offsets") {
    doc.converge_cutoff_offsets = as_list<int>(key, v, as_int);
  } else if (key == "converge.grid_factors") {
    doc.converge_grid_factors = as_list<int>(key, v, as_int);
  } else {
    bad(key, "unknown key");
  }
}

}  // namespace

SweepSpec ConfigDocument::sweep_spec() const {
  SweepSpec spec = SweepSpec::surface_default(scenario);
  if (sweep_axes) spec.axes = *sweep_axes;
  if (sweep_operations) spec.operations = *sweep_operations;
  return spec;
}

TableSpec ConfigDocument::table_spec() const {
  ScenarioConfig base = scenario;
  if (!noise_model_explicit) base.noise_model = NoiseModel::ancilla;
  TableSpec spec = TableSpec::standard(base);
  spec.deltas = table_deltas;
  spec.npa_subtractions = table_npa_subtractions;
  return spec;
}

ConvergeSpec ConfigDocument::converge_spec() const {
  ConvergeSpec spec;
  spec.base = scenario;
  spec.cutoff_offsets = converge_cutoff_offsets;
  spec.grid_factors = converge_grid_factors;
  return spec;
}

ConfigDocument parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail(ErrorKind::config, "config must be a JSON object");
  ConfigDocument doc;
  for (const auto& [key, val] : root.items()) apply_json(doc, key, val);
  return doc;
}

ConfigDocument load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorKind::io, "error reading config file '" + path + "'");
  return parse_config(buf.str());
}

void apply_setting(ConfigDocument& doc, const std::string& key, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;
  }
  apply_json(doc, key, v);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string> kReportColumns = {
    "R",     "delta",  "delta_prime", "m_add", "n_sub", "eta",  "n_t",   "kind_a",         "kind_b",
    "noise_model", "i0_bits", "i_bits", "d_i_bits", "h_ea0", "h_ea", "h_eb0", "h_eb", "success_weight",
    "purity", "converged"};

namespace {

bool row_converged(const ScenarioReport& r) { return r.ok() && r.convergence.converged; }

void csv_fields(std::ostringstream& out, const ScenarioReport& r) {
  const ScenarioConfig& c = r.config;
  const double values[] = {r.i0, r.i, r.d_i, r.h_ea0, r.h_ea, r.h_eb0, r.h_eb, r.success_weight, r.purity};
  out << format_double(c.tmsv.squeezing) << ',' << format_double(c.amplifier.delta) << ','
      << format_double(c.effective_delta_prime()) << ',' << c.amplifier.m_add << ',' << c.amplifier.n_sub << ','
      << format_double(c.channel.eta) << ',' << format_double(c.channel.n_t) << ',' << to_string(c.kind_a) << ','
      << to_string(c.kind_b) << ',' << to_string(c.noise_model);
  for (double v : values) out << ',' << format_double(v);
  out << ',' << (row_converged(r) ? "true" : "false");
}

std::string header(const std::vector<std::string>& extra = {}) {
  std::string h;
  for (const auto& c : kReportColumns) h += (h.empty() ? "" : ",") + c;
  for (const auto& c : extra) h += "," + c;
  return h + "\n";
}

ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json run_json(const ScenarioReport& r) {
  const ScenarioConfig& c = r.config;
  ordered_json j;
  j["R"] = c.tmsv.squeezing;
  j["delta"] = c.amplifier.delta;
  j["delta_prime"] = number(c.effective_delta_prime());
  j["m_add"] = c.amplifier.m_add;
  j["n_sub"] = c.amplifier.n_sub;
  j["eta"] = c.channel.eta;
  j["n_t"] = c.channel.n_t;
  j["kind_a"] = to_string(c.kind_a);
  j["kind_b"] = to_string(c.kind_b);
  j["noise_model"] = to_string(c.noise_model);
  j["i0_bits"] = number(r.i0);
  j["i_bits"] = number(r.i);
  j["d_i_bits"] = number(r.d_i);
  j["h_ea0"] = number(r.h_ea0);
  j["h_ea"] = number(r.h_ea);
  j["h_eb0"] = number(r.h_eb0);
  j["h_eb"] = number(r.h_eb);
  j["success_weight"] = number(r.success_weight);
  j["purity"] = number(r.purity);
  j["converged"] = row_converged(r);
  j["label"] = c.label;
  j["n_t_convention"] = to_string(c.channel.convention);
  j["reconciliation"] = to_string(c.reconciliation);
  j["placement"] = to_string(c.placement);
  j["cutoff"] = r.cutoff;
  j["grid"] = {{"homodyne_points", c.grid.homodyne_points},
               {"heterodyne_points_per_axis", c.grid.heterodyne_points},
               {"span_sigmas", c.grid.span_sigmas},
               {"points_a", r.grid_points_a},
               {"points_b", r.grid_points_b}};
  j["quadrature"] = {{"radial_nodes", c.amplifier.quadrature.radial_nodes},
                     {"angular_nodes", c.amplifier.quadrature.angular_nodes}};
  j["convergence"] = {{"checked", r.convergence.checked},
                      {"cutoff_delta", number(r.convergence.cutoff_delta)},
                      {"grid_delta", number(r.convergence.grid_delta)},
                      {"tolerance", c.convergence_tolerance}};
  if (!row_converged(r)) j["flags"] = ordered_json::array({r.ok() ? "unconverged" : "failed"});
  if (!r.ok()) {
    j["error"] = r.error;
    j["error_kind"] = to_string(*r.error_kind);
  }
  return j;
}

ordered_json metadata(const std::string& command, const std::vector<const ScenarioReport*>& reports) {
  std::string convention = "excess";
  if (!reports.empty()) convention = to_string(reports.front()->config.channel.convention);
  for (const auto* r : reports) {
    if (convention != to_string(r->config.channel.convention)) convention = "mixed";
  }
  ordered_json m;
  m["version"] = NPAMP_VERSION;
  m["command"] = command;
  m["units"] = "bits";
  m["log_base"] = 2;
  m["vacuum_variance"] = 0.5;
  m["quadrature"] = "x = (a + a^dag)/sqrt(2)";
  m["n_t_convention"] = convention;
  m["n_t_meaning"] = {
      {"excess", "Bob's quadrature variance gains (1 - eta)/2 + N_T"},
      {"thermal", "Bob's quadrature variance gains (1 - eta)(1/2 + N_T)"}};
  m["columns"] = kReportColumns;
  return m;
}

}  // namespace

std::string reports_csv(const std::vector<ScenarioReport>& reports) {
  std::ostringstream out;
  out << header();
  for (const auto& r : reports) {
    csv_fields(out, r);
    out << '\n';
  }
  return out.str();
}

std::string reports_json(const std::vector<ScenarioReport>& reports, const std::string& command) {
  std::vector<const ScenarioReport*> ptrs;
  for (const auto& r : reports) ptrs.push_back(&r);
  ordered_json root;
  root["metadata"] = metadata(command, ptrs);
  root["runs"] = ordered_json::array();
  for (const auto& r : reports) root["runs"].push_back(run_json(r));
  return root.dump(2) + "\n";
}

std::string converge_csv(const std::vector<ConvergeRow>& rows) {
  std::ostringstream out;
  out << header({"cutoff", "grid_factor"});
  for (const auto& row : rows) {
    csv_fields(out, row.report);
    out << ',' << row.cutoff << ',' << row.grid_factor << '\n';
  }
  return out.str();
}

std::string converge_json(const std::vector<ConvergeRow>& rows) {
  std::vector<const ScenarioReport*> ptrs;
  for (const auto& r : rows) ptrs.push_back(&r.report);
  ordered_json root;
  root["metadata"] = metadata("converge", ptrs);
  root["runs"] = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json j = run_json(row.report);
    j["grid_factor"] = row.grid_factor;
    root["runs"].push_back(std::move(j));
  }
  return root.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) fail(ErrorKind::io, "error writing '" + path + "'");
}

}  // namespace npamp
