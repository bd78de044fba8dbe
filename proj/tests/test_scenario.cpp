#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "npamp/report_io.hpp"

using namespace npamp;

namespace {

ScenarioConfig quick(double r = 0.3) {
  ScenarioConfig c;
  c.tmsv.squeezing = r;
  c.cutoff = 15;
  c.convergence_check = false;
  return c;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::numerical;  // sentinel: nothing thrown
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("default scenario on the ideal channel") {
  ScenarioConfig c;
  const ScenarioReport r = run_scenario(c);
  REQUIRE(r.ok());
  CHECK(r.cutoff == 20);
  CHECK(std::abs(r.i0 - gaussian_homhom_mi(tmsv_covariance({0.3}))) < 1e-3);
  CHECK(std::abs(r.d_i - (r.i - r.i0)) < 1e-12);
  CHECK(r.d_i > 0.0);
  for (double h : {r.h_ea0, r.h_ea, r.h_eb0, r.h_eb}) CHECK(std::abs(h) < 2e-3);
  CHECK(std::abs(r.purity - 1.0) < 1e-6);
  // Tr[K rho K^dag] with K = a a^dag = n + 1 on a thermal marginal.
  const double nb = std::pow(std::sinh(0.3), 2);
  CHECK(std::abs(r.success_weight - (1 + 3 * nb + 2 * nb * nb)) < 1e-8);
  CHECK(r.convergence.checked);
  CHECK(r.convergence.converged);
  CHECK(r.convergence.cutoff_delta < 1e-3);
  CHECK(r.convergence.grid_delta < 1e-3);
}

TEST_CASE("baseline matches the gaussian closed form on every protocol") {
  using K = MeasurementKind;
  ScenarioConfig c = quick();
  c.channel = {0.9, 0.1};
  c.reconciliation = Reconciliation::none;
  for (auto [ka, kb] : {std::pair{K::homodyne, K::homodyne}, std::pair{K::heterodyne, K::heterodyne},
                        std::pair{K::homodyne, K::heterodyne}, std::pair{K::heterodyne, K::homodyne}}) {
    c.kind_a = ka;
    c.kind_b = kb;
    const ScenarioReport r = run_scenario(c);
    REQUIRE(r.ok());
    const double expect = gaussian_mutual_information(channel_covariance(tmsv_covariance({0.3}), c.channel),
                                                      ka == K::heterodyne, kb == K::heterodyne);
    CHECK(std::abs(r.i0 - expect) < 1e-3);
    CHECK(std::isnan(r.h_ea));
    CHECK(std::isnan(r.h_eb));
  }
}

TEST_CASE("reconciliation selects the holevo quantities") {
  ScenarioConfig c = quick();
  c.channel = {0.9, 0.1};
  c.reconciliation = Reconciliation::direct;
  const ScenarioReport d = run_scenario(c);
  CHECK(std::isfinite(d.h_ea));
  CHECK(std::isnan(d.h_eb));
  CHECK(d.h_ea0 > 0.0);
  c.reconciliation = Reconciliation::reverse;
  const ScenarioReport r = run_scenario(c);
  CHECK(std::isnan(r.h_ea));
  CHECK(std::isfinite(r.h_eb));
}

TEST_CASE("placement is irrelevant on the ideal channel") {
  ScenarioConfig c = quick();
  c.amplifier = AmplifierConfig::noise_powered(0.2, 1);
  const ScenarioReport after = run_scenario(c);
  c.placement = Placement::before;
  const ScenarioReport before = run_scenario(c);
  CHECK(std::abs(after.i - before.i) < 1e-10);
  CHECK(std::abs(after.h_ea - before.h_ea) < 1e-8);
}

TEST_CASE("noise step alone never increases the mutual information") {
  ScenarioConfig c = quick();
  c.reconciliation = Reconciliation::none;
  for (double delta : {0.1, 0.3}) {
    c.amplifier = AmplifierConfig{delta, 0, 0, {}};
    const ScenarioReport r = run_scenario(c);
    CHECK(r.d_i <= 1e-10);
    CHECK(r.i >= -1e-10);
  }
}

TEST_CASE("ancilla noise model") {
  ScenarioConfig c = quick();
  c.cutoff = 12;
  c.noise_model = NoiseModel::ancilla;
  c.amplifier = AmplifierConfig::noise_powered(0.1, 1);
  c.channel = {0.9, 0.1};
  const ScenarioReport r = run_scenario(c);
  REQUIRE(r.ok());
  CHECK(std::abs(c.effective_delta_prime() - 0.1) == 0.0);
  CHECK(r.h_ea >= -2e-3);
  CHECK(r.h_eb >= -2e-3);
  CHECK(r.purity < 1.0);

  c.placement = Placement::before;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::config);
  CHECK(kind_of([&] { run_scenario(c); }) == ErrorKind::config);
}

TEST_CASE("configuration validation names the field") {
  ScenarioConfig c;
  c.tmsv.squeezing = 1.5;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::config);
  CHECK(message_of([&] { c.validate(); }).find("tmsv.R") != std::string::npos);
  c = ScenarioConfig{};
  c.channel.eta = 0.0;
  CHECK(message_of([&] { c.validate(); }).find("channel") != std::string::npos);
  c = ScenarioConfig{};
  c.cutoff = 1;
  CHECK(message_of([&] { c.validate(); }).find("cutoff") != std::string::npos);
  c = ScenarioConfig{};
  c.amplifier.delta = -0.1;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::config);
}

TEST_CASE("truncation failures throw for one scenario and are recorded in sweeps") {
  ScenarioConfig c = quick(0.9);
  c.cutoff = 4;
  CHECK(kind_of([&] { run_scenario(c); }) == ErrorKind::truncation);
  CHECK(message_of([&] { run_scenario(c); }).find("tmsv") != std::string::npos);

  SweepSpec spec;
  spec.base = quick();
  spec.base.cutoff = 6;
  spec.base.reconciliation = Reconciliation::none;
  spec.axes = {{"R", 0.05, 0.9, 2}};
  const std::vector<ScenarioReport> rows = run_sweep(spec);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].ok());
  CHECK_FALSE(rows[1].ok());
  CHECK(rows[1].error_kind == ErrorKind::truncation);
  CHECK(std::isnan(rows[1].i));
  CHECK(reports_csv(rows).find(",nan,") != std::string::npos);
}

TEST_CASE("a one-point sweep reproduces the scenario") {
  SweepSpec spec;
  spec.base = quick();
  spec.base.amplifier = AmplifierConfig::noise_powered(0.1, 2);
  spec.axes = {{"R", 0.3, 0.5, 2}};
  const std::vector<ScenarioReport> rows = run_sweep(spec);
  REQUIRE(rows.size() == 2);
  const ScenarioReport single = run_scenario(spec.base);
  CHECK(rows[0].i == single.i);
  CHECK(rows[0].h_ea == single.h_ea);
  CHECK(rows[0].h_eb == single.h_eb);
  CHECK(rows[1].config.tmsv.squeezing == 0.5);
}

TEST_CASE("sweeps are smooth, ordered and worker-independent") {
  SweepSpec spec;
  spec.base = quick();
  spec.base.reconciliation = Reconciliation::none;
  spec.axes = {{"R", 0.1, 0.4, 4}, {"delta", 0.0, 0.1, 2}};
  spec.operations = {*operation_by_name("npa2"), *operation_by_name("hfa")};
  const std::vector<ScenarioReport> one = run_sweep(spec, 1);
  const std::vector<ScenarioReport> two = run_sweep(spec, 2);
  REQUIRE(one.size() == 16);
  REQUIRE(two.size() == 16);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].ok());
    CHECK(one[i].i == two[i].i);
    CHECK(one[i].config.label == two[i].config.label);
  }
  CHECK(one[0].config.label == "npa2");
  CHECK(one[8].config.label == "hfa");
  CHECK(one[1].config.amplifier.delta == 0.1);
  CHECK(one[4].config.tmsv.squeezing == 0.3);

  // I0 and I both grow with R.
  for (int op = 0; op < 2; ++op) {
    for (int k = 1; k < 4; ++k) {
      const auto& a = one[static_cast<std::size_t>(op * 8 + (k - 1) * 2)];
      const auto& b = one[static_cast<std::size_t>(op * 8 + k * 2)];
      CHECK(b.i0 > a.i0);
      CHECK(b.i > a.i);
    }
  }
  SweepSpec bad = spec;
  bad.axes = {{"eta", 0.1, 0.5, 3}};
  CHECK(kind_of([&] { run_sweep(bad); }) == ErrorKind::config);
}

TEST_CASE("default surface sweep") {
  const SweepSpec spec = SweepSpec::surface_default(ScenarioConfig{});
  REQUIRE(spec.axes.size() == 2);
  CHECK(spec.axes[0].name == "R");
  CHECK(spec.axes[1].name == "delta");
  CHECK(spec.operations.size() == 3);
  CHECK_NOTHROW(spec.validate());
}

TEST_CASE("table enumeration") {
  const TableSpec spec = TableSpec::standard(ScenarioConfig{});
  const std::vector<ScenarioConfig> cfgs = spec.enumerate();
  CHECK(cfgs.size() == 96);
  CHECK(cfgs.front().label == "ideal:npa2");
  CHECK(cfgs.back().label == "realistic:hfa");
  int hethet_realistic_npa = 0;
  for (const auto& c : cfgs) {
    if (c.label == "realistic:npa2" && c.kind_a == MeasurementKind::heterodyne &&
        c.kind_b == MeasurementKind::heterodyne) {
      ++hethet_realistic_npa;
      CHECK(c.channel.eta == 0.9);
      CHECK(c.channel.n_t == 0.1);
    }
  }
  CHECK(hethet_realistic_npa == 3);
  CHECK(channel_preset("noisy")->n_t == 0.1);
  CHECK_FALSE(channel_preset("bogus").has_value());
}

TEST_CASE("converge study layout") {
  ConvergeSpec spec;
  spec.base = quick();
  spec.base.reconciliation = Reconciliation::none;
  spec.cutoff_offsets = {0, 5};
  spec.grid_factors = {1, 2};
  const std::vector<ConvergeRow> rows = run_converge(spec);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].cutoff == 15);
  CHECK(rows[3].cutoff == 20);
  CHECK(rows[3].grid_factor == 2);
  for (const auto& r : rows) CHECK(std::abs(r.report.i - rows[0].report.i) < 1e-3);
}

TEST_CASE("config documents") {
  const ConfigDocument doc = parse_config(R"({
    "R": 0.25,
    "channel": {"preset": "lossy", "n_t": 0.05},
    "amplifier": {"preset": "npa3", "delta": 0.15},
    "noise_model": "ancilla",
    "delta_prime": 0.2,
    "protocol": "hom-het",
    "cutoff": 12,
    "grid": {"homodyne_points": 64},
    "reconciliation": "reverse",
    "sweep": {"axes": [{"name": "delta", "min": 0, "max": 0.4, "steps": 3}], "operations": ["hfa"]},
    "table": {"deltas": [0.0, 0.3]},
    "workers": 2
  })");
  const ScenarioConfig& s = doc.scenario;
  CHECK(s.tmsv.squeezing == 0.25);
  CHECK(s.channel.eta == 0.9);
  CHECK(s.channel.n_t == 0.05);
  CHECK(s.amplifier.n_sub == 3);
  CHECK(s.amplifier.m_add == 0);
  CHECK(s.amplifier.delta == 0.15);
  CHECK(s.noise_model == NoiseModel::ancilla);
  CHECK(s.delta_prime == 0.2);
  CHECK(s.kind_a == MeasurementKind::homodyne);
  CHECK(s.kind_b == MeasurementKind::heterodyne);
  CHECK(s.cutoff == 12);
  CHECK(s.grid.homodyne_points == 64);
  CHECK(s.reconciliation == Reconciliation::reverse);
  CHECK(doc.workers == 2);
  CHECK(doc.sweep_spec().axes.size() == 1);
  CHECK(doc.sweep_spec().operations.at(0).name == "hfa");
  CHECK(doc.table_spec().deltas.size() == 2);

  CHECK(kind_of([] { parse_config(R"({"R": 0.3, "bogus": 1})"); }) == ErrorKind::config);
  CHECK(message_of([] { parse_config(R"({"channel": {"etta": 1}})"); }).find("channel.etta") != std::string::npos);
  CHECK(kind_of([] { parse_config("{not json"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(R"({"R": "big"})"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config(R"({"channel": "stormy"})"); }) == ErrorKind::config);
  CHECK(kind_of([] { load_config("/nonexistent/npamp.json"); }) == ErrorKind::io);
}

TEST_CASE("table defaults to the ancilla model unless chosen") {
  CHECK(parse_config("{}").table_spec().base.noise_model == NoiseModel::ancilla);
  CHECK(parse_config(R"({"noise_model": "gaussian"})").table_spec().base.noise_model == NoiseModel::gaussian);
}

TEST_CASE("settings by dotted key") {
  ConfigDocument doc;
  apply_setting(doc, "channel.eta", "0.8");
  apply_setting(doc, "amplifier", "npa2");
  apply_setting(doc, "channel.n_t_convention", "thermal");
  CHECK(doc.scenario.channel.eta == 0.8);
  CHECK(doc.scenario.amplifier.n_sub == 2);
  CHECK(doc.scenario.channel.convention == NoiseConvention::thermal);
  CHECK(kind_of([&] { apply_setting(doc, "nope", "1"); }) == ErrorKind::config);
}

TEST_CASE("csv output") {
  const std::string empty = reports_csv({});
  CHECK(empty ==
        "R,delta,delta_prime,m_add,n_sub,eta,n_t,kind_a,kind_b,noise_model,i0_bits,i_bits,d_i_bits,"
        "h_ea0,h_ea,h_eb0,h_eb,success_weight,purity,converged\n");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(kNaN) == "nan");

  ScenarioConfig c = quick();
  c.reconciliation = Reconciliation::none;
  const ScenarioReport r = run_scenario(c);
  const std::string csv = reports_csv({r, r});
  CHECK(count_lines(csv) == 3);
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(row.rfind("0.29999999999999999,0,0,1,1,1,0,homodyne,homodyne,gaussian,", 0) == 0);
  CHECK(row.substr(row.size() - 4) == "true");
  double parsed = 0.0;
  std::size_t commas = 0, pos = 0;
  while (commas < 11) {
    pos = row.find(',', pos) + 1;
    ++commas;
  }
  parsed = std::stod(row.substr(pos));
  CHECK(parsed == r.i);
}

TEST_CASE("json output") {
  ScenarioConfig c = quick();
  c.channel = {0.9, 0.1};
  const ScenarioReport r = run_scenario(c);
  const auto j = nlohmann::json::parse(reports_json({r}, "scenario"));
  const auto& m = j.at("metadata");
  CHECK(m.at("log_base") == 2);
  CHECK(m.at("units") == "bits");
  CHECK(m.at("vacuum_variance") == 0.5);
  CHECK(m.at("n_t_convention") == "excess");
  CHECK(m.at("command") == "scenario");
  CHECK(m.at("version") == NPAMP_VERSION);
  CHECK(m.at("columns").size() == kReportColumns.size());
  const auto& run = j.at("runs").at(0);
  CHECK(run.at("i_bits").get<double>() == r.i);
  CHECK(run.at("h_ea").get<double>() == r.h_ea);
  CHECK(run.at("cutoff") == 15);
  CHECK(run.at("quadrature").at("radial_nodes") == 12);
  CHECK(run.at("quadrature").at("angular_nodes") == 16);
  CHECK(run.at("grid").at("homodyne_points") == 96);
  CHECK(reports_json({r}, "scenario") == reports_json({r}, "scenario"));
  CHECK(reports_json({r}, "scenario").find("time") == std::string::npos);
}

TEST_CASE("file output") {
  const std::string path = "npamp_test_output.csv";
  write_text_file(path, "x\n");
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x");
  std::remove(path.c_str());
  CHECK(kind_of([] { write_text_file("/nonexistent/dir/out.csv", "x"); }) == ErrorKind::io);
}

}  // TEST_SUITE
