// Exercises libnpamp through its C interface only.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include <doctest.h>

#include "npamp/npamp.h"

namespace {

struct Config {
  npamp_config* p = nullptr;
  ~Config() { npamp_config_free(p); }
};

struct Results {
  npamp_results* p = nullptr;
  ~Results() { npamp_results_free(p); }
};

std::string to_text(const npamp_results* res, npamp_format fmt) {
  char* s = nullptr;
  REQUIRE(npamp_results_to_string(res, fmt, &s) == NPAMP_OK);
  std::string out(s);
  npamp_string_free(s);
  return out;
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("version and error channel") {
  CHECK(std::strlen(npamp_version()) > 0);
  CHECK(npamp_config_new(nullptr) == NPAMP_INVALID_ARGUMENT);
  CHECK(std::string(npamp_last_error()).find("out") != std::string::npos);
}

TEST_CASE("config handles") {
  Config c;
  REQUIRE(npamp_config_new(&c.p) == NPAMP_OK);
  CHECK(npamp_config_set(c.p, "R", "0.2") == NPAMP_OK);
  CHECK(std::string(npamp_last_error()).empty());
  CHECK(npamp_config_set(c.p, "channel", "realistic") == NPAMP_OK);
  CHECK(npamp_config_set(c.p, "no_such_key", "1") == NPAMP_CONFIG);
  CHECK(std::string(npamp_last_error()).find("no_such_key") != std::string::npos);
  CHECK(npamp_config_set(c.p, "channel.eta", "\"wide\"") == NPAMP_CONFIG);
  CHECK(npamp_config_set(nullptr, "R", "0.2") == NPAMP_INVALID_ARGUMENT);
  CHECK(npamp_config_set(c.p, nullptr, "0.2") == NPAMP_INVALID_ARGUMENT);

  Config j;
  CHECK(npamp_config_from_json("{\"R\": 0.2, \"extra\": 1}", &j.p) == NPAMP_CONFIG);
  CHECK(j.p == nullptr);
  CHECK(npamp_config_from_json("[1, 2", &j.p) == NPAMP_CONFIG);
  Config f;
  CHECK(npamp_config_from_file("/nonexistent/config.json", &f.p) == NPAMP_IO);
}

TEST_CASE("rejected settings leave the config untouched") {
  Config c;
  REQUIRE(npamp_config_from_json("{\"R\": 0.2, \"cutoff\": 12, \"convergence_check\": false, "
                                 "\"reconciliation\": \"none\"}",
                                 &c.p) == NPAMP_OK);
  CHECK(npamp_config_set(c.p, "sweep.axes", "[{\"name\": \"R\", \"min\": 0.1, \"bad\": 2}]") == NPAMP_CONFIG);
  Results r;
  REQUIRE(npamp_run_scenario(c.p, &r.p) == NPAMP_OK);
  npamp_report rep;
  REQUIRE(npamp_results_get(r.p, 0, &rep) == NPAMP_OK);
  CHECK(rep.r == 0.2);
  CHECK(rep.cutoff == 12);
}

TEST_CASE("scenario run and report access") {
  Config c;
  REQUIRE(npamp_config_new(&c.p) == NPAMP_OK);
  REQUIRE(npamp_config_set(c.p, "cutoff", "15") == NPAMP_OK);
  REQUIRE(npamp_config_set(c.p, "convergence_check", "false") == NPAMP_OK);
  REQUIRE(npamp_config_set(c.p, "channel", "lossy") == NPAMP_OK);
  Results r;
  REQUIRE(npamp_run_scenario(c.p, &r.p) == NPAMP_OK);
  REQUIRE(npamp_results_size(r.p) == 1);
  CHECK(npamp_results_failed(r.p) == 0);
  CHECK(npamp_results_unconverged(r.p) == 0);

  npamp_report rep;
  REQUIRE(npamp_results_get(r.p, 0, &rep) == NPAMP_OK);
  CHECK(rep.r == 0.3);
  CHECK(rep.eta == 0.9);
  CHECK(rep.m_add == 1);
  CHECK(rep.n_sub == 1);
  CHECK(rep.kind_a == NPAMP_HOMODYNE);
  CHECK(rep.ancilla == 0);
  CHECK(rep.converged == 1);
  CHECK(rep.failed == 0);
  CHECK(rep.grid_factor == 1);
  CHECK(std::abs(rep.d_i_bits - (rep.i_bits - rep.i0_bits)) < 1e-12);
  CHECK(rep.h_ea0 > 0.0);
  CHECK(std::string(npamp_results_error(r.p, 0)).empty());

  double gauss = 0.0;
  REQUIRE(npamp_gaussian_mutual_information(0.3, 0.9, 0.0, NPAMP_HOMODYNE, NPAMP_HOMODYNE, &gauss) == NPAMP_OK);
  CHECK(std::abs(rep.i0_bits - gauss) < 1e-3);

  CHECK(npamp_results_get(r.p, 1, &rep) == NPAMP_INVALID_ARGUMENT);
  CHECK(npamp_results_get(r.p, 0, nullptr) == NPAMP_INVALID_ARGUMENT);
  CHECK(std::string(npamp_results_error(r.p, 5)).empty());

  const std::string csv = to_text(r.p, NPAMP_FORMAT_CSV);
  CHECK(csv.rfind("R,delta,delta_prime,m_add,n_sub,eta,n_t,kind_a,kind_b,noise_model,i0_bits,", 0) == 0);
  CHECK(csv == to_text(r.p, NPAMP_FORMAT_CSV));
  const std::string json = to_text(r.p, NPAMP_FORMAT_JSON);
  CHECK(json.find("\"metadata\"") != std::string::npos);
  char* s = nullptr;
  CHECK(npamp_results_to_string(r.p, static_cast<npamp_format>(7), &s) == NPAMP_INVALID_ARGUMENT);

  CHECK(npamp_results_write(r.p, NPAMP_FORMAT_CSV, "/nonexistent/dir/x.csv") == NPAMP_IO);
  const char* path = "capi_test_output.csv";
  REQUIRE(npamp_results_write(r.p, NPAMP_FORMAT_CSV, path) == NPAMP_OK);
  std::FILE* fp = std::fopen(path, "rb");
  REQUIRE(fp);
  std::string back;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, fp)) > 0;) back.append(buf, n);
  std::fclose(fp);
  std::remove(path);
  CHECK(back == csv);
}

TEST_CASE("numerical failures map to status codes") {
  Config c;
  REQUIRE(npamp_config_new(&c.p) == NPAMP_OK);
  REQUIRE(npamp_config_set(c.p, "R", "0.9") == NPAMP_OK);
  REQUIRE(npamp_config_set(c.p, "cutoff", "4") == NPAMP_OK);
  Results r;
  CHECK(npamp_run_scenario(c.p, &r.p) == NPAMP_NUMERICAL);
  CHECK(r.p == nullptr);
  CHECK(std::string(npamp_last_error()).find("truncation") != std::string::npos);

  REQUIRE(npamp_config_set(c.p, "R", "1.5") == NPAMP_OK);
  CHECK(npamp_run_scenario(c.p, &r.p) == NPAMP_CONFIG);
  CHECK(npamp_run_scenario(nullptr, &r.p) == NPAMP_INVALID_ARGUMENT);

  double v = 0.0;
  CHECK(npamp_gaussian_mutual_information(0.3, 1.0, 0.0, 9, NPAMP_HOMODYNE, &v) == NPAMP_CONFIG);
  CHECK(npamp_gaussian_mutual_information(0.3, 1.0, 0.0, 0, 0, nullptr) == NPAMP_INVALID_ARGUMENT);
}

TEST_CASE("sweeps and converge studies") {
  Config c;
  REQUIRE(npamp_config_from_json(R"({"cutoff": 12, "convergence_check": false, "reconciliation": "none",
      "sweep": {"axes": [{"name": "R", "min": 0.1, "max": 0.2, "steps": 2}], "operations": ["npa1", "hfa"]},
      "converge": {"cutoff_offsets": [0, 3], "grid_factors": [1]}})",
                                 &c.p) == NPAMP_OK);
  Results s;
  REQUIRE(npamp_run_sweep(c.p, &s.p) == NPAMP_OK);
  CHECK(npamp_results_size(s.p) == 4);
  npamp_report rep;
  REQUIRE(npamp_results_get(s.p, 1, &rep) == NPAMP_OK);
  CHECK(rep.n_sub == 1);
  CHECK(rep.m_add == 0);
  CHECK(rep.r == 0.2);

  Results cv;
  REQUIRE(npamp_run_converge(c.p, &cv.p) == NPAMP_OK);
  REQUIRE(npamp_results_size(cv.p) == 2);
  REQUIRE(npamp_results_get(cv.p, 1, &rep) == NPAMP_OK);
  CHECK(rep.cutoff == 15);
  const std::string csv = to_text(cv.p, NPAMP_FORMAT_CSV);
  CHECK(csv.substr(0, csv.find('\n')).find(",cutoff,grid_factor") != std::string::npos);
}

TEST_CASE("null handles are harmless") {
  npamp_config_free(nullptr);
  npamp_results_free(nullptr);
  npamp_string_free(nullptr);
  CHECK(npamp_results_size(nullptr) == 0);
  CHECK(npamp_results_failed(nullptr) == 0);
}

}  // TEST_SUITE
