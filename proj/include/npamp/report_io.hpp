#pragma once

// JSON configuration documents and CSV/JSON report emission.

#include <optional>
#include <string>
#include <vector>

#include "npamp/scenario.hpp"

namespace npamp {

// Everything a batch run needs. `sweep` stays empty unless the document
// defines axes; the CLI then falls back to the default (R, delta) surfaces.
struct ConfigDocument {
  ScenarioConfig scenario;
  std::optional<std::vector<SweepAxis>> sweep_axes;
  std::optional<std::vector<Operation>> sweep_operations;
  std::vector<double> table_deltas{0.0, 0.1, 0.2};
  int table_npa_subtractions = 2;
  std::vector<int> converge_cutoff_offsets{0, 5, 10};
  std::vector<int> converge_grid_factors{1, 2};
  int workers = 1;
  bool noise_model_explicit = false;
  bool cutoff_explicit = false;

  SweepSpec sweep_spec() const;
  // The table defaults to the ancilla noise model unless one was chosen.
  TableSpec table_spec() const;
  ConvergeSpec converge_spec() const;
};

// Throws ErrorKind::config (malformed JSON, unknown keys, bad values).
ConfigDocument parse_config(const std::string& json_text);
// Throws ErrorKind::io if the file cannot be read.
ConfigDocument load_config(const std::string& path);

// Dotted key (e.g. "channel.eta", "amplifier", "sweep.axes"); the value is
// read as JSON when it parses, otherwise as a bare string.
void apply_setting(ConfigDocument& doc, const std::string& key, const std::string& value);

enum class OutputFormat { csv, json };

// %.17g; "nan" / "inf" / "-inf" for non-finite values.
std::string format_double(double v);

extern const std::vector<std::string> kReportColumns;

std::string reports_csv(const std::vector<ScenarioReport>& reports);
std::string reports_json(const std::vector<ScenarioReport>& reports, const std::string& command);

std::string converge_csv(const std::vector<ConvergeRow>& rows);
std::string converge_json(const std::vector<ConvergeRow>& rows);

// Throws ErrorKind::io.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace npamp
