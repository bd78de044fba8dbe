#ifndef NPAMP_H
#define NPAMP_H

#include <stddef.h>

#if defined(NPAMP_BUILDING_LIBRARY)
#define NPAMP_API __attribute__((visibility("default")))
#else
#define NPAMP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum npamp_status {
  NPAMP_OK = 0,
  NPAMP_INVALID_ARGUMENT = 1,
  NPAMP_CONFIG = 2,
  NPAMP_NUMERICAL = 3,
  NPAMP_IO = 4,
  NPAMP_INTERNAL = 5
} npamp_status;

typedef enum npamp_format { NPAMP_FORMAT_CSV = 0, NPAMP_FORMAT_JSON = 1 } npamp_format;

typedef enum npamp_kind { NPAMP_HOMODYNE = 0, NPAMP_HETERODYNE = 1 } npamp_kind;

typedef struct npamp_config npamp_config;
typedef struct npamp_results npamp_results;

/* One row of a result set. Quantities not computed are NaN. */
typedef struct npamp_report {
  double r;
  double delta;
  double delta_prime;
  int m_add;
  int n_sub;
  double eta;
  double n_t;
  int kind_a; /* npamp_kind */
  int kind_b;
  int ancilla; /* 1 for the ancilla noise model */
  double i0_bits;
  double i_bits;
  double d_i_bits;
  double h_ea0;
  double h_ea;
  double h_eb0;
  double h_eb;
  double success_weight;
  double purity;
  int converged;
  int failed;
  int cutoff;
  int grid_factor; /* converge rows; 1 otherwise */
  double cutoff_delta;
  double grid_delta;
} npamp_report;

NPAMP_API const char* npamp_version(void);

/* Message of the last failed call on this thread ("" if none). */
NPAMP_API const char* npamp_last_error(void);

NPAMP_API npamp_status npamp_config_new(npamp_config** out);
NPAMP_API npamp_status npamp_config_from_json(const char* text, npamp_config** out);
NPAMP_API npamp_status npamp_config_from_file(const char* path, npamp_config** out);
/* Dotted keys as in the JSON document, e.g. "channel.eta" or "amplifier". */
NPAMP_API npamp_status npamp_config_set(npamp_config* cfg, const char* key, const char* value);
NPAMP_API void npamp_config_free(npamp_config* cfg);

NPAMP_API npamp_status npamp_run_scenario(const npamp_config* cfg, npamp_results** out);
NPAMP_API npamp_status npamp_run_sweep(const npamp_config* cfg, npamp_results** out);
NPAMP_API npamp_status npamp_run_table(const npamp_config* cfg, npamp_results** out);
NPAMP_API npamp_status npamp_run_converge(const npamp_config* cfg, npamp_results** out);

NPAMP_API size_t npamp_results_size(const npamp_results* res);
NPAMP_API size_t npamp_results_failed(const npamp_results* res);
NPAMP_API size_t npamp_results_unconverged(const npamp_results* res);
NPAMP_API npamp_status npamp_results_get(const npamp_results* res, size_t index, npamp_report* out);
/* Error message of a failed row, "" otherwise. Owned by `res`. */
NPAMP_API const char* npamp_results_error(const npamp_results* res, size_t index);
/* Caller frees *out with npamp_string_free. */
NPAMP_API npamp_status npamp_results_to_string(const npamp_results* res, npamp_format format, char** out);
NPAMP_API npamp_status npamp_results_write(const npamp_results* res, npamp_format format, const char* path);
NPAMP_API void npamp_results_free(npamp_results* res);
NPAMP_API void npamp_string_free(char* s);

/* Closed-form Gaussian mutual information of the TMSV after the channel. */
NPAMP_API npamp_status npamp_gaussian_mutual_information(double r, double eta, double n_t, int kind_a,
                                                         int kind_b, double* out_bits);

#ifdef __cplusplus
}
#endif

#endif /* NPAMP_H */
