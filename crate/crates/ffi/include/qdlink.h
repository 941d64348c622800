#ifndef QDLINK_H
#define QDLINK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QdStatus {
  QD_STATUS_OK = 0,
  QD_STATUS_NULL_ARGUMENT = 1,
  QD_STATUS_INVALID_UTF8 = 2,
  // Rejected configuration or parameter values.
  QD_STATUS_CONFIG = 3,
  // The run failed for a reason other than its inputs.
  QD_STATUS_RUNTIME = 4,
  QD_STATUS_IO = 5,
  QD_STATUS_NOT_FOUND = 6,
  QD_STATUS_PANIC = 7,
} QdStatus;

// Results of one preset run.
typedef struct QdBundle QdBundle;

// Parsed experiment configuration.
typedef struct QdConfig QdConfig;

// Emitter parameters without the label.
typedef struct QdEmitter {
  double t1_ps;
  double t2_ps;
  double m_consecutive;
  double g2_zero;
  double wavelength_nm;
  double eta_sys;
  double rep_rate_hz;
} QdEmitter;

// Link-budget scenario without the label.
typedef struct QdScenario {
  double rep_rate_hz;
  double eta_sys;
  double eta_det;
  double eta_qfc;
  double loss_db_per_km;
  double dark_rate_hz;
  double coincidence_window_ps;
  double kappa_sys;
} QdScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null after a success. The pointer
// stays valid until the next call into the library on the same thread.
const char *qd_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void qd_string_free(char *s);

// Parses a TOML document. `preset` may be null when the document names its preset.
//
// # Safety
// `toml` and a non-null `preset` must be NUL-terminated strings; `out` must be writable.
enum QdStatus qd_config_parse(const char *toml, const char *preset, struct QdConfig **out);

// # Safety
// `cfg` must be null or a handle from [`qd_config_parse`] not yet freed.
void qd_config_free(struct QdConfig *cfg);

// # Safety
// `cfg` must be a live config handle.
enum QdStatus qd_config_set_seed(struct QdConfig *cfg, uint64_t seed);

// Effective configuration as TOML, to be released with [`qd_string_free`].
//
// # Safety
// `cfg` must be a live config handle and `out` writable.
enum QdStatus qd_config_echo(const struct QdConfig *cfg, char **out);

// Runs the configured preset on `workers` threads (0 picks one per core).
//
// # Safety
// `cfg` must be a live config handle and `out` writable.
enum QdStatus qd_run_preset(const struct QdConfig *cfg, size_t workers, struct QdBundle **out);

// # Safety
// `bundle` must be null or a handle from [`qd_run_preset`] not yet freed.
void qd_bundle_free(struct QdBundle *bundle);

// Writes the bundle's files into `dir`, creating it if needed.
//
// # Safety
// `bundle` must be a live handle and `dir` a NUL-terminated path.
enum QdStatus qd_bundle_write(const struct QdBundle *bundle, const char *dir);

// Summary records as a JSON array.
//
// # Safety
// `bundle` must be a live handle and `out` writable.
enum QdStatus qd_bundle_summary_json(const struct QdBundle *bundle, char **out);

// Looks up one summary value by name.
//
// # Safety
// `bundle` must be a live handle, `name` NUL-terminated, `value` and `stderr` writable.
enum QdStatus qd_bundle_summary_value(const struct QdBundle *bundle,
                                      const char *name,
                                      double *value,
                                      double *stderr);

// # Safety
// `bundle` must be a live handle.
size_t qd_bundle_table_count(const struct QdBundle *bundle);

// Name and CSV text of table `index`; both strings are released with [`qd_string_free`].
//
// # Safety
// `bundle` must be a live handle; `name` and `csv` must be writable.
enum QdStatus qd_bundle_table(const struct QdBundle *bundle, size_t index, char **name, char **csv);

// Default parameters of source 1 or 2.
//
// # Safety
// `out` must be writable.
enum QdStatus qd_emitter_default(uint32_t index, struct QdEmitter *out);

// Two-photon interference visibility between independent sources detuned by `detuning_ghz`.
//
// # Safety
// `a` and `b` must point to valid emitters and `out` must be writable.
enum QdStatus qd_remote_visibility(const struct QdEmitter *a,
                                   const struct QdEmitter *b,
                                   double detuning_ghz,
                                   double *out);

// `which` is 0 for the present-day link and 1 for the projected one, both calibrated.
//
// # Safety
// `out` must be writable.
enum QdStatus qd_scenario_default(uint32_t which, struct QdScenario *out);

// Two-photon coincidence rate (Hz) over a link of `length_km` total fiber.
//
// # Safety
// `s` must point to a valid scenario and `out` must be writable.
enum QdStatus qd_coincidence_rate(double length_km, const struct QdScenario *s, double *out);

// Signal-to-noise ratio in dB; infinite when there are no accidentals.
//
// # Safety
// `s` must point to a valid scenario and `out` must be writable.
enum QdStatus qd_snr_db(double length_km, const struct QdScenario *s, double *out);

// Pump wavelength that converts `signal_nm` to `target_nm`.
//
// # Safety
// `out` must be writable.
enum QdStatus qd_solve_pump_wavelength(double signal_nm, double target_nm, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDLINK_H */
