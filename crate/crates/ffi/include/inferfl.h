#ifndef INFERFL_H
#define INFERFL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum InferflStatus {
  INFERFL_STATUS_OK = 0,
  INFERFL_STATUS_NULL_POINTER = 1,
  INFERFL_STATUS_INVALID_UTF8 = 2,
  // Malformed program, tests, spectrum, PDG or configuration value.
  INFERFL_STATUS_INPUT_ERROR = 3,
  // Valid input the pipeline cannot work on, such as no failing test.
  INFERFL_STATUS_PRECONDITION_FAILED = 4,
  INFERFL_STATUS_PANIC = 5,
} InferflStatus;

typedef enum InferflSpectrumMode {
  INFERFL_SPECTRUM_MODE_COVERAGE = 0,
  INFERFL_SPECTRUM_MODE_SLICE = 1,
} InferflSpectrumMode;

// Pipeline parameters, starting from the defaults.
typedef struct InferflConfig InferflConfig;

// Result of executing a program on a suite: both spectra and the static PDG.
typedef struct InferflTrace InferflTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *inferfl_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void inferfl_string_free(char *s);

// Parses `program_src`, runs it on the JSON test array `tests_json` and
// stores a new trace handle in `*out`.
//
// # Safety
// String arguments must be null or NUL-terminated; `out` must be writable.
enum InferflStatus inferfl_trace_new(const char *program_src,
                                     const char *tests_json,
                                     struct InferflTrace **out);

// # Safety
// `trace` must be null or a handle from [`inferfl_trace_new`], not yet freed.
void inferfl_trace_free(struct InferflTrace *trace);

// Number of failing tests in the trace, or -1 for a null handle.
//
// # Safety
// `trace` must be null or a live trace handle.
int64_t inferfl_trace_failing(const struct InferflTrace *trace);

// Writes the spectrum of the given mode as JSON into `*out`.
//
// # Safety
// `trace` must be a live trace handle; `out` must be writable.
enum InferflStatus inferfl_trace_spectrum_json(const struct InferflTrace *trace,
                                               enum InferflSpectrumMode mode,
                                               char **out);

// Writes the static PDG as JSON into `*out`.
//
// # Safety
// `trace` must be a live trace handle; `out` must be writable.
enum InferflStatus inferfl_trace_pdg_json(const struct InferflTrace *trace, char **out);

// New configuration holding the default parameters.
struct InferflConfig *inferfl_config_new(void);

// # Safety
// `config` must be null or a handle from [`inferfl_config_new`], not yet freed.
void inferfl_config_free(struct InferflConfig *config);

// Sets one parameter by its CLI flag name without dashes: `phi`,
// `delta-fraction`, `chain-cap`, `matching`, `ridge` or `caliper`.
// The resulting configuration is validated; on error it is left unchanged.
//
// # Safety
// `config` must be a live handle; strings must be NUL-terminated.
enum InferflStatus inferfl_config_set(struct InferflConfig *config,
                                      const char *key,
                                      const char *value);

// Localizes from JSON inputs and writes the JSON report into `*out`.
// `effect_spectrum_json` may be null to reuse `spectrum_json`; `config`
// may be null for defaults. `technique` is one of `inference`, `ochiai`,
// `o`, `gp19`, `dstar`.
//
// # Safety
// Non-null pointers must be valid NUL-terminated strings or live handles;
// `out` must be writable.
enum InferflStatus inferfl_localize_json(const char *spectrum_json,
                                         const char *effect_spectrum_json,
                                         const char *pdg_json,
                                         const struct InferflConfig *config,
                                         const char *technique,
                                         char **out);

// Localizes directly from a trace, selecting on `selection_mode` and
// estimating effects on `effect_mode`.
//
// # Safety
// `trace` must be a live handle, `config` null or live, `technique` a
// NUL-terminated string and `out` writable.
enum InferflStatus inferfl_localize_trace(const struct InferflTrace *trace,
                                          const struct InferflConfig *config,
                                          const char *technique,
                                          enum InferflSpectrumMode selection_mode,
                                          enum InferflSpectrumMode effect_mode,
                                          char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INFERFL_H */
