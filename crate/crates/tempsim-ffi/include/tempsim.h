#ifndef TEMPSIM_H
#define TEMPSIM_H

/* Generated by cbindgen from the tempsim-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Call outcome. Non-zero values are errors; see `tempsim_status_message`.
typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_NULL_POINTER = 1,
  TS_STATUS_INVALID_ARGUMENT = 2,
  TS_STATUS_DOMAIN_ERROR = 3,
  TS_STATUS_CONFIG_ERROR = 4,
  TS_STATUS_IO_ERROR = 5,
  TS_STATUS_PANIC = 6,
} TsStatus;

// Opaque sensor configuration handle.
typedef struct TsConfig TsConfig;

// Front-end operating point.
typedef struct TsFrontEnd {
  double v_vdd_v;
  double i_h_a;
  double i_l_a;
  double i_supply_a;
} TsFrontEnd;

// One temperature conversion.
typedef struct TsConversion {
  uint32_t code;
  // 1 when the code counter saturated.
  uint8_t overflow;
  double window_s;
  double t_conv_s;
  double energy_j;
  double f_h_hz;
  double f_l_hz;
} TsConversion;

// Repeated-reading noise measurement.
typedef struct TsNoise {
  double sigma_c;
  double sigma_lsb;
  double mean_code;
} TsNoise;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The canonical fitted configuration. Free with `tempsim_config_free`.
struct TsConfig *tempsim_config_canonical(void);

// Load a sensor configuration from a TOML file.
//
// # Safety
// `path` must be a valid NUL-terminated string; `out` must be writable.
enum TsStatus tempsim_config_from_toml_file(const char *path, struct TsConfig **out);

// Duplicate a configuration handle.
//
// # Safety
// `cfg` must be a live handle from this library; `out` must be writable.
enum TsStatus tempsim_config_clone(const struct TsConfig *cfg, struct TsConfig **out);

// Release a configuration handle. Accepts NULL.
//
// # Safety
// `cfg` must be NULL or a handle produced by this library, not yet freed.
void tempsim_config_free(struct TsConfig *cfg);

// Hex SHA-256 of the configuration. `buf` needs at least 65 bytes.
//
// # Safety
// `cfg` must be a live handle; `buf` must point to `buf_len` writable bytes.
enum TsStatus tempsim_config_hash(const struct TsConfig *cfg, char *buf, uintptr_t buf_len);

// Front-end operating point at (v_dd, temp).
//
// # Safety
// `cfg` must be a live handle; `out` must be writable.
enum TsStatus tempsim_frontend_eval(const struct TsConfig *cfg,
                                    double vdd_v,
                                    double temp_c,
                                    struct TsFrontEnd *out);

// Noiseless conversion (closed-form code path).
//
// # Safety
// `cfg` must be a live handle; `out` must be writable.
enum TsStatus tempsim_convert(const struct TsConfig *cfg,
                              double vdd_v,
                              double temp_c,
                              struct TsConversion *out);

// One jittered conversion; the seed fully determines the outcome.
//
// # Safety
// `cfg` must be a live handle; `out` must be writable.
enum TsStatus tempsim_convert_noisy(const struct TsConfig *cfg,
                                    double vdd_v,
                                    double temp_c,
                                    uint64_t seed,
                                    struct TsConversion *out);

// Noise-limited resolution from repeated jittered conversions.
//
// # Safety
// `cfg` must be a live handle; `out` must be writable.
enum TsStatus tempsim_noise_resolution(const struct TsConfig *cfg,
                                       double temp_c,
                                       double vdd_v,
                                       uint32_t repeats,
                                       uint64_t seed,
                                       struct TsNoise *out);

// floor(window_cycles · f_h / f_l).
//
// # Safety
// `out` must be writable.
enum TsStatus tempsim_code_closed_form(double f_h_hz,
                                       double f_l_hz,
                                       uint32_t window_cycles,
                                       uint64_t *out);

// Shift a configuration to a named process corner
// ("TT", "FF", "SS", "FS", "SF"), producing a new handle.
//
// # Safety
// `cfg` must be a live handle; `corner` a NUL-terminated string; `out`
// writable.
enum TsStatus tempsim_apply_corner(const struct TsConfig *cfg,
                                   const char *corner,
                                   struct TsConfig **out);

// Draw one Monte Carlo die (Gaussian mismatch with the given sigmas) and
// apply it, producing a new handle. Deterministic per seed.
//
// # Safety
// `cfg` must be a live handle; `out` writable.
enum TsStatus tempsim_apply_die(const struct TsConfig *cfg,
                                double sigma_vth,
                                double sigma_i0,
                                double sigma_cap,
                                uint64_t seed,
                                struct TsConfig **out);

// Static description of a status code.
const char *tempsim_status_message(enum TsStatus status);

// Library version as a static string.
const char *tempsim_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEMPSIM_H */
