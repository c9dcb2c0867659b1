#ifndef QPI_H
#define QPI_H

/*
 * C interface to the phase-imaging library: simulation of a 4f system with a
 * small phase-shifting window in the frequency plane, algebraic three-shift
 * recovery, iterative refinement, convergence analysis, and map/trace I/O.
 *
 * All objects are opaque handles owned by the library; every *_destroy is
 * safe on NULL. Functions return QPI_OK on success; on failure they return a
 * status code and qpi_last_error() gives a thread-local message.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define QPI_API __declspec(dllexport)
#else
#define QPI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qpi_status {
    QPI_OK = 0,
    QPI_ERR_NULL_ARGUMENT = 1,
    QPI_ERR_INVALID_ARGUMENT = 2,
    QPI_ERR_IO = 3,
    QPI_ERR_RUNTIME = 4
} qpi_status;

typedef struct qpi_map qpi_map;           /* 2D double grid (row-major) */
typedef struct qpi_config qpi_config;     /* experiment configuration */
typedef struct qpi_recovery qpi_recovery; /* result of a recovery run */
typedef struct qpi_trace qpi_trace;       /* per-iteration convergence data */

QPI_API const char* qpi_version(void);

/* Message describing the most recent failure on this thread. */
QPI_API const char* qpi_last_error(void);

/* ---- maps ---- */

QPI_API qpi_status qpi_map_create(int width, int height, qpi_map** out);
QPI_API void qpi_map_destroy(qpi_map* map);
QPI_API qpi_status qpi_map_width(const qpi_map* map, int* out);
QPI_API qpi_status qpi_map_height(const qpi_map* map, int* out);
QPI_API qpi_status qpi_map_get(const qpi_map* map, int x, int y, double* out);
QPI_API qpi_status qpi_map_set(qpi_map* map, int x, int y, double value);

/* Borrowed pointer to the row-major payload; valid until the map is
 * destroyed or resized. count = width * height. */
QPI_API qpi_status qpi_map_values(qpi_map* map, double** out_values, size_t* out_count);

/* Float map file (PFM, grayscale, little-endian scale -1.0). */
QPI_API qpi_status qpi_map_read_pfm(const char* path, qpi_map** out);
QPI_API qpi_status qpi_map_write_pfm(const qpi_map* map, const char* path);

/* 16-bit intensity file (PGM P5 maxval 65535, big-endian) with a sidecar
 * "<path>.scale" recording the quantization scale. */
QPI_API qpi_status qpi_map_read_pgm16(const char* path, qpi_map** out);
QPI_API qpi_status qpi_map_write_pgm16(const qpi_map* map, const char* path);

/* ---- experiment configuration ---- */

QPI_API qpi_status qpi_config_create(qpi_config** out);
QPI_API void qpi_config_destroy(qpi_config* cfg);
QPI_API qpi_status qpi_config_load(const char* path, qpi_config** out);
QPI_API qpi_status qpi_config_save(const qpi_config* cfg, const char* path);
QPI_API qpi_status qpi_config_parse(const char* text, qpi_config** out);

/* Canonical "key = value" form; free the returned string with qpi_string_free. */
QPI_API qpi_status qpi_config_serialize(const qpi_config* cfg, char** out);
QPI_API void qpi_string_free(char* s);

/* Applies one "key = value" assignment using the config-file key names. */
QPI_API qpi_status qpi_config_set(qpi_config* cfg, const char* key, const char* value);
QPI_API qpi_status qpi_config_get(const qpi_config* cfg, const char* key, char** out);

/* ---- pipeline ---- */

/* Object described by the config: generated from the recipe, or imported
 * from PFM files when import.enabled. Returns amplitude and phase maps. */
QPI_API qpi_status qpi_generate_object(const qpi_config* cfg, qpi_map** out_amplitude,
                                       qpi_map** out_phase);

/* The three modulated intensities of the configured optical system for the
 * given object, with configured noise applied. */
QPI_API qpi_status qpi_simulate(const qpi_config* cfg, const qpi_map* amplitude,
                                const qpi_map* phase, qpi_map** out_i1, qpi_map** out_i2,
                                qpi_map** out_i3);

typedef struct qpi_recover_params {
    double t1, t2, t3;     /* phase shifts, radians, pairwise distinct mod 2*pi */
    int window_w, window_h; /* odd pixel counts */
    int window_dx, window_dy;
    int pad_factor;
    int kmode;     /* 0 = combined (shape-scaled), 1 = zero initialization */
    int max_iters; /* >= 1 */
    double self_residual_tol;
    int record_trace; /* 0/1 */
} qpi_recover_params;

/* Fills the defaults: shifts {0, pi/2, pi}, 7x7 centered window, pad 6,
 * combined K, 25 iterations, tol 1e-10, trace on. */
QPI_API void qpi_recover_params_init(qpi_recover_params* params);

/* Amplitude + phase recovery from three measured intensities. truth_phase
 * is optional; when given, the trace records per-iteration RMS error. */
QPI_API qpi_status qpi_recover(const qpi_map* i1, const qpi_map* i2, const qpi_map* i3,
                               const qpi_recover_params* params, const qpi_map* truth_phase,
                               qpi_recovery** out);

QPI_API void qpi_recovery_destroy(qpi_recovery* rec);
QPI_API qpi_status qpi_recovery_amplitude(const qpi_recovery* rec, qpi_map** out);
QPI_API qpi_status qpi_recovery_phase(const qpi_recovery* rec, qpi_map** out);
QPI_API qpi_status qpi_recovery_reference_k(const qpi_recovery* rec, qpi_map** out);
QPI_API qpi_status qpi_recovery_reference_p(const qpi_recovery* rec, qpi_map** out);
QPI_API qpi_status qpi_recovery_iterations(const qpi_recovery* rec, int* out);
QPI_API qpi_status qpi_recovery_diverged(const qpi_recovery* rec, int* out);

/* Pixel counts of the defensive clamps; any pointer may be NULL. */
QPI_API qpi_status qpi_recovery_clamp_counts(const qpi_recovery* rec, int64_t* r1_clamped,
                                             int64_t* discriminant_clamped,
                                             int64_t* indeterminate,
                                             int64_t* low_illumination);

QPI_API qpi_status qpi_recovery_trace(const qpi_recovery* rec, qpi_trace** out);

/* ---- convergence traces ---- */

QPI_API void qpi_trace_destroy(qpi_trace* trace);
QPI_API qpi_status qpi_trace_lengths(const qpi_trace* trace, int* out_rms_len,
                                     int* out_residual_len);
QPI_API qpi_status qpi_trace_rms(const qpi_trace* trace, int k, double* out);
QPI_API qpi_status qpi_trace_self_residual(const qpi_trace* trace, int k, double* out);

/* Fitted convergence order p and rate r stored on the trace (NaN when the
 * fit was not possible). */
QPI_API qpi_status qpi_trace_fit(const qpi_trace* trace, double* out_p, double* out_r);

/* Re-fits p and r from the trace's RMS sequence. */
QPI_API qpi_status qpi_trace_estimate(const qpi_trace* trace, double* out_p, double* out_r);

QPI_API qpi_status qpi_trace_write_csv(const qpi_trace* trace, const char* path);
QPI_API qpi_status qpi_trace_read_csv(const char* path, qpi_trace** out);

/* ---- analysis ---- */

/* RMS difference of two phase maps; remove_piston wraps the differences and
 * subtracts their mean first. */
QPI_API qpi_status qpi_phase_rms(const qpi_map* recovered, const qpi_map* truth,
                                 int remove_piston, double* out);

/* Divides out a recovered calibration frame: amplitude ratio, wrapped phase
 * difference. */
QPI_API qpi_status qpi_background_eliminate(const qpi_map* obj_amplitude,
                                            const qpi_map* obj_phase,
                                            const qpi_map* bg_amplitude,
                                            const qpi_map* bg_phase, qpi_map** out_amplitude,
                                            qpi_map** out_phase);

/* Diffraction-limited spot size lambda * focal_length / beam_diameter. */
QPI_API qpi_status qpi_theoretical_resolution(double beam_diameter, double focal_length,
                                              double wavelength, double* out);

/* Window argument "WxH" or "WxH+dx+dy". */
QPI_API qpi_status qpi_window_parse(const char* arg, int* out_w, int* out_h, int* out_dx,
                                    int* out_dy);

#ifdef __cplusplus
}
#endif

#endif /* QPI_H */
