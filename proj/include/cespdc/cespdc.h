/* cespdc: cavity-enhanced SPDC source modelling, C interface.
 *
 * Every function returns a cespdc_status; on failure the message is
 * available from cespdc_last_error() (per thread, valid until the next call
 * on that thread). Handles are opaque and owned by the caller; free them
 * with the matching *_free function (NULL is accepted). Units are SI (Hz,
 * s, m) unless the name says otherwise (mw, ps).
 */
#ifndef CESPDC_H
#define CESPDC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CESPDC_BUILDING_LIBRARY)
#    define CESPDC_API __declspec(dllexport)
#  else
#    define CESPDC_API __declspec(dllimport)
#  endif
#else
#  define CESPDC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cespdc_status {
    CESPDC_OK = 0,
    CESPDC_ERR_DOMAIN = 1,          /* argument outside the mathematical domain */
    CESPDC_ERR_PRECONDITION = 2,    /* ordering, sortedness, grid resolution */
    CESPDC_ERR_NO_SOLUTION = 3,     /* root search found no bracket */
    CESPDC_ERR_UNDERDETERMINED = 4, /* not enough data for the estimate */
    CESPDC_ERR_NON_FINITE = 5,
    CESPDC_ERR_CONFIG = 6,
    CESPDC_ERR_IO = 7,
    CESPDC_ERR_INVALID_ARGUMENT = 8, /* NULL handle or output pointer */
    CESPDC_ERR_INTERNAL = 9
} cespdc_status;

CESPDC_API const char* cespdc_last_error(void);
CESPDC_API const char* cespdc_status_name(cespdc_status status);
CESPDC_API const char* cespdc_version(void);

/* ---- configuration ---- */

typedef struct cespdc_config cespdc_config;

/* path and preset may each be NULL, not both. The file is merged over the preset. */
CESPDC_API cespdc_status cespdc_config_load(const char* path, const char* preset, cespdc_config** out);
/* Parses a JSON document directly; relative paths resolve against base_dir (NULL: "."). */
CESPDC_API cespdc_status cespdc_config_from_json(const char* json, const char* base_dir, cespdc_config** out);
CESPDC_API void cespdc_config_free(cespdc_config* cfg);
/* Applies a JSON merge patch and revalidates. */
CESPDC_API cespdc_status cespdc_config_patch(cespdc_config* cfg, const char* json_patch);
CESPDC_API cespdc_status cespdc_config_set_seed(cespdc_config* cfg, uint64_t seed);
/* Strings stay valid until the handle is modified or freed. */
CESPDC_API cespdc_status cespdc_config_output_dir(const cespdc_config* cfg, const char** out);
CESPDC_API cespdc_status cespdc_config_json(const cespdc_config* cfg, const char** out);
CESPDC_API cespdc_status cespdc_config_powers(const cespdc_config* cfg, const double** values, size_t* count);
CESPDC_API cespdc_status cespdc_config_path_differences(const cespdc_config* cfg, const double** values, size_t* count);

/* ---- cluster effect ---- */

typedef struct cespdc_cluster_report {
    double fsr_s_hz;
    double fsr_i_hz;
    double cluster_spacing_hz;
    double n_s;
    double n_i;
    double delta_nu_hz;
    double linewidth_s_hz;
    double linewidth_i_hz;
    int single_mode;
} cespdc_cluster_report;

CESPDC_API cespdc_status cespdc_cluster_analyze(double fsr_s_hz, double fsr_i_hz, double linewidth_s_hz,
                                                double linewidth_i_hz, cespdc_cluster_report* out);
CESPDC_API cespdc_status cespdc_cluster_from_config(const cespdc_config* cfg, cespdc_cluster_report* out);
CESPDC_API cespdc_status cespdc_cluster_spacing(double fsr_s_hz, double fsr_i_hz, double* out);
CESPDC_API cespdc_status cespdc_mode_counts(double fsr_s_hz, double fsr_i_hz, double* n_s, double* n_i);
CESPDC_API cespdc_status cespdc_orthogonal_offset(double n_modes, double fsr_s_hz, double fsr_i_hz, double* out);
CESPDC_API cespdc_status cespdc_is_single_mode(double offset_hz, double linewidth_s_hz, double linewidth_i_hz,
                                               int* out);

/* ---- dispersion / cavity ---- */

/* axis: 'y' or 'z'. Uses the config's crystal section. */
CESPDC_API cespdc_status cespdc_refractive_index(const cespdc_config* cfg, char axis, double wavelength_m,
                                                 double* out);
CESPDC_API cespdc_status cespdc_group_index(const cespdc_config* cfg, char axis, double wavelength_m, double* out);
CESPDC_API cespdc_status cespdc_derived_fsr(const cespdc_config* cfg, char axis, double wavelength_m, double* out);
CESPDC_API cespdc_status cespdc_lorentzian(double center_hz, double fwhm_hz, double nu_hz, double* out);

/* ---- quasi-phase matching ---- */

typedef struct cespdc_qpm_report {
    int order;
    double solved_period_m;
    double configured_period_m;
    double relative_deviation;      /* solved / configured - 1 */
    double gain_fwhm_hz;            /* envelope width at the solved period */
    double configured_mismatch_per_m;
} cespdc_qpm_report;

/* order <= 0 takes the config's qpm_order. */
CESPDC_API cespdc_status cespdc_qpm_analyze(const cespdc_config* cfg, int order, cespdc_qpm_report* out);
/* Gain envelope at the solved period: `points` detunings over [-half_span, half_span]. */
CESPDC_API cespdc_status cespdc_qpm_spectrum(const cespdc_config* cfg, int order, double half_span_hz, size_t points,
                                             double* detuning_out, double* intensity_out);
CESPDC_API cespdc_status cespdc_qpm_write_spectrum_csv(const double* detuning_hz, const double* intensity,
                                                       size_t count, const char* path);

/* ---- correlation curves ---- */

typedef struct cespdc_curve cespdc_curve;

CESPDC_API cespdc_status cespdc_t_fwhm_analytic(double gamma_s_hz, double gamma_i_hz, double* out);
/* Peak-normalized analytic g2 on the config grid. */
CESPDC_API cespdc_status cespdc_g2_analytic(const cespdc_config* cfg, cespdc_curve** out);
/* Convolution with the detector response; rate <= 0 uses the config's detector rate. */
CESPDC_API cespdc_status cespdc_curve_convolve(const cespdc_curve* curve, double detector_rate_per_s,
                                               cespdc_curve** out);
CESPDC_API cespdc_status cespdc_curve_rebin(const cespdc_curve* curve, double bin_s, cespdc_curve** out);
CESPDC_API cespdc_status cespdc_curve_data(const cespdc_curve* curve, const double** values, size_t* count,
                                           double* start_s, double* step_s);
/* Multi-mode curves are measured on their peak envelope (one maximum per comb period). */
CESPDC_API cespdc_status cespdc_curve_fwhm(const cespdc_curve* curve, double* out);
CESPDC_API cespdc_status cespdc_curve_write_csv(const cespdc_curve* curve, const char* path);
CESPDC_API void cespdc_curve_free(cespdc_curve* curve);

/* ---- photon counting ---- */

typedef struct cespdc_timetags cespdc_timetags;
typedef struct cespdc_histogram cespdc_histogram;

/* Signal (channel 1) and idler (channel 2) streams at the given pump power
 * (pump_mw < 0: config value), seeded from the config. */
CESPDC_API cespdc_status cespdc_simulate(const cespdc_config* cfg, double pump_mw, cespdc_timetags** out);
CESPDC_API cespdc_status cespdc_timetags_data(const cespdc_timetags* tags, int channel, const uint64_t** values,
                                              size_t* count);
CESPDC_API cespdc_status cespdc_timetags_write_ttag(const cespdc_timetags* tags, int channel, const char* path);
CESPDC_API cespdc_status cespdc_timetags_write_csv(const cespdc_timetags* tags, int channel, const char* path);
/* Reads two TTAG files into a stream pair. */
CESPDC_API cespdc_status cespdc_timetags_read(const char* signal_path, const char* idler_path, cespdc_timetags** out);
CESPDC_API void cespdc_timetags_free(cespdc_timetags* tags);

/* bin_s / range_s <= 0 take the config's simulation values (cfg may then not be NULL). */
CESPDC_API cespdc_status cespdc_histogram_build(const cespdc_config* cfg, const cespdc_timetags* tags, double bin_s,
                                                double range_s, cespdc_histogram** out);
CESPDC_API cespdc_status cespdc_histogram_data(const cespdc_histogram* hist, const uint64_t** counts, size_t* count,
                                               double* bin_s, int* half_bins);
CESPDC_API cespdc_status cespdc_histogram_fwhm(const cespdc_histogram* hist, double* out);
CESPDC_API cespdc_status cespdc_histogram_accidentals(const cespdc_histogram* hist, double t_fwhm_s, double* out);
CESPDC_API cespdc_status cespdc_histogram_write_csv(const cespdc_histogram* hist, const char* path);
CESPDC_API void cespdc_histogram_free(cespdc_histogram* hist);

typedef struct cespdc_counts_row {
    double power_mw;
    double singles_s;    /* 1/s */
    double singles_i;    /* 1/s */
    double coincidences; /* net, 1/s, inside the coincidence window */
    double accidentals;  /* 1/s, inside the window */
    double car;          /* valid only when car_defined */
    int car_defined;
} cespdc_counts_row;

CESPDC_API cespdc_status cespdc_counts_expected(const cespdc_config* cfg, double pump_mw, cespdc_counts_row* out);
CESPDC_API cespdc_status cespdc_counts_simulated(const cespdc_config* cfg, double pump_mw, cespdc_counts_row* out);
CESPDC_API cespdc_status cespdc_counts_write_csv(const cespdc_counts_row* rows, size_t count, const char* path);
/* lower_bound is set when accidentals == 0; *out is then R_c + 1. */
CESPDC_API cespdc_status cespdc_car(double coincidences, double accidentals, double* out, int* lower_bound);
CESPDC_API cespdc_status cespdc_heralded_efficiency(double coincidences, double singles, double* out);
CESPDC_API cespdc_status cespdc_estimate_brightness(const cespdc_config* cfg, double detected_rate, double pump_mw,
                                                    double* out);

/* ---- interference ---- */

CESPDC_API cespdc_status cespdc_michelson_visibility(double linewidth_hz, double background_ratio,
                                                     double path_difference_m, double* out);
CESPDC_API cespdc_status cespdc_michelson_intensity(double linewidth_hz, double center_hz,
                                                    double path_difference_m, double i0, double* out);
/* Cavity-scan linewidth the fitted Michelson linewidth is compared against. */
CESPDC_API cespdc_status cespdc_michelson_reference_linewidth(const cespdc_config* cfg, double* out);
/* Visibilities of the config's Michelson model at the given path differences;
 * relative_noise > 0 multiplies each by (1 + noise * N(0,1)) seeded from the config. */
CESPDC_API cespdc_status cespdc_michelson_series(const cespdc_config* cfg, const double* path_differences_m,
                                                 size_t count, double relative_noise, double* out);
CESPDC_API cespdc_status cespdc_visibility_write_csv(const double* path_differences_m, const double* visibility,
                                                     size_t count, const char* path);
CESPDC_API cespdc_status cespdc_franson_coincidence(double visibility, double idler_phase_rad, double background,
                                                    double signal_phase_rad, double amplitude, double* out);
CESPDC_API cespdc_status cespdc_fringe_write_csv(const double* phase_rad, const double* counts, size_t count,
                                                 const char* path);
CESPDC_API cespdc_status cespdc_visibility_from_extrema(double c_max, double c_min, double* out);
CESPDC_API cespdc_status cespdc_net_visibility(double c_max, double c_min, double accidentals, double* out);
CESPDC_API cespdc_status cespdc_umi_tuning_period(const cespdc_config* cfg, double* out);
CESPDC_API cespdc_status cespdc_umi_length_difference(double time_delay_s, double fiber_index, double* out);

/* ---- fitting ---- */

typedef struct cespdc_fit cespdc_fit;

CESPDC_API cespdc_status cespdc_fit_lorentzian(const double* freq_hz, const double* transmission, size_t count,
                                               cespdc_fit** out);
/* Fits gamma_s, gamma_i, detector rate, amplitude, background to a curve sampled as bins. */
CESPDC_API cespdc_status cespdc_fit_g2_curve(const cespdc_config* cfg, const cespdc_curve* curve,
                                             int fix_detector_rate, cespdc_fit** out);
CESPDC_API cespdc_status cespdc_fit_g2_histogram(const cespdc_config* cfg, const cespdc_histogram* hist,
                                                 int fix_detector_rate, cespdc_fit** out);
CESPDC_API cespdc_status cespdc_fit_visibility_decay(const double* path_differences_m, const double* visibility,
                                                     size_t count, cespdc_fit** out);
CESPDC_API cespdc_status cespdc_fit_fringe(const double* phase_rad, const double* counts, size_t count,
                                           double background, cespdc_fit** out);
/* Detector rate reproducing the observed FWHM of the config's analytic curve. */
CESPDC_API cespdc_status cespdc_fit_detector_rate(const cespdc_config* cfg, double observed_fwhm_s, cespdc_fit** out);
CESPDC_API cespdc_status cespdc_fit_converged(const cespdc_fit* fit, int* out);
CESPDC_API cespdc_status cespdc_fit_param(const cespdc_fit* fit, const char* name, double* value, double* std_error);
/* {params:{name:{value,stderr}}, cost, iterations, converged, reason}; valid while the handle lives. */
CESPDC_API cespdc_status cespdc_fit_json(const cespdc_fit* fit, const char** out);
CESPDC_API void cespdc_fit_free(cespdc_fit* fit);

/* Writes text to a file (reports); convenience for bindings. */
CESPDC_API cespdc_status cespdc_write_text(const char* path, const char* text);

#ifdef __cplusplus
}
#endif

#endif /* CESPDC_H */
