#ifndef HUNFOLD_H
#define HUNFOLD_H

/* C interface of libhunfold. Every call returns an hf_status; on failure the
   thread's last error message is available from hf_last_error(). Strings
   returned through out-parameters are owned by the caller and released with
   hf_string_free. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HF_API __declspec(dllexport)
#else
#define HF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hf_status {
  HF_OK = 0,
  HF_E_INVALID_ARGUMENT = 1, /* null pointer, bad index, unknown name */
  HF_E_CONFIG = 2,           /* config parse or validation failure */
  HF_E_NUMERICAL = 3,        /* a solver did not converge */
  HF_E_IO = 4,
  HF_E_INTERNAL = 5
} hf_status;

typedef struct hf_point {
  double x1, x2, x3;
} hf_point;

typedef struct hf_cell_index {
  int64_t k1, k2, k3;
} hf_cell_index;

typedef struct hf_config hf_config;
typedef struct hf_report hf_report;
typedef struct hf_coefficient hf_coefficient;
typedef struct hf_cell hf_cell;

HF_API const char* hf_version(void);
/* Message of the last failed call on this thread ("" when none). */
HF_API const char* hf_last_error(void);
HF_API const char* hf_status_name(hf_status s);
HF_API hf_status hf_set_threads(int n);
HF_API int hf_threads(void);
HF_API void hf_string_free(char* s);

/* group arithmetic */
HF_API hf_status hf_group_mul(hf_point p, hf_point q, hf_point* out);
HF_API hf_status hf_group_inv(hf_point p, hf_point* out);
HF_API hf_status hf_dilate(double lambda, hf_point p, hf_point* out);
HF_API hf_status hf_hnorm(hf_point p, double* out);
HF_API hf_status hf_decompose(double eps, hf_point x, hf_cell_index* k, hf_point* y);
HF_API hf_status hf_reconstruct(double eps, hf_cell_index k, hf_point y, hf_point* out);

/* configs; command is one of verify, unfold-demo, cell, homogenize, converge, control */
HF_API hf_status hf_config_default(const char* command, hf_config** out);
/* command may be NULL when the file names its own command */
HF_API hf_status hf_config_load(const char* path, const char* command, hf_config** out);
HF_API hf_status hf_config_parse(const char* text, const char* command, hf_config** out);
HF_API hf_status hf_config_from_json(const char* json, hf_config** out);
/* key is "section.key"; the config is revalidated afterwards */
HF_API hf_status hf_config_set(hf_config* cfg, const char* key, const char* value);
HF_API hf_status hf_config_to_json(const hf_config* cfg, char** out);
HF_API hf_status hf_config_to_ini(const hf_config* cfg, char** out);
HF_API hf_status hf_config_output(const hf_config* cfg, char** out);
HF_API void hf_config_free(hf_config* cfg);

/* Runs the command, writing files under out_dir (the config's output.dir when
   NULL). A numerical failure still yields a report and returns HF_E_NUMERICAL. */
HF_API hf_status hf_run(const hf_config* cfg, const char* out_dir, hf_report** out);
HF_API int hf_report_passed(const hf_report* r);
HF_API int hf_report_numerical_failure(const hf_report* r);
HF_API size_t hf_report_check_count(const hf_report* r);
/* Borrowed strings, valid until hf_report_free. */
HF_API hf_status hf_report_check(const hf_report* r, size_t i, const char** name, int* passed, int* gating,
                                 const char** detail);
HF_API double hf_report_seconds(const hf_report* r);
HF_API hf_status hf_report_json(const hf_report* r, char** out);
HF_API void hf_report_free(hf_report* r);

/* periodic coefficients and cell problems */
HF_API hf_status hf_coefficient_identity(hf_coefficient** out);
HF_API hf_status hf_coefficient_constant(const double m[4], hf_coefficient** out);
HF_API hf_status hf_coefficient_laminate(double a0, double a1, int freq, hf_coefficient** out);
HF_API hf_status hf_coefficient_checkerboard(double low, double high, hf_coefficient** out);
/* row-major A(y) */
HF_API hf_status hf_coefficient_eval(const hf_coefficient* a, hf_point y, double out[4]);
HF_API void hf_coefficient_free(hf_coefficient* a);

HF_API hf_status hf_cell_solve(const hf_coefficient* a, int n, double tol, hf_cell** out);
HF_API hf_status hf_cell_homogenized(const hf_cell* c, double out[4]);
/* i = 1 or 2 */
HF_API hf_status hf_cell_corrector(const hf_cell* c, int i, hf_point y, double* out);
HF_API void hf_cell_free(hf_cell* c);

#ifdef __cplusplus
}
#endif

#endif
