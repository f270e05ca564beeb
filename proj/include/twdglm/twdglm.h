#ifndef TWDGLM_H
#define TWDGLM_H

#include <stddef.h>

#if defined(TWDGLM_BUILDING)
#define TW_API __attribute__((visibility("default")))
#else
#define TW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tw_status {
  TW_OK = 0,
  TW_ERR_DOMAIN = 1,
  TW_ERR_CONFIG = 2,
  TW_ERR_IO = 3,
  TW_ERR_SCHEMA = 4,
  TW_ERR_SUPPORT = 5,
  TW_ERR_SINGULAR = 6,
  TW_ERR_SERIES_INFEASIBLE = 7,
  TW_ERR_CALIBRATION = 8,
  TW_ERR_NUMERIC = 9,
  TW_ERR_INVALID_ARGUMENT = 10,
  TW_ERR_INTERNAL = 11
} tw_status;

/* Upper-case code name, e.g. "SCHEMA". */
TW_API const char* tw_status_name(tw_status s);
/* Message of the last failure on the calling thread; "" after success. */
TW_API const char* tw_last_error(void);
TW_API const char* tw_version(void);

typedef struct tw_options tw_options;
typedef struct tw_graph tw_graph;
typedef struct tw_dataset tw_dataset;
typedef struct tw_fit tw_fit;

/* Options use the CLI flag names without dashes: "family", "p-grid", ... */
TW_API tw_status tw_options_create(tw_options** out);
TW_API void tw_options_destroy(tw_options* o);
TW_API tw_status tw_options_set(tw_options* o, const char* key, const char* value);
TW_API tw_status tw_options_load(tw_options* o, const char* path);
/* Writes "key = value" lines; *needed receives the length including NUL. */
TW_API tw_status tw_options_dump(const tw_options* o, char* buf, size_t cap, size_t* needed);

/* simulate | fit | tune | predict | report. *value (optional) receives the
   command's headline number: realised zero share, fit objective, best
   hold-out deviance, total predicted deviance, or alpha SSE. */
TW_API tw_status tw_run(const char* command, const tw_options* o, double* value);

TW_API tw_status tw_graph_load(const char* path, tw_graph** out);
TW_API tw_status tw_graph_lattice(int rows, int cols, tw_graph** out);
TW_API int tw_graph_size(const tw_graph* g);
TW_API void tw_graph_destroy(tw_graph* g);

/* Reads family and expand from the options. */
TW_API tw_status tw_dataset_load(const char* path, const tw_graph* g, const tw_options* o, tw_dataset** out);
TW_API int tw_dataset_rows(const tw_dataset* d);
TW_API void tw_dataset_destroy(tw_dataset* d);

TW_API tw_status tw_fit_run(const tw_dataset* d, const tw_graph* g, const tw_options* o, tw_fit** out);
TW_API double tw_fit_objective(const tw_fit* f);
TW_API double tw_fit_p_hat(const tw_fit* f);
TW_API int tw_fit_iterations(const tw_fit* f);
TW_API int tw_fit_converged(const tw_fit* f);
/* block: 0 beta, 1 alpha, 2 gamma. *n receives the block length. */
TW_API tw_status tw_fit_coefficients(const tw_fit* f, int block, double* buf, size_t cap, size_t* n);
/* Hold-out style deviance of the fit on another dataset. */
TW_API tw_status tw_fit_deviance(const tw_fit* f, const tw_dataset* d, double* out);
TW_API void tw_fit_destroy(tw_fit* f);

TW_API tw_status tw_log_density(const char* family, double p, double y, double mu, double phi, double* out);
TW_API tw_status tw_unit_deviance(const char* family, double p, double y, double mu, double* out);
TW_API double tw_wald_p_value(double z);

#ifdef __cplusplus
}
#endif

#endif
