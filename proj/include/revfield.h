#ifndef REVFIELD_H
#define REVFIELD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RF_API __declspec(dllexport)
#else
#define RF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rf_status {
  RF_OK = 0,
  RF_ERR_VALIDATION = 1,
  RF_ERR_CAPACITY = 2,
  RF_ERR_DOMAIN = 3,
  RF_ERR_NUMERIC = 4,
  RF_ERR_NEAR_BIFURCATION = 5,
  RF_ERR_CONSISTENCY = 6,
  RF_ERR_SOLVER = 7,
  RF_ERR_IO = 8,
  RF_ERR_NULL_ARGUMENT = 9,
  RF_ERR_INTERNAL = 10
} rf_status;

/* Tolerance set plus the message of the last failed call. Not shared between
   threads; create one per thread. */
typedef struct rf_context rf_context;
typedef struct rf_classification rf_classification;

RF_API const char* rf_version(void);
RF_API const char* rf_status_name(rf_status status);

RF_API rf_context* rf_context_new(void);
RF_API void rf_context_free(rf_context* ctx);
/* Message of the last failing call on ctx, "" after a success. */
RF_API const char* rf_last_error(const rf_context* ctx);
RF_API rf_status rf_context_set(rf_context* ctx, const char* key, const char* value);
RF_API rf_status rf_context_load_config(rf_context* ctx, const char* path);
/* Applies the file named by REVFIELD_CONFIG, if set. */
RF_API rf_status rf_context_load_environment(rf_context* ctx);

/* Strings returned through char** are owned by the caller. */
RF_API void rf_string_free(char* s);

/* ---- combinatorics ---- */
RF_API rf_status rf_count_strata(rf_context* ctx, int k, uint64_t* out);
RF_API rf_status rf_strata_json(rf_context* ctx, int k, char** out);
/* Writes the involution of a U/D/F string; *len receives k+1. */
RF_API rf_status rf_udf_to_map(rf_context* ctx, const char* udf, int* map, size_t capacity, size_t* len);
RF_API rf_status rf_map_to_udf(rf_context* ctx, const int* map, size_t len, char** out);

/* ---- classification ---- */
#define RF_CLASSIFY_TAU_ONLY 1u     /* skip the analytic invariant */
#define RF_CLASSIFY_NO_VERIFY 2u    /* skip second paths and mirror zones */

/* eps has k entries (eps_0 .. eps_{k-1}); k >= 2 is taken from n. */
RF_API rf_status rf_classify(rf_context* ctx, const double* eps, size_t n, unsigned flags, rf_classification** out);
RF_API void rf_classification_free(rf_classification* c);
RF_API int rf_classification_is_generic(const rf_classification* c);
RF_API double rf_classification_margin(const rf_classification* c);
/* U/D/F string of tau, or "bifurcation:<type>" for non-generic fields. */
RF_API rf_status rf_classification_label(rf_context* ctx, const rf_classification* c, char** out);
RF_API rf_status rf_classification_json(rf_context* ctx, const rf_classification* c, int geometry, char** out);

/* ---- realization ---- */
/* eta_json: {"kappas":[..],"widths":[..],"times":[[re,im],..]}. Writes k
   coefficients to eps_out and, when report_json is not NULL, a report. */
RF_API rf_status rf_realize(rf_context* ctx, const char* udf, const char* eta_json, double* eps_out, size_t capacity,
                            size_t* len, char** report_json);

/* ---- output ---- */
#define RF_PORTRAIT_NO_PROBES 1u
#define RF_PORTRAIT_DIAGNOSTICS 2u  /* draw non-generic fields too */

RF_API rf_status rf_portrait_svg(rf_context* ctx, const double* eps, size_t n, unsigned flags, char** out);

/* ---- bifurcation ---- */
RF_API double rf_cubic_discriminant(double eps0, double eps1);
RF_API double rf_quartic_discriminant(double eps0, double eps1, double eps2);
RF_API double rf_quartic_homoclinic_surface(double eps0, double eps1, double eps2);

typedef void (*rf_progress_fn)(size_t done, size_t total, void* user);

typedef struct rf_scan_spec {
  int k;              /* 2 or 3 */
  int n0, n1;         /* grid cells */
  double lo, hi;      /* k = 2 square */
  int refine;         /* split boundary cells once */
  const char* cache;  /* resume cache path or NULL */
} rf_scan_spec;

RF_API void rf_scan_spec_default(rf_scan_spec* spec, int k);
/* csv receives the cell table; svg (optional) a heat map; generic_labels
   (optional) the number of distinct generic labels. */
RF_API rf_status rf_scan(rf_context* ctx, const rf_scan_spec* spec, rf_progress_fn progress, void* user, char** csv,
                         char** svg, int* generic_labels);

#ifdef __cplusplus
}
#endif

#endif
