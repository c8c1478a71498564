#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "revfield.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      fprintf(stderr, "%s:%d: failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

static void progress(size_t done, size_t total, void* user) {
  size_t* calls = (size_t*)user;
  ++*calls;
  if (done > total) ++failures;
}

static void test_context(void) {
  rf_context* ctx = rf_context_new();
  EXPECT(ctx != NULL);
  EXPECT(strcmp(rf_last_error(ctx), "") == 0);
  EXPECT(rf_context_set(ctx, "rtol", "1e-10") == RF_OK);
  EXPECT(rf_context_set(ctx, "no_such_key", "1") == RF_ERR_VALIDATION);
  EXPECT(strstr(rf_last_error(ctx), "no_such_key") != NULL);
  EXPECT(rf_context_set(ctx, "rtol", "-1") == RF_ERR_VALIDATION);
  EXPECT(rf_context_set(ctx, NULL, "1") == RF_ERR_NULL_ARGUMENT);
  EXPECT(rf_context_load_config(ctx, "/nonexistent/revfield.toml") == RF_ERR_IO);
  EXPECT(rf_context_set(ctx, "rtol", "1e-10") == RF_OK);
  EXPECT(strcmp(rf_last_error(ctx), "") == 0);
  EXPECT(strcmp(rf_status_name(RF_ERR_NEAR_BIFURCATION), "near-bifurcation") == 0);
  EXPECT(strcmp(rf_status_name(RF_ERR_NULL_ARGUMENT), "null-argument") == 0);
  EXPECT(strlen(rf_version()) > 0);
  rf_context_free(ctx);
  rf_context_free(NULL);
}

static void test_combinatorics(void) {
  rf_context* ctx = rf_context_new();
  uint64_t count = 0;
  EXPECT(rf_count_strata(ctx, 2, &count) == RF_OK && count == 3);
  EXPECT(rf_count_strata(ctx, 3, &count) == RF_OK && count == 6);
  EXPECT(rf_count_strata(ctx, -2, &count) == RF_ERR_DOMAIN);
  EXPECT(rf_count_strata(ctx, 2, NULL) == RF_ERR_NULL_ARGUMENT);

  char* json = NULL;
  EXPECT(rf_strata_json(ctx, 2, &json) == RF_OK);
  EXPECT(json != NULL && strstr(json, "\"FFF\"") != NULL);
  rf_string_free(json);
  EXPECT(rf_context_set(ctx, "max_k", "4") == RF_OK);
  EXPECT(rf_strata_json(ctx, 5, &json) == RF_ERR_CAPACITY);

  int map[8];
  size_t len = 0;
  EXPECT(rf_udf_to_map(ctx, "UUDD", map, 8, &len) == RF_OK);
  EXPECT(len == 4 && map[0] == 3 && map[1] == 2 && map[2] == 1 && map[3] == 0);
  EXPECT(rf_udf_to_map(ctx, "UUDD", map, 2, &len) == RF_ERR_CAPACITY);
  EXPECT(rf_udf_to_map(ctx, "UDD", map, 8, &len) == RF_ERR_VALIDATION);

  char* udf = NULL;
  const int fud[] = {0, 2, 1};
  EXPECT(rf_map_to_udf(ctx, fud, 3, &udf) == RF_OK);
  EXPECT(udf != NULL && strcmp(udf, "FUD") == 0);
  rf_string_free(udf);
  const int bad[] = {1, 1, 0};
  EXPECT(rf_map_to_udf(ctx, bad, 3, &udf) == RF_ERR_VALIDATION);
  rf_context_free(ctx);
}

static void test_classify_and_realize(void) {
  rf_context* ctx = rf_context_new();
  const double cubic[] = {0.0, -1.0};
  rf_classification* c = NULL;
  EXPECT(rf_classify(ctx, cubic, 2, 0, &c) == RF_OK);
  EXPECT(rf_classification_is_generic(c) == 1);
  EXPECT(rf_classification_margin(c) > 0.0);
  char* label = NULL;
  EXPECT(rf_classification_label(ctx, c, &label) == RF_OK);
  EXPECT(label != NULL && strcmp(label, "FFF") == 0);
  rf_string_free(label);
  char* json = NULL;
  EXPECT(rf_classification_json(ctx, c, 1, &json) == RF_OK);
  EXPECT(json != NULL && strstr(json, "\"polyline\"") != NULL);
  rf_string_free(json);
  rf_classification_free(c);

  const double cusp[] = {0.0, 0.0};
  EXPECT(rf_classify(ctx, cusp, 2, RF_CLASSIFY_TAU_ONLY, &c) == RF_OK);
  EXPECT(rf_classification_is_generic(c) == 0);
  EXPECT(rf_classification_label(ctx, c, &label) == RF_OK);
  EXPECT(strcmp(label, "bifurcation:parabolic-real") == 0);
  rf_string_free(label);
  rf_classification_free(c);

  const double one[] = {0.0};
  EXPECT(rf_classify(ctx, one, 1, 0, &c) == RF_ERR_DOMAIN);
  const double bad[] = {0.0, NAN};
  EXPECT(rf_classify(ctx, bad, 2, 0, &c) == RF_ERR_VALIDATION);
  EXPECT(rf_classify(ctx, NULL, 2, 0, &c) == RF_ERR_NULL_ARGUMENT);

  double eps[4];
  size_t len = 0;
  char* report = NULL;
  EXPECT(rf_realize(ctx, "FFF", "{\"kappas\":[3.141592653589793,3.141592653589793]}", eps, 4, &len, &report) ==
         RF_OK);
  EXPECT(len == 2 && fabs(eps[0]) < 1e-6 && fabs(eps[1] + 1.0) < 1e-6);
  EXPECT(report != NULL && strstr(report, "\"converged\": true") != NULL);
  rf_string_free(report);
  EXPECT(rf_realize(ctx, "FFF", "{\"kappas\":[1.0]}", eps, 4, &len, NULL) == RF_ERR_VALIDATION);
  EXPECT(rf_realize(ctx, "FFF", "not json", eps, 4, &len, NULL) == RF_ERR_VALIDATION);
  EXPECT(rf_realize(ctx, "FFF", "{\"kappas\":[1.0,1.0]}", eps, 1, &len, NULL) == RF_ERR_CAPACITY);
  rf_context_free(ctx);
}

static void test_portrait_and_bifurcation(void) {
  rf_context* ctx = rf_context_new();
  const double cubic[] = {0.0, -1.0};
  char* svg = NULL;
  EXPECT(rf_portrait_svg(ctx, cubic, 2, RF_PORTRAIT_NO_PROBES, &svg) == RF_OK);
  EXPECT(svg != NULL && strstr(svg, "separatrix loop") != NULL && strstr(svg, "class=\"probe\"") == NULL);
  rf_string_free(svg);
  const double cusp[] = {0.0, 0.0};
  EXPECT(rf_portrait_svg(ctx, cusp, 2, 0, &svg) == RF_ERR_NEAR_BIFURCATION);
  EXPECT(rf_portrait_svg(ctx, cusp, 2, RF_PORTRAIT_DIAGNOSTICS, &svg) == RF_OK);
  rf_string_free(svg);

  EXPECT(rf_cubic_discriminant(1.0, -3.0) == 81.0);
  EXPECT(rf_quartic_discriminant(1.0, 0.0, 2.0) == 0.0);
  EXPECT(fabs(rf_quartic_homoclinic_surface(1.25, sqrt(8.0), 1.0)) < 1e-9);

  rf_scan_spec spec;
  rf_scan_spec_default(&spec, 2);
  EXPECT(spec.k == 2);
  spec.n0 = spec.n1 = 6;
  size_t calls = 0;
  char* csv = NULL;
  int labels = 0;
  EXPECT(rf_scan(ctx, &spec, progress, &calls, &csv, &svg, &labels) == RF_OK);
  EXPECT(calls > 0);
  EXPECT(labels == 3);
  EXPECT(csv != NULL && strstr(csv, "FUD") != NULL);
  EXPECT(svg != NULL && strncmp(svg, "<svg", 4) == 0);
  rf_string_free(csv);
  rf_string_free(svg);
  spec.k = 5;
  EXPECT(rf_scan(ctx, &spec, NULL, NULL, &csv, NULL, NULL) == RF_ERR_DOMAIN);
  rf_context_free(ctx);
}

int main(void) {
  test_context();
  test_combinatorics();
  test_classify_and_realize();
  test_portrait_and_bifurcation();
  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  puts("C API checks passed");
  return 0;
}
