#ifndef ZMETRICS_H
#define ZMETRICS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call. The first five values match the exit
 codes of the command-line tool.
 */
typedef enum {
  ZM_STATUS_OK = 0,
  ZM_STATUS_USAGE = 1,
  ZM_STATUS_PARSE = 2,
  ZM_STATUS_DATA = 3,
  ZM_STATUS_NUMERIC = 4,
  /*
   A required pointer argument was NULL.
   */
  ZM_STATUS_NULL_ARGUMENT = 5,
  /*
   An index was past the end of a handle's rows.
   */
  ZM_STATUS_OUT_OF_RANGE = 6,
  /*
   An internal panic was caught at the boundary.
   */
  ZM_STATUS_INTERNAL = 7,
} ZmStatus;

typedef enum {
  ZM_CORRELATION_TEST_PEARSON = 0,
  ZM_CORRELATION_TEST_SPEARMAN = 1,
  ZM_CORRELATION_TEST_KENDALL = 2,
} ZmCorrelationTest;

/*
 Measured subprograms of one code file.
 */
typedef struct ZmCode ZmCode;

/*
 A fitted or loaded regression model.
 */
typedef struct ZmModel ZmModel;

/*
 Measured schemas of one specification.
 */
typedef struct ZmSpec ZmSpec;

/*
 The eleven measures of one schema.
 */
typedef struct {
  uint64_t cc;
  uint64_t vl;
  uint64_t vu;
  uint64_t du;
  uint64_t uses;
  uint64_t defs;
  uint64_t ands;
  uint64_t ors;
  double cov;
  double ovl;
  double chi;
} ZmSpecMetrics;

/*
 The nine measures of one subprogram.
 */
typedef struct {
  uint64_t cl;
  uint64_t clc;
  uint64_t clcd;
  uint64_t clce;
  uint64_t cyc;
  uint64_t knots;
  uint64_t fin;
  uint64_t fout;
  uint64_t si;
} ZmCodeMetrics;

typedef struct {
  double r;
  double p;
  size_t n;
} ZmCorrelation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Description of the last failure on this thread, or NULL when none
 occurred. Release with `zm_string_free`.
 */
char *zm_last_error_message(void);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `s` must come from this library and not have been freed already.
 */
void zm_string_free(char *s);

/*
 Parses, resolves and measures a specification given as source text.

 # Safety
 `source` must be a NUL-terminated string; `out` must be writable.
 */
ZmStatus zm_spec_parse(const char *source, ZmSpec **out);

/*
 Number of schemas; 0 for NULL.

 # Safety
 `spec` must be NULL or a live handle.
 */
size_t zm_spec_schema_count(const ZmSpec *spec);

/*
 Name of schema `index`, borrowed from the handle; NULL when out of
 range.

 # Safety
 `spec` must be NULL or a live handle.
 */
const char *zm_spec_schema_name(const ZmSpec *spec, size_t index);

/*
 Measures of schema `index`.

 # Safety
 `spec` must be a live handle and `out` writable.
 */
ZmStatus zm_spec_metrics(const ZmSpec *spec, size_t index, ZmSpecMetrics *out);

/*
 # Safety
 `spec` must be NULL or a handle not yet freed.
 */
void zm_spec_free(ZmSpec *spec);

/*
 Parses and measures one code file given as source text.

 # Safety
 `source` must be a NUL-terminated string; `out` must be writable.
 */
ZmStatus zm_code_parse(const char *source, ZmCode **out);

/*
 Number of subprograms; 0 for NULL.

 # Safety
 `code` must be NULL or a live handle.
 */
size_t zm_code_unit_count(const ZmCode *code);

/*
 Name of subprogram `index`, borrowed from the handle; NULL when out of
 range.

 # Safety
 `code` must be NULL or a live handle.
 */
const char *zm_code_unit_name(const ZmCode *code, size_t index);

/*
 Measures of subprogram `index`.

 # Safety
 `code` must be a live handle and `out` writable.
 */
ZmStatus zm_code_metrics(const ZmCode *code, size_t index, ZmCodeMetrics *out);

/*
 # Safety
 `code` must be NULL or a handle not yet freed.
 */
void zm_code_free(ZmCode *code);

/*
 Two-tailed correlation test of two samples of length `n`.

 # Safety
 `x` and `y` must point to `n` doubles each; `out` must be writable.
 */
ZmStatus zm_correlate(ZmCorrelationTest test,
                      const double *x,
                      const double *y,
                      size_t n,
                      ZmCorrelation *out);

/*
 Least-squares fit of `response` on `k` named predictors. `rows` holds
 `n * k` values in row-major order. With `threshold` in (0, 1) the
 model is reduced by backward elimination; pass 0 to keep every
 predictor.

 # Safety
 `rows` must hold `n * k` doubles, `names` `k` NUL-terminated strings,
 `response` `n` doubles; `target` must be NUL-terminated and `out`
 writable.
 */
ZmStatus zm_model_fit(const double *rows,
                      size_t n,
                      size_t k,
                      const char *const *names,
                      const double *response,
                      const char *target,
                      double threshold,
                      ZmModel **out);

/*
 Loads a model written by `zmetrics fit`.

 # Safety
 `json` must be NUL-terminated; `out` must be writable.
 */
ZmStatus zm_model_from_json(const char *json, ZmModel **out);

/*
 The model as JSON. Release with `zm_string_free`; NULL for NULL.

 # Safety
 `model` must be NULL or a live handle.
 */
char *zm_model_to_json(const ZmModel *model);

/*
 The model as a formula with three-decimal coefficients. Release with
 `zm_string_free`; NULL for NULL.

 # Safety
 `model` must be NULL or a live handle.
 */
char *zm_model_formula(const ZmModel *model);

/*
 Number of predictor terms kept in the model; 0 for NULL.

 # Safety
 `model` must be NULL or a live handle.
 */
size_t zm_model_term_count(const ZmModel *model);

/*
 R squared of the model; NaN for NULL.

 # Safety
 `model` must be NULL or a live handle.
 */
double zm_model_r2(const ZmModel *model);

/*
 Applies a model over spec measures to one schema's measures.

 # Safety
 `model` must be a live handle, `metrics` readable and `out` writable.
 */
ZmStatus zm_model_predict(const ZmModel *model, const ZmSpecMetrics *metrics, double *out);

/*
 # Safety
 `model` must be NULL or a handle not yet freed.
 */
void zm_model_free(ZmModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZMETRICS_H */
