/* C interface to the pooling/codec library: opaque handles, status codes,
 * thread-local error text. Arrays are caller-allocated unless a *_free
 * function is documented for the result. */
#ifndef JPOOL_H
#define JPOOL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum jp_status {
  JP_OK = 0,
  JP_ERR_INVALID_ARGUMENT = 1,
  JP_ERR_DIMENSION_MISMATCH = 2,
  JP_ERR_IO = 3,
  JP_ERR_PARSE = 4,
  JP_ERR_DOMAIN = 5,
  JP_ERR_VERIFICATION_FAILED = 6,
  JP_ERR_INTERNAL = 7
} jp_status;

/* Message for the last failing call on this thread; never NULL. */
const char* jp_last_error(void);
const char* jp_version_string(void);

void jp_string_free(char* s);
void jp_doubles_free(double* p);

/* ------------------------------------------------------------------ */
/* Multisets                                                            */

typedef struct jp_multiset jp_multiset;

jp_status jp_multiset_create(size_t dim, const double* flat, size_t count,
                             jp_multiset** out);
void jp_multiset_free(jp_multiset* ms);
size_t jp_multiset_dim(const jp_multiset* ms);
size_t jp_multiset_size(const jp_multiset* ms);
/* buf must hold dim*size doubles. */
jp_status jp_multiset_points(const jp_multiset* ms, double* buf, size_t len);
jp_status jp_multiset_canonical(const jp_multiset* ms, jp_multiset** out);
jp_status jp_multiset_save(const jp_multiset* ms, const char* path);
jp_status jp_multiset_load(const char* path, jp_multiset** out);
jp_status jp_multiset_wasserstein(const jp_multiset* a, const jp_multiset* b,
                                  double* out);
jp_status jp_multiset_min_separation(const jp_multiset* ms, double* out);

/* ------------------------------------------------------------------ */
/* CPwL functions                                                       */

typedef struct jp_function jp_function;

void jp_function_free(jp_function* f);
size_t jp_function_input_dim(const jp_function* f);
size_t jp_function_output_dim(const jp_function* f);
jp_status jp_function_eval(const jp_function* f, const double* x, size_t x_len,
                           double* out, size_t out_len);
jp_status jp_function_save(const jp_function* f, const char* path);
jp_status jp_function_load(const char* path, jp_function** out);
jp_status jp_function_random_relu(size_t input_dim, const size_t* hidden,
                                  size_t hidden_len, size_t output_dim,
                                  uint64_t seed, jp_function** out);
/* Axis-aligned grid partition of the unit box with random affine pieces. */
jp_status jp_function_random_partition(size_t dim, size_t resolution,
                                       size_t output_dim, uint64_t seed,
                                       jp_function** out);

/* ------------------------------------------------------------------ */
/* Pooling                                                              */

jp_status jp_janossy_pool(const jp_function* f, size_t arity, size_t count,
                          size_t point_dim, const double* flat, size_t flat_len,
                          double* out, size_t out_len);
jp_status jp_invariance_check(const jp_function* f, size_t arity, size_t count,
                              size_t point_dim, const double* flat,
                              size_t flat_len, size_t trials, uint64_t seed,
                              double* max_deviation);

/* ------------------------------------------------------------------ */
/* Collision witnesses                                                  */

typedef struct jp_certificate jp_certificate;

typedef struct jp_witness_options {
  double seed_point; /* first diagonal seed, in (0,1) */
  uint64_t seed;
  int max_attempts;
  double tol;
  double min_gap;
  int exact; /* nonzero: also run the rational-arithmetic checks */
} jp_witness_options;

void jp_witness_options_init(jp_witness_options* opts);

jp_status jp_find_collision(const jp_function* f, size_t arity, size_t count,
                            const jp_witness_options* opts,
                            jp_certificate** out);
jp_status jp_find_lifted_collision(const jp_function* f, size_t arity,
                                   size_t count, const double* alpha,
                                   const double* beta, size_t point_dim,
                                   const jp_witness_options* opts,
                                   jp_certificate** out);
void jp_certificate_free(jp_certificate* cert);
jp_status jp_certificate_info(const jp_certificate* cert, size_t* arity,
                              size_t* count, size_t* point_dim, int* exact);
jp_status jp_certificate_save(const jp_certificate* cert, const char* path);
jp_status jp_certificate_load(const char* path, jp_certificate** out);
/* The two colliding multisets. */
jp_status jp_certificate_multisets(const jp_certificate* cert,
                                   jp_multiset** base, jp_multiset** perturbed);

typedef struct jp_verify_result {
  int ok;
  double pooled_residual;
  double multiset_gap;
} jp_verify_result;

/* Re-checks everything. exact < 0 / tol < 0 fall back to the certificate's
 * stored settings. *report (optional) gets one line per check; free with
 * jp_string_free. */
jp_status jp_certificate_verify(const jp_certificate* cert, int exact,
                                double tol, jp_verify_result* result,
                                char** report);

/* ------------------------------------------------------------------ */
/* Grid codec                                                           */

typedef struct jp_codec jp_codec;

/* margin < 0 selects the default (separation/8). */
jp_status jp_codec_build(double separation, const double* box_lo,
                         const double* box_hi, size_t dim, double margin,
                         jp_codec** out);
void jp_codec_free(jp_codec* codec);
size_t jp_codec_dim(const jp_codec* codec);
size_t jp_codec_output_dim(const jp_codec* codec);
double jp_codec_separation(const jp_codec* codec);
double jp_codec_margin(const jp_codec* codec);
size_t jp_codec_num_cubes(const jp_codec* codec);
jp_status jp_codec_save(const jp_codec* codec, const char* path);
jp_status jp_codec_load(const char* path, jp_codec** out);
jp_status jp_codec_admits(const jp_codec* codec, const jp_multiset* ms,
                          int* out);
jp_status jp_codec_encode(const jp_codec* codec, const jp_multiset* ms,
                          double* out, size_t out_len);
jp_status jp_codec_decode(const jp_codec* codec, const double* encoding,
                          size_t len, double ind_tol, jp_multiset** out);
/* Encoding files embed the codec. */
jp_status jp_encoding_save(const jp_codec* codec, const double* values,
                           size_t len, const char* path);
jp_status jp_encoding_load(const char* path, jp_codec** codec_out,
                           double** values_out, size_t* len_out);

/* Ratio ||E(A)-E(B)||_inf / d_W(A,B) over `trials` sampled pairs of
 * `count`-point multisets with pairwise separation >= sample_separation. */
jp_status jp_bilip_estimate(const jp_codec* codec, size_t count,
                            double sample_separation, size_t trials,
                            uint64_t seed, double* min_ratio, double* max_ratio,
                            size_t* pairs);

/* ------------------------------------------------------------------ */
/* Datasets and separation statistics                                   */

typedef struct jp_dataset jp_dataset;

jp_status jp_dataset_load_xyz(const char* path, jp_dataset** out);
void jp_dataset_free(jp_dataset* ds);
size_t jp_dataset_size(const jp_dataset* ds);
jp_status jp_dataset_get(const jp_dataset* ds, size_t index,
                         jp_multiset** out);

/* normalized_out (optional) receives one normalized separation per record;
 * free with jp_doubles_free. */
jp_status jp_separation_report(const jp_dataset* ds, double* domain_min_sep,
                               double* domain_min_normalized,
                               double** normalized_out, size_t* count_out);

jp_status jp_histogram_write(const double* values, size_t len, size_t bins,
                             const char* csv_path, const char* svg_path,
                             const char* title, double* out_min,
                             double* out_mean);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* JPOOL_H */
