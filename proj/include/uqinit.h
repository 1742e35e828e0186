/*
 * uqinit - uniform quantization parameter initialization.
 *
 * C API for the shared library. All functions return UQ_OK (0) on success
 * or a nonzero error code; uq_last_error() describes the most recent
 * failure on the calling thread. Buffers are caller-allocated unless a
 * function hands out an opaque handle, which must be released with the
 * matching destroy call.
 *
 * Scales are positive reals, zero-points are real-valued (grid-index
 * units), bit-widths run from 1 to 8. Grid level i dequantizes to
 * scale * (i - zero_point). Matrices are row-major doubles.
 */

#ifndef UQINIT_H
#define UQINIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define UQ_API __declspec(dllexport)
#else
#define UQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum {
  UQ_OK = 0,
  UQ_ERR_INVALID_ARGUMENT = 1,
  UQ_ERR_NULL_POINTER = 2,
  UQ_ERR_NO_MEMORY = 3,
  UQ_ERR_INTERNAL = 4
};

/* Initialization methods. */
enum {
  UQ_METHOD_MINMAX = 0,
  UQ_METHOD_MINMAX_PLUS = 1,
  UQ_METHOD_INT_SEARCH = 2,
  UQ_METHOD_INT_SEARCH_ZP = 3,
  UQ_METHOD_NEUQI = 4,
  UQ_METHOD_NEUQI_EXHAUSTIVE = 5, /* exhaustive scale grid, approximate zero-point */
  UQ_METHOD_NEUQI_FULL = 6,       /* exhaustive scale grid, exact zero-point sweep */
  UQ_METHOD_ORACLE = 7,           /* dense 2-D scan; for verification only */
  UQ_METHOD_NEUQI_EXACT = 8       /* coarse-to-fine with the exact zero-point sweep */
};

/* Zero-point solver modes for uq_optimal_zero. */
enum {
  UQ_ZERO_EXACT = 0,
  UQ_ZERO_SMOOTHED = 1,
  UQ_ZERO_WINDOW = 2
};

/* Distributions for uq_fill_random. */
enum {
  UQ_DIST_UNIFORM01 = 0,
  UQ_DIST_GAUSSIAN = 1
};

typedef struct uq_quant_params {
  double scale;
  double zero_point;
  int32_t bits;
} uq_quant_params;

typedef struct uq_search_config {
  int32_t T;                   /* full scale grid size */
  int32_t Tc;                  /* coarse grid size; must divide T */
  int32_t window_coarse_steps; /* fine-window half-width in coarse steps */
} uq_search_config;

typedef struct uq_init_result {
  uq_quant_params params;
  double loss;
  int64_t evaluations;
} uq_init_result;

typedef struct uq_sweep_result {
  double z_star;
  double loss_star;
} uq_sweep_result;

UQ_API const char* uq_version(void);

/* Message for the last error raised on this thread; empty string if none. */
UQ_API const char* uq_last_error(void);

/* Search configuration with the reference defaults T=2048, Tc=64, window 1. */
UQ_API uq_search_config uq_default_search_config(void);

/* ---- scalar / row primitives ------------------------------------------ */

UQ_API int uq_quantize_scalar(double x, uq_quant_params p, int32_t* code, double* dequant);

/* codes must hold n entries; dequant may be NULL. */
UQ_API int uq_quantize_row(const double* values, size_t n, uq_quant_params p, int32_t* codes,
                           double* dequant);

UQ_API int uq_quant_loss(const double* values, const double* weights, size_t n,
                         uq_quant_params p, double* loss);

UQ_API int uq_minmax_init(const double* values, size_t n, int32_t bits, uq_quant_params* out);
UQ_API int uq_minmax_plus_init(const double* values, size_t n, int32_t bits,
                               uq_quant_params* out);

/* Closed-form optimum for data uniform on [a, b]; expected_mse may be NULL. */
UQ_API int uq_uniform_optimal_params(double a, double b, int32_t bits, uq_quant_params* out,
                                     double* expected_mse);

UQ_API int uq_degenerate_params(double value, int32_t bits, uq_quant_params* out);

UQ_API int uq_scale_candidates(const double* values, size_t n, int32_t bits, int32_t T,
                               double* out /* length T */);

/* ---- zero-point solvers ------------------------------------------------ */

/*
 * Solves for the best zero-point of scale-normalized samples x with weights
 * h. mode selects the exact sweep, the smoothed (two events per sample)
 * sweep, or the exact sweep restricted to [center-1, center+1]; center is
 * ignored unless mode is UQ_ZERO_WINDOW.
 */
UQ_API int uq_optimal_zero(const double* x, const double* h, size_t n, int32_t bits,
                           int32_t mode, double center, uq_sweep_result* out);

/* Near-optimal zero-point for a fixed scale, in original weight units. */
UQ_API int uq_neuqi_zero(const double* values, const double* weights, size_t n, double scale,
                         int32_t bits, uq_sweep_result* out);

/* ---- row-level initialization ------------------------------------------ */

/*
 * Runs one initialization method on a weighted row. cfg may be NULL for the
 * defaults. For UQ_METHOD_ORACLE the scale and zero grids both take cfg->T.
 */
UQ_API int uq_row_init(const double* values, const double* weights, size_t n, int32_t bits,
                       int32_t method, const uq_search_config* cfg, uq_init_result* out);

/* ---- layers ------------------------------------------------------------ */

typedef struct uq_layer uq_layer;
typedef struct uq_quantized_layer uq_quantized_layer;

UQ_API int uq_layer_create(int64_t rows, int64_t cols, const double* weights, uq_layer** out);
UQ_API void uq_layer_destroy(uq_layer* layer);

UQ_API int uq_layer_set_hessian_diag(uq_layer* layer, const double* diag /* length cols */);

/* Sets the full Hessian (cols x cols) and refreshes the diagonal from it. */
UQ_API int uq_layer_set_hessian_full(uq_layer* layer, const double* full);

/* Estimates the proxy Hessian (1/m) X^T X from m activation rows. */
UQ_API int uq_layer_hessian_from_activations(uq_layer* layer, const double* activations,
                                             int64_t m);

/*
 * Chooses per-(row, group) parameters. group_size 0 means channel-wise.
 * scales/zero_points/losses are rows * n_groups arrays (n_groups =
 * cols / group_size); any of them (and evaluations) may be NULL.
 */
UQ_API int uq_layer_init(const uq_layer* layer, int32_t bits, int64_t group_size,
                         int32_t method, const uq_search_config* cfg, double* scales,
                         double* zero_points, double* losses, int64_t* evaluations);

/* Quantizes the layer; compensate nonzero enables GPTQ error feedback. */
UQ_API int uq_layer_quantize(const uq_layer* layer, int32_t bits, int64_t group_size,
                             int32_t method, const uq_search_config* cfg, int32_t compensate,
                             uq_quantized_layer** out);

UQ_API void uq_qlayer_destroy(uq_quantized_layer* q);

UQ_API int uq_qlayer_dims(const uq_quantized_layer* q, int64_t* rows, int64_t* cols,
                          int64_t* group_size, int64_t* n_groups, int32_t* bits,
                          int32_t* compensated);

/* Codes in permuted column order, rows x cols. */
UQ_API int uq_qlayer_codes(const uq_quantized_layer* q, int32_t* out);

/* Per-(row, group) parameters over permuted columns, rows * n_groups. */
UQ_API int uq_qlayer_params(const uq_quantized_layer* q, uq_quant_params* out);

/* perm[j] is the original column stored at permuted position j. */
UQ_API int uq_qlayer_permutation(const uq_quantized_layer* q, uint32_t* out);

/* Reconstruction in the original column order, rows x cols. */
UQ_API int uq_qlayer_dequantize(const uq_quantized_layer* q, double* out);

/* Diagonal-Hessian loss of a quantized layer against its source layer. */
UQ_API int uq_qlayer_diag_loss(const uq_layer* layer, const uq_quantized_layer* q, double* out);

/* Full trace-form loss tr(dW H dW^T); requires a full Hessian. */
UQ_API int uq_qlayer_full_loss(const uq_layer* layer, const uq_quantized_layer* q, double* out);

/* ---- bookkeeping -------------------------------------------------------- */

/* weight_bits + (scale_bits + zero_bits) / group_divisor. */
UQ_API int uq_average_bits(int32_t weight_bits, int32_t scale_bits, int32_t zero_bits,
                           int64_t group_divisor, double* out);

/*
 * Deterministic fixture synthesis from the splitmix64 counter-based
 * generator; output i depends only on (seed, stream, i).
 */
UQ_API int uq_fill_random(uint64_t seed, uint64_t stream, int32_t dist, int64_t n, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* UQINIT_H */
