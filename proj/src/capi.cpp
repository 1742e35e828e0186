#include "uqinit.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <span>
#include <stdexcept>
#include <string>

#include "layer.hpp"
#include "quant.hpp"
#include "rng.hpp"
#include "scale_search.hpp"
#include "zeropoint.hpp"

namespace {

thread_local std::string g_last_error;

int fail(int code, const char* message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return UQ_OK;
  } catch (const std::invalid_argument& e) {
    return fail(UQ_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(UQ_ERR_NO_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return fail(UQ_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(UQ_ERR_INTERNAL, "unknown error");
  }
}

uqinit::QuantParams to_cpp(uq_quant_params p) { return {p.scale, p.zero_point, p.bits}; }

uq_quant_params to_c(const uqinit::QuantParams& p) {
  return {p.scale, p.zero_point, static_cast<int32_t>(p.bits)};
}

uqinit::SearchConfig to_cpp_config(const uq_search_config* cfg) {
  if (cfg == nullptr) return {};
  return {cfg->T, cfg->Tc, cfg->window_coarse_steps};
}

struct MethodSpec {
  uqinit::InitMethod method;
  uqinit::ZeroSolver solver;
};

MethodSpec to_cpp_method(int32_t method) {
  using uqinit::InitMethod;
  using uqinit::ZeroSolver;
  switch (method) {
    case UQ_METHOD_MINMAX: return {InitMethod::minmax, ZeroSolver::approx};
    case UQ_METHOD_MINMAX_PLUS: return {InitMethod::minmax_plus, ZeroSolver::approx};
    case UQ_METHOD_INT_SEARCH: return {InitMethod::int_search, ZeroSolver::approx};
    case UQ_METHOD_INT_SEARCH_ZP: return {InitMethod::int_search_zp, ZeroSolver::approx};
    case UQ_METHOD_NEUQI: return {InitMethod::neuqi, ZeroSolver::approx};
    case UQ_METHOD_NEUQI_EXACT: return {InitMethod::neuqi, ZeroSolver::exact};
    case UQ_METHOD_NEUQI_EXHAUSTIVE: return {InitMethod::neuqi_exhaustive, ZeroSolver::approx};
    case UQ_METHOD_NEUQI_FULL: return {InitMethod::neuqi_full, ZeroSolver::approx};
    case UQ_METHOD_ORACLE: return {InitMethod::oracle, ZeroSolver::approx};
    default: throw std::invalid_argument("unknown method id");
  }
}

uqinit::WeightedRow make_row(const double* values, const double* weights, size_t n) {
  if (values == nullptr || weights == nullptr) {
    throw std::invalid_argument("null values/weights pointer");
  }
  return uqinit::WeightedRow(std::vector<double>(values, values + n),
                             std::vector<double>(weights, weights + n));
}

void require(bool cond, const char* message) {
  if (!cond) throw std::invalid_argument(message);
}

uqinit::GroupSpec group_spec_for(const uqinit::LayerProblem& p, int64_t group_size) {
  if (group_size == 0 || static_cast<std::size_t>(group_size) == p.cols) {
    return {uqinit::GroupMode::channel, p.cols};
  }
  require(group_size > 0, "group_size must be nonnegative");
  return {uqinit::GroupMode::grouped, static_cast<std::size_t>(group_size)};
}

uqinit::InitResult run_row_init(const uqinit::WeightedRow& row, int bits, int32_t method,
                                const uq_search_config* cfg) {
  const uqinit::SearchConfig cc = to_cpp_config(cfg);
  const MethodSpec spec = to_cpp_method(method);
  switch (spec.method) {
    case uqinit::InitMethod::minmax: {
      const uqinit::QuantParams p = uqinit::minmax_init(row.values, bits);
      return {p, uqinit::quant_loss(row, p), 1};
    }
    case uqinit::InitMethod::minmax_plus: {
      const uqinit::QuantParams p = uqinit::minmax_plus_init(row.values, bits);
      return {p, uqinit::quant_loss(row, p), 1};
    }
    case uqinit::InitMethod::int_search:
      return uqinit::int_search_init(row, bits, cc);
    case uqinit::InitMethod::int_search_zp:
      return uqinit::int_search_zp_perspective(row, bits);
    case uqinit::InitMethod::neuqi:
      return uqinit::neuqi_init(row, bits, cc, spec.solver);
    case uqinit::InitMethod::neuqi_exhaustive:
      return uqinit::neuqi_init_exhaustive(row, bits, cc.T, uqinit::ZeroSolver::approx);
    case uqinit::InitMethod::neuqi_full:
      return uqinit::neuqi_init_exhaustive(row, bits, cc.T, uqinit::ZeroSolver::exact);
    case uqinit::InitMethod::oracle:
      return uqinit::brute_force_oracle(row, bits, cc.T, cc.T);
  }
  throw std::invalid_argument("unknown method id");
}

}  // namespace

struct uq_layer {
  uqinit::LayerProblem problem;
};

struct uq_quantized_layer {
  uqinit::QuantizedLayer data;
};

extern "C" {

const char* uq_version(void) { return "0.1.0"; }

const char* uq_last_error(void) { return g_last_error.c_str(); }

uq_search_config uq_default_search_config(void) {
  const uqinit::SearchConfig d{};
  return {d.T, d.Tc, d.window_coarse_steps};
}

int uq_quantize_scalar(double x, uq_quant_params p, int32_t* code, double* dequant) {
  return guarded([&] {
    require(code != nullptr && dequant != nullptr, "null output pointer");
    uqinit::validate(to_cpp(p));
    const uqinit::ScalarQuant q = uqinit::quantize_scalar(x, to_cpp(p));
    *code = q.code;
    *dequant = q.value;
  });
}

int uq_quantize_row(const double* values, size_t n, uq_quant_params p, int32_t* codes,
                    double* dequant) {
  return guarded([&] {
    require(values != nullptr && codes != nullptr, "null values/codes pointer");
    const uqinit::QuantizedRow q =
        uqinit::quantize_row(std::span<const double>(values, n), to_cpp(p));
    std::memcpy(codes, q.codes.data(), n * sizeof(int32_t));
    if (dequant != nullptr) {
      const std::vector<double> d = uqinit::dequantize_row(q);
      std::memcpy(dequant, d.data(), n * sizeof(double));
    }
  });
}

int uq_quant_loss(const double* values, const double* weights, size_t n, uq_quant_params p,
                  double* loss) {
  return guarded([&] {
    require(loss != nullptr, "null output pointer");
    const uqinit::WeightedRow row = make_row(values, weights, n);
    *loss = uqinit::quant_loss(row, to_cpp(p));
  });
}

int uq_minmax_init(const double* values, size_t n, int32_t bits, uq_quant_params* out) {
  return guarded([&] {
    require(values != nullptr && out != nullptr && n > 0, "bad arguments");
    *out = to_c(uqinit::minmax_init(std::span<const double>(values, n), bits));
  });
}

int uq_minmax_plus_init(const double* values, size_t n, int32_t bits, uq_quant_params* out) {
  return guarded([&] {
    require(values != nullptr && out != nullptr && n > 0, "bad arguments");
    *out = to_c(uqinit::minmax_plus_init(std::span<const double>(values, n), bits));
  });
}

int uq_uniform_optimal_params(double a, double b, int32_t bits, uq_quant_params* out,
                              double* expected_mse) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    const uqinit::UniformOptimal u = uqinit::uniform_optimal_params(a, b, bits);
    *out = to_c(u.params);
    if (expected_mse != nullptr) *expected_mse = u.expected_mse;
  });
}

int uq_degenerate_params(double value, int32_t bits, uq_quant_params* out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = to_c(uqinit::degenerate_params(value, bits));
  });
}

int uq_scale_candidates(const double* values, size_t n, int32_t bits, int32_t T, double* out) {
  return guarded([&] {
    require(values != nullptr && out != nullptr && n > 0, "bad arguments");
    const std::vector<double> cands =
        uqinit::scale_candidates(std::span<const double>(values, n), bits, T);
    std::memcpy(out, cands.data(), cands.size() * sizeof(double));
  });
}

int uq_optimal_zero(const double* x, const double* h, size_t n, int32_t bits, int32_t mode,
                    double center, uq_sweep_result* out) {
  return guarded([&] {
    require(x != nullptr && h != nullptr && out != nullptr, "null pointer");
    const std::span<const double> xs(x, n);
    const std::span<const double> hs(h, n);
    uqinit::SweepResult r{};
    switch (mode) {
      case UQ_ZERO_EXACT: r = uqinit::optimal_zero_exact(xs, hs, bits); break;
      case UQ_ZERO_SMOOTHED: r = uqinit::optimal_zero_smoothed(xs, hs, bits); break;
      case UQ_ZERO_WINDOW: r = uqinit::optimal_zero_window(xs, hs, bits, center); break;
      default: throw std::invalid_argument("unknown zero-point mode");
    }
    *out = {r.z_star, r.loss_star};
  });
}

int uq_neuqi_zero(const double* values, const double* weights, size_t n, double scale,
                  int32_t bits, uq_sweep_result* out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    const uqinit::WeightedRow row = make_row(values, weights, n);
    const uqinit::SweepResult r = uqinit::neuqi_zero(row, scale, bits);
    *out = {r.z_star, r.loss_star};
  });
}

int uq_row_init(const double* values, const double* weights, size_t n, int32_t bits,
                int32_t method, const uq_search_config* cfg, uq_init_result* out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    const uqinit::WeightedRow row = make_row(values, weights, n);
    const uqinit::InitResult r = run_row_init(row, bits, method, cfg);
    *out = {to_c(r.params), r.loss, r.evaluations};
  });
}

int uq_layer_create(int64_t rows, int64_t cols, const double* weights, uq_layer** out) {
  return guarded([&] {
    require(out != nullptr && weights != nullptr, "null pointer");
    require(rows > 0 && cols > 0, "rows/cols must be positive");
    auto layer = std::make_unique<uq_layer>();
    layer->problem.rows = static_cast<std::size_t>(rows);
    layer->problem.cols = static_cast<std::size_t>(cols);
    layer->problem.weights.assign(weights, weights + rows * cols);
    layer->problem.hessian_diag.assign(static_cast<std::size_t>(cols), 1.0);
    uqinit::validate(layer->problem);
    *out = layer.release();
  });
}

void uq_layer_destroy(uq_layer* layer) { delete layer; }

int uq_layer_set_hessian_diag(uq_layer* layer, const double* diag) {
  return guarded([&] {
    require(layer != nullptr && diag != nullptr, "null pointer");
    layer->problem.hessian_diag.assign(diag, diag + layer->problem.cols);
    layer->problem.hessian_full.clear();
    uqinit::validate(layer->problem);
  });
}

int uq_layer_set_hessian_full(uq_layer* layer, const double* full) {
  return guarded([&] {
    require(layer != nullptr && full != nullptr, "null pointer");
    const std::size_t c = layer->problem.cols;
    layer->problem.hessian_full.assign(full, full + c * c);
    for (std::size_t i = 0; i < c; ++i) {
      layer->problem.hessian_diag[i] = layer->problem.hessian_full[i * c + i];
    }
    uqinit::validate(layer->problem);
  });
}

int uq_layer_hessian_from_activations(uq_layer* layer, const double* activations, int64_t m) {
  return guarded([&] {
    require(layer != nullptr && activations != nullptr, "null pointer");
    require(m > 0, "need at least one activation row");
    const std::size_t cols = layer->problem.cols;
    uqinit::HessianEstimate est = uqinit::hessian_from_activations(
        std::span<const double>(activations, static_cast<std::size_t>(m) * cols),
        static_cast<std::size_t>(m), cols);
    layer->problem.hessian_full = std::move(est.full);
    layer->problem.hessian_diag = std::move(est.diag);
    uqinit::validate(layer->problem);
  });
}

int uq_layer_init(const uq_layer* layer, int32_t bits, int64_t group_size, int32_t method,
                  const uq_search_config* cfg, double* scales, double* zero_points,
                  double* losses, int64_t* evaluations) {
  return guarded([&] {
    require(layer != nullptr, "null layer");
    const MethodSpec spec = to_cpp_method(method);
    const uqinit::LayerInit init =
        uqinit::init_layer(layer->problem, group_spec_for(layer->problem, group_size), bits,
                           spec.method, to_cpp_config(cfg), spec.solver);
    const std::size_t m = init.params.size();
    for (std::size_t i = 0; i < m; ++i) {
      if (scales != nullptr) scales[i] = init.params[i].scale;
      if (zero_points != nullptr) zero_points[i] = init.params[i].zero_point;
      if (losses != nullptr) losses[i] = init.losses[i];
    }
    if (evaluations != nullptr) *evaluations = init.evaluations;
  });
}

int uq_layer_quantize(const uq_layer* layer, int32_t bits, int64_t group_size, int32_t method,
                      const uq_search_config* cfg, int32_t compensate,
                      uq_quantized_layer** out) {
  return guarded([&] {
    require(layer != nullptr && out != nullptr, "null pointer");
    const MethodSpec spec = to_cpp_method(method);
    auto q = std::make_unique<uq_quantized_layer>();
    q->data = uqinit::quantize_layer(layer->problem, group_spec_for(layer->problem, group_size),
                                     bits, spec.method, to_cpp_config(cfg), compensate != 0,
                                     spec.solver);
    *out = q.release();
  });
}

void uq_qlayer_destroy(uq_quantized_layer* q) { delete q; }

int uq_qlayer_dims(const uq_quantized_layer* q, int64_t* rows, int64_t* cols,
                   int64_t* group_size, int64_t* n_groups, int32_t* bits,
                   int32_t* compensated) {
  return guarded([&] {
    require(q != nullptr, "null handle");
    if (rows != nullptr) *rows = static_cast<int64_t>(q->data.rows);
    if (cols != nullptr) *cols = static_cast<int64_t>(q->data.cols);
    if (group_size != nullptr) *group_size = static_cast<int64_t>(q->data.group_size);
    if (n_groups != nullptr) *n_groups = static_cast<int64_t>(q->data.n_groups);
    if (bits != nullptr) *bits = q->data.bits;
    if (compensated != nullptr) *compensated = q->data.compensated ? 1 : 0;
  });
}

int uq_qlayer_codes(const uq_quantized_layer* q, int32_t* out) {
  return guarded([&] {
    require(q != nullptr && out != nullptr, "null pointer");
    std::memcpy(out, q->data.codes.data(), q->data.codes.size() * sizeof(int32_t));
  });
}

int uq_qlayer_params(const uq_quantized_layer* q, uq_quant_params* out) {
  return guarded([&] {
    require(q != nullptr && out != nullptr, "null pointer");
    for (std::size_t i = 0; i < q->data.params.size(); ++i) out[i] = to_c(q->data.params[i]);
  });
}

int uq_qlayer_permutation(const uq_quantized_layer* q, uint32_t* out) {
  return guarded([&] {
    require(q != nullptr && out != nullptr, "null pointer");
    std::memcpy(out, q->data.perm.data(), q->data.perm.size() * sizeof(uint32_t));
  });
}

int uq_qlayer_dequantize(const uq_quantized_layer* q, double* out) {
  return guarded([&] {
    require(q != nullptr && out != nullptr, "null pointer");
    const std::vector<double> d = uqinit::dequantize_layer(q->data);
    std::memcpy(out, d.data(), d.size() * sizeof(double));
  });
}

int uq_qlayer_diag_loss(const uq_layer* layer, const uq_quantized_layer* q, double* out) {
  return guarded([&] {
    require(layer != nullptr && q != nullptr && out != nullptr, "null pointer");
    *out = uqinit::diag_loss(layer->problem, q->data);
  });
}

int uq_qlayer_full_loss(const uq_layer* layer, const uq_quantized_layer* q, double* out) {
  return guarded([&] {
    require(layer != nullptr && q != nullptr && out != nullptr, "null pointer");
    *out = uqinit::full_loss(layer->problem, q->data);
  });
}

int uq_average_bits(int32_t weight_bits, int32_t scale_bits, int32_t zero_bits,
                    int64_t group_divisor, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    require(group_divisor > 0, "group_divisor must be positive");
    *out = uqinit::average_bits(
        {weight_bits, scale_bits, zero_bits, static_cast<std::size_t>(group_divisor)});
  });
}

int uq_fill_random(uint64_t seed, uint64_t stream, int32_t dist, int64_t n, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    require(n >= 0, "negative length");
    uqinit::SplitMix64 rng(seed, stream);
    for (int64_t i = 0; i < n; ++i) {
      switch (dist) {
        case UQ_DIST_UNIFORM01: out[i] = rng.uniform(); break;
        case UQ_DIST_GAUSSIAN: out[i] = rng.gaussian(); break;
        default: throw std::invalid_argument("unknown distribution");
      }
    }
  });
}

}  // extern "C"
