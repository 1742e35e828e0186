#include "layer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "parallel.hpp"
#include "zeropoint.hpp"

namespace uqinit {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kDampingFactor = 0.01;   // of mean Hessian diagonal
constexpr double kDiagMatchTol = 1e-6;    // relative

void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " contains non-finite values");
  }
}

}  // namespace

const char* method_name(InitMethod m) {
  switch (m) {
    case InitMethod::minmax: return "minmax";
    case InitMethod::minmax_plus: return "minmax_plus";
    case InitMethod::int_search: return "int_search";
    case InitMethod::int_search_zp: return "int_search_zp";
    case InitMethod::neuqi: return "neuqi";
    case InitMethod::neuqi_exhaustive: return "neuqi_exhaustive";
    case InitMethod::neuqi_full: return "neuqi_full";
    case InitMethod::oracle: return "oracle";
  }
  return "unknown";
}

InitMethod parse_method(const std::string& name) {
  for (InitMethod m :
       {InitMethod::minmax, InitMethod::minmax_plus, InitMethod::int_search,
        InitMethod::int_search_zp, InitMethod::neuqi, InitMethod::neuqi_exhaustive,
        InitMethod::neuqi_full, InitMethod::oracle}) {
    if (name == method_name(m)) return m;
  }
  throw std::invalid_argument("unknown method: " + name);
}

void validate(const LayerProblem& p) {
  if (p.rows == 0 || p.cols == 0) throw std::invalid_argument("layer: empty dimensions");
  if (p.weights.size() != p.rows * p.cols) {
    throw std::invalid_argument("layer: weights size does not match rows x cols");
  }
  if (p.hessian_diag.size() != p.cols) {
    throw std::invalid_argument("layer: hessian_diag length does not match cols");
  }
  check_finite(p.weights, "weights");
  check_finite(p.hessian_diag, "hessian_diag");
  for (double d : p.hessian_diag) {
    if (d < 0.0) throw std::invalid_argument("layer: hessian_diag must be nonnegative");
  }
  if (p.has_full()) {
    if (p.hessian_full.size() != p.cols * p.cols) {
      throw std::invalid_argument("layer: hessian_full size does not match cols x cols");
    }
    check_finite(p.hessian_full, "hessian_full");
    for (std::size_t i = 0; i < p.cols; ++i) {
      const double a = p.hessian_full[i * p.cols + i];
      const double b = p.hessian_diag[i];
      if (std::abs(a - b) > kDiagMatchTol * std::max({1.0, std::abs(a), std::abs(b)})) {
        throw std::invalid_argument("layer: hessian_diag disagrees with diag(hessian_full)");
      }
    }
  }
}

double average_bits(const BitBudget& b) {
  levels(b.weight_bits);
  if (b.scale_bits < 0 || b.zero_bits < 0) {
    throw std::invalid_argument("average_bits: parameter bits must be nonnegative");
  }
  if (b.group_divisor == 0) throw std::invalid_argument("average_bits: zero group divisor");
  return b.weight_bits +
         static_cast<double>(b.scale_bits + b.zero_bits) / static_cast<double>(b.group_divisor);
}

HessianEstimate hessian_from_activations(std::span<const double> activations, std::size_t m,
                                         std::size_t cols) {
  if (m == 0 || cols == 0 || activations.size() != m * cols) {
    throw std::invalid_argument("hessian_from_activations: activation shape mismatch");
  }
  check_finite(activations, "activations");
  Eigen::Map<const RowMajorMatrix> X(activations.data(), static_cast<Eigen::Index>(m),
                                     static_cast<Eigen::Index>(cols));
  RowMajorMatrix full = (X.transpose() * X) / static_cast<double>(m);
  HessianEstimate out;
  out.cols = cols;
  out.full.assign(full.data(), full.data() + cols * cols);
  out.diag.resize(cols);
  for (std::size_t i = 0; i < cols; ++i) out.diag[i] = full(static_cast<Eigen::Index>(i),
                                                           static_cast<Eigen::Index>(i));
  return out;
}

double LayerInit::total_loss() const {
  return std::accumulate(losses.begin(), losses.end(), 0.0);
}

namespace {

std::size_t effective_group_size(const LayerProblem& p, const GroupSpec& g) {
  if (g.mode == GroupMode::channel) return p.cols;
  if (g.group_size == 0) throw std::invalid_argument("group_size must be positive");
  if (p.cols % g.group_size != 0) {
    throw std::invalid_argument("cols not divisible by group_size");
  }
  return g.group_size;
}

bool all_equal(std::span<const double> v) {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return !(*hi > *lo);
}

bool all_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

InitResult run_method(const WeightedRow& slice, int bits, InitMethod method,
                      const SearchConfig& cfg, ZeroSolver solver) {
  if (all_equal(slice.values)) {
    return {degenerate_params(slice.values.front(), bits), 0.0, 0};
  }
  // A weightless group incurs no loss anywhere; fall back to the Min-Max
  // formula so search methods are never entered without a positive weight.
  if (all_zero(slice.weights) && method != InitMethod::minmax &&
      method != InitMethod::minmax_plus) {
    return {minmax_init(slice.values, bits), 0.0, 0};
  }
  switch (method) {
    case InitMethod::minmax: {
      const QuantParams p = minmax_init(slice.values, bits);
      return {p, quant_loss(slice, p), 1};
    }
    case InitMethod::minmax_plus: {
      const QuantParams p = minmax_plus_init(slice.values, bits);
      return {p, quant_loss(slice, p), 1};
    }
    case InitMethod::int_search:
      return int_search_init(slice, bits, cfg);
    case InitMethod::int_search_zp:
      return int_search_zp_perspective(slice, bits);
    case InitMethod::neuqi:
      return neuqi_init(slice, bits, cfg, solver);
    case InitMethod::neuqi_exhaustive:
      return neuqi_init_exhaustive(slice, bits, cfg.T, ZeroSolver::approx);
    case InitMethod::neuqi_full:
      return neuqi_init_exhaustive(slice, bits, cfg.T, ZeroSolver::exact);
    case InitMethod::oracle:
      return brute_force_oracle(slice, bits, cfg.T, cfg.T);
  }
  throw std::invalid_argument("unknown method");
}

WeightedRow group_slice(const LayerProblem& p, std::size_t row, std::size_t group,
                        std::size_t gs) {
  const double* w = p.weights.data() + row * p.cols + group * gs;
  const double* h = p.hessian_diag.data() + group * gs;
  return WeightedRow(std::vector<double>(w, w + gs), std::vector<double>(h, h + gs));
}

}  // namespace

LayerInit init_layer(const LayerProblem& p, const GroupSpec& g, int bits, InitMethod method,
                     const SearchConfig& cfg, ZeroSolver solver) {
  validate(p);
  validate(cfg);
  levels(bits);
  const std::size_t gs = effective_group_size(p, g);
  const std::size_t n_groups = p.cols / gs;

  LayerInit out;
  out.rows = p.rows;
  out.cols = p.cols;
  out.group_size = gs;
  out.n_groups = n_groups;
  out.bits = bits;
  out.params.resize(p.rows * n_groups);
  out.losses.resize(p.rows * n_groups);
  std::vector<std::int64_t> evals(p.rows * n_groups);

  parallel_for(p.rows * n_groups, [&](std::size_t task) {
    const std::size_t r = task / n_groups;
    const std::size_t gi = task % n_groups;
    const WeightedRow slice = group_slice(p, r, gi, gs);
    const InitResult res = run_method(slice, bits, method, cfg, solver);
    out.params[task] = res.params;
    out.losses[task] = res.loss;
    evals[task] = res.evaluations;
  });
  out.evaluations = std::accumulate(evals.begin(), evals.end(), std::int64_t{0});
  return out;
}

namespace {

std::vector<std::uint32_t> descending_diag_order(const std::vector<double>& diag) {
  std::vector<std::uint32_t> perm(diag.size());
  std::iota(perm.begin(), perm.end(), 0u);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return diag[a] > diag[b]; });
  return perm;
}

LayerProblem permute_columns(const LayerProblem& p, const std::vector<std::uint32_t>& perm) {
  LayerProblem out;
  out.rows = p.rows;
  out.cols = p.cols;
  out.weights.resize(p.weights.size());
  out.hessian_diag.resize(p.cols);
  for (std::size_t j = 0; j < p.cols; ++j) out.hessian_diag[j] = p.hessian_diag[perm[j]];
  for (std::size_t r = 0; r < p.rows; ++r) {
    for (std::size_t j = 0; j < p.cols; ++j) {
      out.weights[r * p.cols + j] = p.weights[r * p.cols + perm[j]];
    }
  }
  if (p.has_full()) {
    out.hessian_full.resize(p.cols * p.cols);
    for (std::size_t i = 0; i < p.cols; ++i) {
      for (std::size_t j = 0; j < p.cols; ++j) {
        out.hessian_full[i * p.cols + j] = p.hessian_full[perm[i] * p.cols + perm[j]];
      }
    }
  }
  return out;
}

// Upper factor U with H_damped^{-1} = U^T U, as used by the GPTQ update.
RowMajorMatrix inverse_hessian_factor(const LayerProblem& p) {
  const auto n = static_cast<Eigen::Index>(p.cols);
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      H(i, j) = p.hessian_full[static_cast<std::size_t>(i) * p.cols + static_cast<std::size_t>(j)];
    }
  }
  const double damp = kDampingFactor * H.diagonal().mean();
  H.diagonal().array() += damp;
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("hessian_full is not positive definite after damping");
  }
  Eigen::MatrixXd hinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::LLT<Eigen::MatrixXd> llt_inv(hinv);
  if (llt_inv.info() != Eigen::Success) {
    throw std::invalid_argument("inverse Hessian lost positive definiteness");
  }
  return RowMajorMatrix(llt_inv.matrixU());
}

}  // namespace

QuantizedLayer quantize_layer(const LayerProblem& p, const GroupSpec& g, int bits,
                              InitMethod method, const SearchConfig& cfg, bool compensate,
                              ZeroSolver solver) {
  validate(p);
  if (compensate && !p.has_full()) {
    throw std::invalid_argument("compensation requires hessian_full");
  }

  std::vector<std::uint32_t> perm;
  if (compensate) {
    perm = descending_diag_order(p.hessian_diag);
  } else {
    perm.resize(p.cols);
    std::iota(perm.begin(), perm.end(), 0u);
  }
  const LayerProblem work = compensate ? permute_columns(p, perm) : p;
  const LayerInit init = init_layer(work, g, bits, method, cfg, solver);

  QuantizedLayer out;
  out.rows = p.rows;
  out.cols = p.cols;
  out.group_size = init.group_size;
  out.n_groups = init.n_groups;
  out.bits = bits;
  out.compensated = compensate;
  out.params = init.params;
  out.perm = std::move(perm);
  out.codes.resize(p.rows * p.cols);

  if (!compensate) {
    parallel_for(p.rows, [&](std::size_t r) {
      for (std::size_t j = 0; j < p.cols; ++j) {
        const QuantParams& qp = out.params[r * out.n_groups + j / out.group_size];
        out.codes[r * p.cols + j] = quantize_scalar(work.weights[r * p.cols + j], qp).code;
      }
    });
    return out;
  }

  const RowMajorMatrix U = inverse_hessian_factor(work);
  std::vector<double> wbuf = work.weights;
  Eigen::Map<RowMajorMatrix> Wm(wbuf.data(), static_cast<Eigen::Index>(p.rows),
                                static_cast<Eigen::Index>(p.cols));
  const auto n = static_cast<Eigen::Index>(p.cols);

  parallel_for(p.rows, [&](std::size_t r) {
    const auto ri = static_cast<Eigen::Index>(r);
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::size_t gi = static_cast<std::size_t>(c) / out.group_size;
      const QuantParams& qp = out.params[r * out.n_groups + gi];
      const ScalarQuant q = quantize_scalar(Wm(ri, c), qp);
      out.codes[r * p.cols + static_cast<std::size_t>(c)] = q.code;
      const double err = (Wm(ri, c) - q.value) / U(c, c);
      if (c + 1 < n) {
        Wm.row(ri).tail(n - c - 1) -= err * U.row(c).tail(n - c - 1);
      }
    }
  });
  return out;
}

std::vector<double> dequantize_layer(const QuantizedLayer& q) {
  std::vector<double> out(q.rows * q.cols);
  for (std::size_t r = 0; r < q.rows; ++r) {
    for (std::size_t j = 0; j < q.cols; ++j) {
      const QuantParams& qp = q.params[r * q.n_groups + j / q.group_size];
      out[r * q.cols + q.perm[j]] =
          qp.scale * (q.codes[r * q.cols + j] - qp.zero_point);
    }
  }
  return out;
}

double diag_loss(const LayerProblem& p, const QuantizedLayer& q) {
  validate(p);
  const std::vector<double> deq = dequantize_layer(q);
  double acc = 0.0;
  for (std::size_t j = 0; j < p.cols; ++j) {
    double col = 0.0;
    for (std::size_t r = 0; r < p.rows; ++r) {
      const double d = deq[r * p.cols + j] - p.weights[r * p.cols + j];
      col += d * d;
    }
    acc += p.hessian_diag[j] * col;
  }
  return acc;
}

double full_loss(const LayerProblem& p, const QuantizedLayer& q) {
  validate(p);
  if (!p.has_full()) throw std::invalid_argument("full_loss requires hessian_full");
  const std::vector<double> deq = dequantize_layer(q);
  const auto n = static_cast<Eigen::Index>(p.cols);
  Eigen::Map<const RowMajorMatrix> H(p.hessian_full.data(), n, n);
  double acc = 0.0;
  Eigen::VectorXd d(n);
  for (std::size_t r = 0; r < p.rows; ++r) {
    for (std::size_t j = 0; j < p.cols; ++j) {
      d(static_cast<Eigen::Index>(j)) = deq[r * p.cols + j] - p.weights[r * p.cols + j];
    }
    acc += d.dot(H * d);
  }
  return acc;
}

}  // namespace uqinit
