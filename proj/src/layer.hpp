#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "quant.hpp"
#include "scale_search.hpp"

namespace uqinit {

enum class GroupMode { channel, grouped };

struct GroupSpec {
  GroupMode mode = GroupMode::channel;
  std::size_t group_size = 128;  // grouped mode only; cols must divide evenly
};

enum class InitMethod {
  minmax,
  minmax_plus,
  int_search,
  int_search_zp,
  neuqi,
  neuqi_exhaustive,  // exhaustive S_T, approximate zero-point solver
  neuqi_full,        // exhaustive S_T, exact zero-point sweep
  oracle,            // dense 2-D scan, tests and compare reports only
};

const char* method_name(InitMethod m);
InitMethod parse_method(const std::string& name);  // throws on unknown name

/// Weight matrix plus Hessian information. hessian_full is optional and
/// only required for compensation mode.
struct LayerProblem {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> weights;       // row-major rows x cols
  std::vector<double> hessian_diag;  // length cols, nonnegative
  std::vector<double> hessian_full;  // empty, or row-major cols x cols

  bool has_full() const { return !hessian_full.empty(); }
};

void validate(const LayerProblem& p);

/// Bits per weight once per-group parameter storage is amortized:
/// weight_bits + (scale_bits + zero_bits) / group_divisor.
struct BitBudget {
  int weight_bits = 2;
  int scale_bits = 16;
  int zero_bits = 16;  // 16 for a real zero-point, weight_bits for integer
  std::size_t group_divisor = 128;
};

double average_bits(const BitBudget& b);

struct HessianEstimate {
  std::size_t cols = 0;
  std::vector<double> full;  // row-major cols x cols
  std::vector<double> diag;
};

/// Proxy Hessian from calibration activations: (1/m) X^T X accumulated in
/// double precision, with the diagonal extracted.
HessianEstimate hessian_from_activations(std::span<const double> activations, std::size_t m,
                                         std::size_t cols);

/// Per-(row, group) parameters chosen by one initialization method.
struct LayerInit {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t group_size = 0;
  std::size_t n_groups = 0;
  int bits = 0;
  std::vector<QuantParams> params;  // rows * n_groups, row-major
  std::vector<double> losses;       // per (row, group) weighted loss
  std::int64_t evaluations = 0;

  double total_loss() const;
};

LayerInit init_layer(const LayerProblem& p, const GroupSpec& g, int bits, InitMethod method,
                     const SearchConfig& cfg, ZeroSolver solver = ZeroSolver::approx);

/// Codes are stored in permuted column order together with the permutation
/// (identity when compensation is off); dequantize_layer restores the
/// original order exactly.
struct QuantizedLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t group_size = 0;
  std::size_t n_groups = 0;
  int bits = 0;
  bool compensated = false;
  std::vector<std::int32_t> codes;      // rows x cols, permuted order
  std::vector<QuantParams> params;      // rows * n_groups over permuted columns
  std::vector<std::uint32_t> perm;      // permuted position -> original column
};

/// Without compensation each (row, group) slice is initialized by `method`
/// and nearest-rounded. With compensation, columns are permuted by
/// decreasing Hessian diagonal, parameters are initialized on the permuted
/// slices, and columns are quantized sequentially with the GPTQ error
/// feedback through the inverse-Hessian Cholesky factor.
QuantizedLayer quantize_layer(const LayerProblem& p, const GroupSpec& g, int bits,
                              InitMethod method, const SearchConfig& cfg, bool compensate,
                              ZeroSolver solver = ZeroSolver::approx);

std::vector<double> dequantize_layer(const QuantizedLayer& q);

/// sum_cols H_ii * sum_rows (dequant - weights)^2, original column order.
double diag_loss(const LayerProblem& p, const QuantizedLayer& q);

/// tr(dW H dW^T); requires hessian_full.
double full_loss(const LayerProblem& p, const QuantizedLayer& q);

}  // namespace uqinit
