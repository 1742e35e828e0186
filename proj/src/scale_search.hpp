#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "quant.hpp"

namespace uqinit {

/// Scale-grid sizes for the coarse-to-fine search. T must be divisible by
/// T_c so the fine window maps to exact index arithmetic.
struct SearchConfig {
  int T = 2048;
  int Tc = 64;
  int window_coarse_steps = 1;
};

void validate(const SearchConfig& cfg);

struct InitResult {
  QuantParams params;
  double loss = 0.0;
  std::int64_t evaluations = 0;  // zero-point solves (search methods) or candidate evaluations
};

/// Which zero-point solver runs inside the scale loop.
enum class ZeroSolver {
  approx,  // smoothed sweep + windowed exact refinement
  exact,   // full exact sweep
};

/// S_T: s_i = ((max-min)/(2^k-1)) * i/T for i = 1..T. Strictly increasing;
/// the last entry is exactly the Min-Max scale.
std::vector<double> scale_candidates(std::span<const double> values, int bits, int T);

/// Coarse-to-fine search: solve the zero-point on S_Tc, then on the fine
/// candidates within window_coarse_steps coarse steps of the coarse best
/// (the coarse best itself re-included). Ties resolve to the smaller scale.
InitResult neuqi_init(const WeightedRow& row, int bits, const SearchConfig& cfg,
                      ZeroSolver solver = ZeroSolver::approx);

/// Zero-point solve on every candidate in S_T. Used by benchmarks and as
/// the exhaustive reference for the coarse-to-fine search.
InitResult neuqi_init_exhaustive(const WeightedRow& row, int bits, int T,
                                 ZeroSolver solver = ZeroSolver::approx);

/// Exhaustive baseline: s over S_T, zero-point constrained to the k-bit
/// unsigned integers.
InitResult int_search_init(const WeightedRow& row, int bits, const SearchConfig& cfg);

/// Integer-zero-point search from the zero-point perspective: for each
/// integer z the loss is piecewise quadratic in s, swept exactly over all
/// s > 0. Independent of any scale grid.
InitResult int_search_zp_perspective(const WeightedRow& row, int bits);

/// Dense 2-D scan over scales and zero-points. Verification oracle for
/// tests and compare reports; cost is s_grid * z_grid loss evaluations.
InitResult brute_force_oracle(const WeightedRow& row, int bits, int s_grid, int z_grid);

}  // namespace uqinit
