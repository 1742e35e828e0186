#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace uqinit {

inline constexpr int kMinBits = 1;
inline constexpr int kMaxBits = 8;

/// One uniform quantization grid: level i dequantizes to
/// scale * (i - zero_point) for i in [0, 2^bits - 1].
/// zero_point is real-valued (grid-index units), not constrained to integers.
struct QuantParams {
  double scale = 1.0;
  double zero_point = 0.0;
  int bits = 0;
};

int levels(int bits);
void validate(const QuantParams& p);

/// Round-half-to-even, used for every rounding step in this library.
double round_half_even(double v);

struct ScalarQuant {
  std::int32_t code;
  double value;  // dequantized: scale * (code - zero_point)
};

ScalarQuant quantize_scalar(double x, const QuantParams& p);

struct QuantizedRow {
  std::vector<std::int32_t> codes;
  QuantParams params;
};

QuantizedRow quantize_row(std::span<const double> values, const QuantParams& p);
std::vector<double> dequantize_row(const QuantizedRow& q);

/// A parameter vector with per-coordinate nonnegative importance weights
/// (diagonal Hessian entries). Lengths must match; entries must be finite.
struct WeightedRow {
  std::vector<double> values;
  std::vector<double> weights;

  WeightedRow() = default;
  WeightedRow(std::vector<double> v, std::vector<double> w);

  std::size_t size() const { return values.size(); }
};

WeightedRow with_unit_weights(std::vector<double> values);

/// Weighted squared reconstruction error: sum_i weights[i] * (xq_i - values[i])^2.
/// Accumulated in double precision regardless of input storage.
double quant_loss(std::span<const double> values, std::span<const double> weights,
                  const QuantParams& p);
double quant_loss(const WeightedRow& row, const QuantParams& p);

/// Min-Max formula: s = (max-min)/(2^k-1), z = -round(min/s).
/// A constant row is routed to degenerate_params.
QuantParams minmax_init(std::span<const double> values, int bits);

/// Min-Max+ variant: s = (max-min)/2^k, z = -round(min/s + 1/2).
QuantParams minmax_plus_init(std::span<const double> values, int bits);

struct UniformOptimal {
  QuantParams params;
  double expected_mse;  // per unit-weight sample
};

/// Closed-form optimum for inputs drawn uniformly from [a, b]:
/// s = (b-a)/2^k, z = -(a/s + 1/2) with no rounding; expected MSE s^2/12.
UniformOptimal uniform_optimal_params(double a, double b, int bits);

/// Parameters for an all-constant row: scale 1, zero_point -v, so grid
/// level 0 reproduces v exactly and the loss is zero.
QuantParams degenerate_params(double v, int bits);

}  // namespace uqinit
