#include "quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace uqinit {

int levels(int bits) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw std::invalid_argument("bits out of range [1, 8]: " + std::to_string(bits));
  }
  return 1 << bits;
}

void validate(const QuantParams& p) {
  levels(p.bits);
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) {
    throw std::invalid_argument("scale must be positive and finite");
  }
  if (!std::isfinite(p.zero_point)) {
    throw std::invalid_argument("zero_point must be finite");
  }
}

double round_half_even(double v) {
  // nearbyint honors the default FE_TONEAREST mode, which ties to even.
  return std::nearbyint(v);
}

ScalarQuant quantize_scalar(double x, const QuantParams& p) {
  const double max_level = static_cast<double>(levels(p.bits) - 1);
  double c = round_half_even(x / p.scale + p.zero_point);
  c = std::clamp(c, 0.0, max_level);
  const auto code = static_cast<std::int32_t>(c);
  return {code, p.scale * (c - p.zero_point)};
}

QuantizedRow quantize_row(std::span<const double> values, const QuantParams& p) {
  validate(p);
  QuantizedRow out;
  out.params = p;
  out.codes.reserve(values.size());
  for (double v : values) {
    out.codes.push_back(quantize_scalar(v, p).code);
  }
  return out;
}

std::vector<double> dequantize_row(const QuantizedRow& q) {
  std::vector<double> out;
  out.reserve(q.codes.size());
  for (std::int32_t c : q.codes) {
    out.push_back(q.params.scale * (c - q.params.zero_point));
  }
  return out;
}

WeightedRow::WeightedRow(std::vector<double> v, std::vector<double> w)
    : values(std::move(v)), weights(std::move(w)) {
  if (values.empty()) {
    throw std::invalid_argument("WeightedRow requires at least one value");
  }
  if (values.size() != weights.size()) {
    throw std::invalid_argument("WeightedRow values/weights length mismatch");
  }
  for (double x : values) {
    if (!std::isfinite(x)) throw std::invalid_argument("WeightedRow value not finite");
  }
  for (double h : weights) {
    if (!std::isfinite(h) || h < 0.0) {
      throw std::invalid_argument("WeightedRow weights must be finite and >= 0");
    }
  }
}

WeightedRow with_unit_weights(std::vector<double> values) {
  std::vector<double> w(values.size(), 1.0);
  return WeightedRow(std::move(values), std::move(w));
}

double quant_loss(std::span<const double> values, std::span<const double> weights,
                  const QuantParams& p) {
  validate(p);
  if (values.size() != weights.size()) {
    throw std::invalid_argument("quant_loss: values/weights length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = quantize_scalar(values[i], p).value - values[i];
    acc += weights[i] * d * d;
  }
  return acc;
}

double quant_loss(const WeightedRow& row, const QuantParams& p) {
  return quant_loss(row.values, row.weights, p);
}

namespace {

struct Range {
  double lo;
  double hi;
};

Range value_range(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empty value vector");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

}  // namespace

QuantParams minmax_init(std::span<const double> values, int bits) {
  const int n_levels = levels(bits);
  const auto [lo, hi] = value_range(values);
  if (!(hi > lo)) return degenerate_params(lo, bits);
  const double s = (hi - lo) / static_cast<double>(n_levels - 1);
  const double z = -round_half_even(lo / s);
  return {s, z, bits};
}

QuantParams minmax_plus_init(std::span<const double> values, int bits) {
  const int n_levels = levels(bits);
  const auto [lo, hi] = value_range(values);
  if (!(hi > lo)) return degenerate_params(lo, bits);
  const double s = (hi - lo) / static_cast<double>(n_levels);
  const double z = -round_half_even(lo / s + 0.5);
  return {s, z, bits};
}

UniformOptimal uniform_optimal_params(double a, double b, int bits) {
  const int n_levels = levels(bits);
  if (!std::isfinite(a) || !std::isfinite(b) || !(b > a)) {
    throw std::invalid_argument("uniform_optimal_params requires finite b > a");
  }
  const double s = (b - a) / static_cast<double>(n_levels);
  const double z = -(a / s + 0.5);
  return {{s, z, bits}, s * s / 12.0};
}

QuantParams degenerate_params(double v, int bits) {
  levels(bits);
  if (!std::isfinite(v)) throw std::invalid_argument("degenerate_params: value not finite");
  return {1.0, -v, bits};
}

}  // namespace uqinit
