#pragma once

#include <span>

#include "piecewise.hpp"
#include "quant.hpp"

namespace uqinit {

// All entry points below operate on scale-normalized samples x_i = w_i / s
// with weights h_i = H_ii * s^2 folded in by the caller (see neuqi_zero).
// Weightless samples (h == 0) contribute no loss and no transition events.

struct EventSet {
  Quadratic initial;  // total function on the leftmost interval
  std::vector<TransitionEvent> events;
};

/// Breakpoints t = (j + 1/2) - x_i for j = 0..2^k-2 with linear increments;
/// initial is sum_i h_i (x_i + z)^2. Emits n*(2^k - 1) events for n samples
/// of positive weight.
EventSet exact_zero_events(std::span<const double> x, std::span<const double> h, int bits);

/// Globally optimal zero-point of the exact piecewise-quadratic loss.
/// O(n 2^k log(n 2^k)); requires at least one positive weight.
SweepResult optimal_zero_exact(std::span<const double> x, std::span<const double> h, int bits);

/// Optimal zero-point of the smoothed loss, which replaces each sample's
/// low-loss region by its plateau upper bound h_i/4. Two transition points
/// per sample, at -1/2 - x_i and 2^k - 1/2 - x_i; O(n log n).
SweepResult optimal_zero_smoothed(std::span<const double> x, std::span<const double> h, int bits);

/// Exact loss minimized over [center-1, center+1]; at most two transition
/// points per sample fall inside, and both window endpoints are evaluated.
SweepResult optimal_zero_window(std::span<const double> x, std::span<const double> h, int bits,
                                double center);

/// Near-optimal zero-point for a fixed scale: smoothed sweep to locate the
/// neighborhood, then an exact windowed sweep around it. The returned loss
/// is in original weight units and matches quant_loss at the result.
SweepResult neuqi_zero(std::span<const double> values, std::span<const double> weights,
                       double scale, int bits);
SweepResult neuqi_zero(const WeightedRow& row, double scale, int bits);

}  // namespace uqinit
