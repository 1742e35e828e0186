#include "zeropoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uqinit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_samples(std::span<const double> x, std::span<const double> h) {
  if (x.empty() || x.size() != h.size()) {
    throw std::invalid_argument("zero-point solver: bad sample/weight lengths");
  }
}

void require_positive_weight(std::span<const double> h) {
  for (double w : h) {
    if (w > 0.0) return;
  }
  throw std::invalid_argument("zero-point solver: all weights are zero");
}

// Increment when sample (x, h) moves from level j to level j+1:
// h(x+z-(j+1))^2 - h(x+z-j)^2, linear in z.
Quadratic level_step(double x, double h, int j) {
  return {0.0, -2.0 * h, h * (2.0 * j + 1.0 - 2.0 * x)};
}

Quadratic level_piece(double x, double h, double level) {
  const double d = x - level;
  return {h, 2.0 * h * d, h * d * d};
}

}  // namespace

EventSet exact_zero_events(std::span<const double> x, std::span<const double> h, int bits) {
  check_samples(x, h);
  const int max_level = levels(bits) - 1;
  EventSet out;
  out.events.reserve(x.size() * static_cast<std::size_t>(max_level));
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (h[i] == 0.0) continue;
    out.initial += level_piece(x[i], h[i], 0.0);
    for (int j = 0; j < max_level; ++j) {
      out.events.push_back({(j + 0.5) - x[i], level_step(x[i], h[i], j)});
    }
  }
  return out;
}

SweepResult optimal_zero_exact(std::span<const double> x, std::span<const double> h, int bits) {
  check_samples(x, h);
  require_positive_weight(h);
  EventSet es = exact_zero_events(x, h, bits);
  return sweep_min(es.initial, std::move(es.events), -kInf, kInf);
}

SweepResult optimal_zero_smoothed(std::span<const double> x, std::span<const double> h, int bits) {
  check_samples(x, h);
  require_positive_weight(h);
  const double max_level = static_cast<double>(levels(bits) - 1);
  Quadratic initial;
  std::vector<TransitionEvent> events;
  events.reserve(2 * x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double hi = h[i];
    if (hi == 0.0) continue;
    const Quadratic left = level_piece(x[i], hi, 0.0);
    const Quadratic right = level_piece(x[i], hi, max_level);
    const Quadratic plateau{0.0, 0.0, 0.25 * hi};
    initial += left;
    events.push_back({-0.5 - x[i], plateau - left});
    events.push_back({max_level + 0.5 - x[i], right - plateau});
  }
  return sweep_min(initial, std::move(events), -kInf, kInf);
}

SweepResult optimal_zero_window(std::span<const double> x, std::span<const double> h, int bits,
                                double center) {
  check_samples(x, h);
  require_positive_weight(h);
  if (!std::isfinite(center)) {
    throw std::invalid_argument("optimal_zero_window: center must be finite");
  }
  const int max_level = levels(bits) - 1;
  const double z_lo = center - 1.0;
  const double z_hi = center + 1.0;

  Quadratic initial;
  std::vector<TransitionEvent> events;
  events.reserve(2 * x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double hi = h[i];
    if (hi == 0.0) continue;
    // Level active at the left edge. floor(u + 1/2) pairs with the strict
    // j > z_lo + x - 1/2 breakpoint rule so an event landing exactly on the
    // edge is never double-counted.
    const double active =
        std::clamp(std::floor(x[i] + z_lo + 0.5), 0.0, static_cast<double>(max_level));
    initial += level_piece(x[i], hi, active);
    const auto j1 = static_cast<long long>(std::floor(z_lo + x[i] - 0.5)) + 1;
    for (long long j = j1; j <= j1 + 1; ++j) {
      if (j < 0 || j >= max_level) continue;
      events.push_back({(static_cast<double>(j) + 0.5) - x[i], level_step(x[i], hi, static_cast<int>(j))});
    }
  }
  return sweep_min(initial, std::move(events), z_lo, z_hi);
}

SweepResult neuqi_zero(std::span<const double> values, std::span<const double> weights,
                       double scale, int bits) {
  check_samples(values, weights);
  require_positive_weight(weights);
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("neuqi_zero: scale must be positive and finite");
  }
  const std::size_t n = values.size();
  std::vector<double> x(n);
  std::vector<double> h(n);
  const double s2 = scale * scale;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = values[i] / scale;
    h[i] = weights[i] * s2;
  }
  const SweepResult rough = optimal_zero_smoothed(x, h, bits);
  const SweepResult refined = optimal_zero_window(x, h, bits, rough.z_star);
  const double loss = quant_loss(values, weights, {scale, refined.z_star, bits});
  return {refined.z_star, loss};
}

SweepResult neuqi_zero(const WeightedRow& row, double scale, int bits) {
  return neuqi_zero(row.values, row.weights, scale, bits);
}

}  // namespace uqinit
