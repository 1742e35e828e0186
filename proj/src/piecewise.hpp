#pragma once

#include <vector>

namespace uqinit {

/// f(z) = a2*z^2 + a1*z + a0. Addition is componentwise.
struct Quadratic {
  double a2 = 0.0;
  double a1 = 0.0;
  double a0 = 0.0;

  double eval(double z) const { return (a2 * z + a1) * z + a0; }

  Quadratic& operator+=(const Quadratic& o) {
    a2 += o.a2;
    a1 += o.a1;
    a0 += o.a0;
    return *this;
  }
  friend Quadratic operator+(Quadratic a, const Quadratic& b) { return a += b; }
  friend Quadratic operator-(const Quadratic& a, const Quadratic& b) {
    return {a.a2 - b.a2, a.a1 - b.a1, a.a0 - b.a0};
  }
};

/// Crossing breakpoint t left-to-right adds `delta` to the running total.
struct TransitionEvent {
  double t;
  Quadratic delta;
};

struct IntervalMin {
  double z;
  double value;
};

/// Minimum of q over [lo, hi]. lo may be -inf and hi +inf only when the
/// minimum stays bounded (convex, or constant). Ties resolve to smaller z.
/// Throws std::invalid_argument for unbounded-below configurations.
IntervalMin interval_quad_min(const Quadratic& q, double lo, double hi);

struct SweepResult {
  double z_star;
  double loss_star;
};

/// Global minimum over [lo, hi] of the piecewise quadratic described by the
/// function on the leftmost interval plus sorted transition increments.
/// Events are stable-sorted by breakpoint internally; breakpoints outside
/// [lo, hi] are clipped to it. The running quadratic is maintained by
/// incremental addition. Ties across intervals resolve to the smallest z.
SweepResult sweep_min(const Quadratic& initial, std::vector<TransitionEvent> events,
                      double lo, double hi);

}  // namespace uqinit
