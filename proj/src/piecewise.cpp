#include "piecewise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uqinit {

IntervalMin interval_quad_min(const Quadratic& q, double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw std::invalid_argument("interval_quad_min: bad interval");
  }
  if (q.a2 > 0.0) {
    const double vertex = -q.a1 / (2.0 * q.a2);
    const double z = std::clamp(vertex, lo, hi);
    return {z, q.eval(z)};
  }
  if (q.a2 == 0.0) {
    if (q.a1 == 0.0) {
      const double z = std::isinf(lo) ? std::clamp(0.0, lo, hi) : lo;
      return {z, q.a0};
    }
    const double z = q.a1 > 0.0 ? lo : hi;
    if (std::isinf(z)) {
      throw std::invalid_argument("interval_quad_min: linear function unbounded below");
    }
    return {z, q.eval(z)};
  }
  // Concave: minimum sits on a boundary.
  if (std::isinf(lo) || std::isinf(hi)) {
    throw std::invalid_argument("interval_quad_min: concave function on infinite interval");
  }
  const double flo = q.eval(lo);
  const double fhi = q.eval(hi);
  return fhi < flo ? IntervalMin{hi, fhi} : IntervalMin{lo, flo};
}

SweepResult sweep_min(const Quadratic& initial, std::vector<TransitionEvent> events,
                      double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw std::invalid_argument("sweep_min: empty domain");
  }
  for (auto& e : events) {
    if (std::isnan(e.t)) throw std::invalid_argument("sweep_min: NaN breakpoint");
    e.t = std::clamp(e.t, lo, hi);
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const TransitionEvent& a, const TransitionEvent& b) { return a.t < b.t; });

  Quadratic running = initial;
  const double first_hi = events.empty() ? hi : events.front().t;
  IntervalMin best = interval_quad_min(running, lo, first_hi);

  for (std::size_t i = 0; i < events.size(); ++i) {
    running += events[i].delta;
    const double seg_lo = events[i].t;
    const double seg_hi = i + 1 < events.size() ? events[i + 1].t : hi;
    const IntervalMin seg = interval_quad_min(running, seg_lo, seg_hi);
    if (seg.value < best.value) best = seg;
  }
  return {best.z, best.value};
}

}  // namespace uqinit
