#include "scale_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "piecewise.hpp"
#include "zeropoint.hpp"

namespace uqinit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_degenerate(std::span<const double> values) {
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return !(*hi > *lo);
}

double minmax_scale(std::span<const double> values, int bits) {
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return (*hi - *lo) / static_cast<double>(levels(bits) - 1);
}

struct Candidate {
  double scale;
  double zero_point;
  double loss;
};

// (loss, scale, zero_point) lexicographic: equal losses resolve to the
// smaller scale, then the smaller zero-point.
bool better(const Candidate& a, const Candidate& b) {
  if (a.loss != b.loss) return a.loss < b.loss;
  if (a.scale != b.scale) return a.scale < b.scale;
  return a.zero_point < b.zero_point;
}

Candidate solve_at_scale(const WeightedRow& row, double s, int bits, ZeroSolver solver) {
  if (solver == ZeroSolver::approx) {
    const SweepResult r = neuqi_zero(row, s, bits);
    return {s, r.z_star, r.loss_star};
  }
  const std::size_t n = row.size();
  std::vector<double> x(n);
  std::vector<double> h(n);
  const double s2 = s * s;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = row.values[i] / s;
    h[i] = row.weights[i] * s2;
  }
  const SweepResult r = optimal_zero_exact(x, h, bits);
  return {s, r.z_star, quant_loss(row, {s, r.z_star, bits})};
}

InitResult degenerate_result(const WeightedRow& row, int bits) {
  return {degenerate_params(row.values.front(), bits), 0.0, 0};
}

}  // namespace

void validate(const SearchConfig& cfg) {
  if (cfg.T < 1 || cfg.Tc < 1 || cfg.window_coarse_steps < 1) {
    throw std::invalid_argument("SearchConfig fields must be positive");
  }
  if (cfg.Tc > cfg.T || cfg.T % cfg.Tc != 0) {
    throw std::invalid_argument("SearchConfig requires Tc <= T and T divisible by Tc");
  }
}

std::vector<double> scale_candidates(std::span<const double> values, int bits, int T) {
  if (T < 1) throw std::invalid_argument("scale_candidates: T must be >= 1");
  if (values.empty()) throw std::invalid_argument("scale_candidates: empty row");
  if (is_degenerate(values)) {
    throw std::invalid_argument("scale_candidates: degenerate row (max == min)");
  }
  const double upper = minmax_scale(values, bits);
  std::vector<double> out(static_cast<std::size_t>(T));
  for (int i = 1; i <= T; ++i) {
    out[static_cast<std::size_t>(i - 1)] = upper * (static_cast<double>(i) / T);
  }
  return out;
}

InitResult neuqi_init(const WeightedRow& row, int bits, const SearchConfig& cfg,
                      ZeroSolver solver) {
  validate(cfg);
  levels(bits);
  if (is_degenerate(row.values)) return degenerate_result(row, bits);

  const std::vector<double> cands = scale_candidates(row.values, bits, cfg.T);
  const int ratio = cfg.T / cfg.Tc;

  Candidate best{0.0, 0.0, kInf};
  int best_coarse_index = 0;  // 1-based coarse index
  for (int ic = 1; ic <= cfg.Tc; ++ic) {
    const double s = cands[static_cast<std::size_t>(ic * ratio - 1)];
    const Candidate c = solve_at_scale(row, s, bits, solver);
    if (better(c, best)) {
      best = c;
      best_coarse_index = ic;
    }
  }

  // Fine window: window_coarse_steps coarse steps on each side of the coarse
  // best (2*ratio*W + 1 fine candidates), shifted to stay inside [1, T].
  const int width = 2 * ratio * cfg.window_coarse_steps;
  int lo = best_coarse_index * ratio - width / 2;
  lo = std::max(1, std::min(lo, cfg.T - width));
  const int hi = std::min(cfg.T, lo + width);

  for (int i = lo; i <= hi; ++i) {
    const double s = cands[static_cast<std::size_t>(i - 1)];
    const Candidate c = solve_at_scale(row, s, bits, solver);
    if (better(c, best)) best = c;
  }

  const std::int64_t evaluations = cfg.Tc + (hi - lo + 1);
  return {{best.scale, best.zero_point, bits}, best.loss, evaluations};
}

InitResult neuqi_init_exhaustive(const WeightedRow& row, int bits, int T, ZeroSolver solver) {
  levels(bits);
  if (T < 1) throw std::invalid_argument("neuqi_init_exhaustive: T must be >= 1");
  if (is_degenerate(row.values)) return degenerate_result(row, bits);

  Candidate best{0.0, 0.0, kInf};
  for (const double s : scale_candidates(row.values, bits, T)) {
    const Candidate c = solve_at_scale(row, s, bits, solver);
    if (better(c, best)) best = c;
  }
  return {{best.scale, best.zero_point, bits}, best.loss, T};
}

InitResult int_search_init(const WeightedRow& row, int bits, const SearchConfig& cfg) {
  validate(cfg);
  const int n_levels = levels(bits);
  if (is_degenerate(row.values)) return degenerate_result(row, bits);

  Candidate best{0.0, 0.0, kInf};
  for (const double s : scale_candidates(row.values, bits, cfg.T)) {
    for (int z = 0; z < n_levels; ++z) {
      const double loss = quant_loss(row, {s, static_cast<double>(z), bits});
      const Candidate c{s, static_cast<double>(z), loss};
      if (better(c, best)) best = c;
    }
  }
  return {{best.scale, best.zero_point, bits}, best.loss,
          static_cast<std::int64_t>(cfg.T) * n_levels};
}

namespace {

// Quadratic in s for a sample held at a fixed level: h*((level - z)*s - w)^2.
Quadratic scale_piece(double w, double h, double level, double z) {
  const double g = level - z;
  return {h * g * g, -2.0 * h * g * w, h * w * w};
}

// Piecewise-quadratic-in-s loss for one integer zero-point. Breakpoints sit
// where round(w_i/s + z) changes: s = w_i / (j + 1/2 - z) for feasible j.
InitResult zp_sweep_for_zero(const WeightedRow& row, int bits, int z) {
  const int max_level = levels(bits) - 1;
  Quadratic initial;
  std::vector<TransitionEvent> events;

  for (std::size_t i = 0; i < row.size(); ++i) {
    const double w = row.values[i];
    const double h = row.weights[i];
    if (h == 0.0 || w == 0.0) continue;
    if (w > 0.0) {
      // s -> 0+ clips to the top level; each breakpoint drops one level.
      initial += scale_piece(w, h, max_level, z);
      for (int j = z + 1; j <= max_level; ++j) {
        const double t = w / (j - z - 0.5);
        events.push_back({t, scale_piece(w, h, j - 1.0, z) - scale_piece(w, h, j, z)});
      }
    } else {
      initial += scale_piece(w, h, 0.0, z);
      for (int j = 0; j <= z - 1; ++j) {
        const double t = w / (j + 0.5 - z);
        events.push_back({t, scale_piece(w, h, j + 1.0, z) - scale_piece(w, h, j, z)});
      }
    }
  }

  if (events.empty()) {
    // Every weighted sample is exactly zero; any scale reproduces them.
    const double s = minmax_scale(row.values, bits);
    return {{s, static_cast<double>(z), bits}, 0.0, 1};
  }
  double t_last = -kInf;
  for (const auto& e : events) t_last = std::max(t_last, e.t);

  // Beyond the last breakpoint every sample sits on level z and the loss is
  // constant, so [0, t_last] covers the whole range of values.
  const SweepResult r = sweep_min(initial, std::move(events), 0.0, t_last);
  // s = 0 is not a valid scale; the same value recurs on the final interval.
  const double s = r.z_star > 0.0 ? r.z_star : t_last;
  return {{s, static_cast<double>(z), bits}, r.loss_star, 1};
}

}  // namespace

InitResult int_search_zp_perspective(const WeightedRow& row, int bits) {
  const int n_levels = levels(bits);
  if (is_degenerate(row.values)) return degenerate_result(row, bits);

  Candidate best{0.0, 0.0, kInf};
  for (int z = 0; z < n_levels; ++z) {
    const InitResult r = zp_sweep_for_zero(row, bits, z);
    const Candidate c{r.params.scale, r.params.zero_point, r.loss};
    if (better(c, best)) best = c;
  }
  return {{best.scale, best.zero_point, bits}, best.loss, n_levels};
}

InitResult brute_force_oracle(const WeightedRow& row, int bits, int s_grid, int z_grid) {
  const int max_level = levels(bits) - 1;
  if (s_grid < 1 || z_grid < 2) {
    throw std::invalid_argument("brute_force_oracle: grids too small");
  }
  if (is_degenerate(row.values)) return degenerate_result(row, bits);

  const auto [wlo, whi] = std::minmax_element(row.values.begin(), row.values.end());
  Candidate best{0.0, 0.0, kInf};
  std::int64_t evaluations = 0;
  for (const double s : scale_candidates(row.values, bits, s_grid)) {
    // Cover every breakpoint of the normalized samples with margin. The
    // range snaps to integers and is subdivided evenly so integer
    // zero-points (and their dyadic refinements) are sampled exactly.
    const double z_lo = std::floor(-(*whi / s) - 1.0);
    const double z_hi = std::ceil(-(*wlo / s) + max_level + 1.0);
    const auto range = static_cast<std::int64_t>(z_hi - z_lo);
    const std::int64_t substeps =
        std::max<std::int64_t>(1, (z_grid + range - 1) / range);
    for (std::int64_t k = 0; k <= range * substeps; ++k) {
      const double z = z_lo + static_cast<double>(k) / static_cast<double>(substeps);
      const double loss = quant_loss(row, {s, z, bits});
      const Candidate c{s, z, loss};
      if (better(c, best)) best = c;
      ++evaluations;
    }
  }
  return {{best.scale, best.zero_point, bits}, best.loss, evaluations};
}

}  // namespace uqinit
