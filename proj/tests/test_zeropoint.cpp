#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "piecewise.hpp"
#include "rng.hpp"
#include "zeropoint.hpp"

using namespace uqinit;
namespace oracle = uqinit::testing;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("interval_quad_min cases") {
  auto r = interval_quad_min({1, 0, 0}, -1, 1);
  CHECK(r.z == 0.0);
  CHECK(r.value == 0.0);

  r = interval_quad_min({1, -4, 0}, -1, 1);  // vertex at 2, clamped
  CHECK(r.z == 1.0);
  CHECK(r.value == -3.0);

  r = interval_quad_min({0, 0, 5}, 2, 3);  // constant, tie -> smaller z
  CHECK(r.z == 2.0);
  CHECK(r.value == 5.0);

  r = interval_quad_min({1, 2, 1}, -kInf, kInf);  // convex on the whole line
  CHECK(r.z == -1.0);
  CHECK(r.value == doctest::Approx(0.0));

  r = interval_quad_min({0, 1, 0}, 0, 5);  // increasing linear
  CHECK(r.z == 0.0);
  r = interval_quad_min({0, -1, 0}, 0, 5);  // decreasing linear
  CHECK(r.z == 5.0);

  CHECK_THROWS_AS(interval_quad_min({0, 1, 0}, -kInf, 0), std::invalid_argument);
  CHECK_THROWS_AS(interval_quad_min({-1, 0, 0}, 0, kInf), std::invalid_argument);
  CHECK_THROWS_AS(interval_quad_min({1, 0, 0}, 1, 0), std::invalid_argument);
}

TEST_CASE("sweep_min hand examples") {
  auto r = sweep_min({1, 0, 0}, {}, -kInf, kInf);
  CHECK(r.z_star == 0.0);
  CHECK(r.loss_star == 0.0);

  // (z+1)^2 left of 0, z^2+1 right of 0: global minimum at z = -1.
  std::vector<TransitionEvent> events{{0.0, {0, -2, 0}}};
  r = sweep_min({1, 2, 1}, events, -kInf, kInf);
  CHECK(r.z_star == doctest::Approx(-1.0));
  CHECK(r.loss_star == doctest::Approx(0.0));

  CHECK_THROWS_AS(sweep_min({1, 0, 0}, {}, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("sweep_min matches a dense scan on random piecewise functions") {
  SplitMix64 rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    // Linear increments vanishing at their own breakpoint keep the assembled
    // function continuous, exactly like real transition events; the shared
    // curvature 1 keeps every interval convex.
    const double u0 = rng.uniform(-4.0, 4.0);
    Quadratic initial{1.0, 2.0 * u0, u0 * u0};
    std::vector<TransitionEvent> events;
    for (int j = 0; j < 8; ++j) {
      const double t = rng.uniform(-5.0, 5.0);
      const double slope = rng.uniform(-4.0, 4.0);
      events.push_back({t, {0.0, slope, -slope * t}});
    }
    const SweepResult r = sweep_min(initial, events, -kInf, kInf);

    auto eval = [&](double z) {
      Quadratic q = initial;
      for (const auto& e : events) {
        if (e.t <= z) q += e.delta;
      }
      return q.eval(z);
    };
    double scan = kInf;
    for (double z = -25.0; z <= 25.0; z += 1e-3) scan = std::min(scan, eval(z));
    CHECK(r.loss_star <= scan + 1e-9);
    // when the minimum sits on a kink the scan misses it by slope * spacing
    CHECK(scan - r.loss_star <= 40.0 * 1e-3);
    CHECK(eval(r.z_star) == doctest::Approx(r.loss_star).epsilon(1e-9));
  }
}

TEST_CASE("exact_zero_events structure") {
  const std::vector<double> x{0.5};
  const std::vector<double> h{1.0};
  const EventSet es = exact_zero_events(x, h, 2);
  REQUIRE(es.events.size() == 3);
  std::vector<double> ts;
  for (const auto& e : es.events) ts.push_back(e.t);
  std::sort(ts.begin(), ts.end());
  CHECK(ts == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(es.initial.a2 == doctest::Approx(1.0));

  const EventSet none = exact_zero_events(std::vector<double>{1.0, 2.0},
                                          std::vector<double>{0.0, 0.0}, 2);
  CHECK(none.events.empty());
  CHECK(none.initial.a2 == 0.0);

  const std::vector<double> x2{0.2, 1.7};
  const std::vector<double> h2{1.0, 2.0};
  CHECK(exact_zero_events(x2, h2, 2).events.size() == 6);
  const SweepResult r2 = optimal_zero_exact(x2, h2, 2);
  const auto scan2 = oracle::dense_zero_scan(x2, h2, 2, 1e-5);
  CHECK(r2.loss_star <= scan2.loss + 1e-12);
  CHECK(scan2.loss - r2.loss_star <= 1e-8);
}

TEST_CASE("event-count law") {
  SplitMix64 rng(5);
  for (int bits : {2, 3, 4}) {
    const std::size_t n = 17;
    const auto x = uniform_vector(rng, n, -2.0, 6.0);
    const std::vector<double> h(n, 1.0);
    CHECK(exact_zero_events(x, h, bits).events.size() == n * ((1u << bits) - 1));
  }
}

TEST_CASE("incremental sum telescopes to the fully-clipped quadratic") {
  SplitMix64 rng(23);
  const std::size_t n = 64;
  const auto x = uniform_vector(rng, n, -3.0, 7.0);
  const auto h = uniform_vector(rng, n, 0.0, 2.0);
  for (int bits : {2, 4}) {
    const double max_level = (1 << bits) - 1;
    EventSet es = exact_zero_events(x, h, bits);
    Quadratic total = es.initial;
    for (const auto& e : es.events) total += e.delta;
    Quadratic expect;
    for (std::size_t i = 0; i < n; ++i) {
      if (h[i] == 0.0) continue;
      const double d = x[i] - max_level;
      expect += Quadratic{h[i], 2.0 * h[i] * d, h[i] * d * d};
    }
    CHECK(total.a2 == doctest::Approx(expect.a2).epsilon(1e-6));
    CHECK(total.a1 == doctest::Approx(expect.a1).epsilon(1e-6));
    CHECK(total.a0 == doctest::Approx(expect.a0).epsilon(1e-6));
  }
}

TEST_CASE("optimal_zero_exact on trivially representable rows") {
  const std::vector<double> h{1, 1, 1, 1};
  auto r = optimal_zero_exact(std::vector<double>{0, 1, 2, 3}, h, 2);
  CHECK(r.z_star == doctest::Approx(0.0));
  CHECK(r.loss_star == doctest::Approx(0.0));

  r = optimal_zero_exact(std::vector<double>{10, 11, 12, 13}, h, 2);
  CHECK(r.z_star == doctest::Approx(-10.0));
  CHECK(r.loss_star == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(optimal_zero_exact(std::vector<double>{1.0}, std::vector<double>{0.0}, 2),
                  std::invalid_argument);
}

TEST_CASE("optimal_zero_exact equals a fine dense scan") {
  SplitMix64 rng(31);
  const auto x = uniform_vector(rng, 16, 0.0, 4.0);
  const std::vector<double> h(16, 1.0);
  const SweepResult r = optimal_zero_exact(x, h, 2);
  const auto scan = oracle::dense_zero_scan(x, h, 2, 1e-5);
  CHECK(r.loss_star <= scan.loss + 1e-12);
  CHECK(scan.loss - r.loss_star <= 1e-8);
  CHECK(oracle::direct_zero_loss(x, h, 2, r.z_star) == doctest::Approx(r.loss_star).epsilon(1e-9));
}

TEST_CASE("exact sweep dominates every dense sample across distributions") {
  SplitMix64 rng(37);
  for (int trial = 0; trial < 25; ++trial) {
    const int bits = 2 + trial % 3;
    const std::size_t n = 8 + rng.next() % 40;
    std::vector<double> x, h;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(trial % 2 == 0 ? rng.uniform(-2.0, (1 << bits) + 2.0) : 2.0 * rng.gaussian());
      h.push_back(trial % 3 == 0 ? rng.uniform(0.0, 1.0) : rng.gaussian() * rng.gaussian());
    }
    for (auto& w : h) w = std::abs(w);
    if (std::all_of(h.begin(), h.end(), [](double v) { return v == 0.0; })) h[0] = 1.0;
    const SweepResult r = optimal_zero_exact(x, h, bits);
    const auto scan = oracle::dense_zero_scan(x, h, bits, 1e-4);
    CHECK(r.loss_star <= scan.loss + 1e-9);
  }
}

TEST_CASE("optimal_zero_smoothed single-sample plateau") {
  const SweepResult r =
      optimal_zero_smoothed(std::vector<double>{0.0}, std::vector<double>{1.0}, 2);
  CHECK(r.z_star == doctest::Approx(-0.5));
  CHECK(r.loss_star == doctest::Approx(0.25));
}

TEST_CASE("optimal_zero_smoothed on-grid row rests on the common plateau") {
  const SweepResult r =
      optimal_zero_smoothed(std::vector<double>{0, 1, 2, 3}, std::vector<double>{1, 1, 1, 1}, 2);
  CHECK(r.loss_star == doctest::Approx(1.0));
  CHECK(r.z_star == doctest::Approx(-0.5));
}

TEST_CASE("smoothed loss dominates the exact loss pointwise") {
  SplitMix64 rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const int bits = 2 + trial % 3;
    const std::size_t n = 1 + rng.next() % 12;
    const auto x = uniform_vector(rng, n, -3.0, (1 << bits) + 3.0);
    const auto h = uniform_vector(rng, n, 0.0, 2.0);
    const double z = rng.uniform(-8.0, 8.0);
    const double smooth = oracle::direct_smoothed_loss(x, h, bits, z);
    const double exact = oracle::direct_zero_loss(x, h, bits, z);
    CHECK(smooth >= exact - 1e-12);
  }
}

TEST_CASE("smoothed sweep value matches its own direct evaluation") {
  SplitMix64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.next() % 30;
    const auto x = uniform_vector(rng, n, -1.0, 6.0);
    const auto h = uniform_vector(rng, n, 0.1, 2.0);
    const SweepResult r = optimal_zero_smoothed(x, h, 2);
    CHECK(oracle::direct_smoothed_loss(x, h, 2, r.z_star) ==
          doctest::Approx(r.loss_star).epsilon(1e-9));
    // and it is a minimum of the smoothed surrogate on a coarse probe grid
    for (double z = -6.0; z <= 10.0; z += 0.37) {
      CHECK(r.loss_star <= oracle::direct_smoothed_loss(x, h, 2, z) + 1e-9);
    }
  }
}

TEST_CASE("optimal_zero_window basic behavior") {
  const std::vector<double> grid{0, 1, 2, 3};
  const std::vector<double> h{1, 1, 1, 1};
  auto r = optimal_zero_window(grid, h, 2, 0.0);
  CHECK(r.z_star == doctest::Approx(0.0));
  CHECK(r.loss_star == doctest::Approx(0.0));
}

TEST_CASE("optimal_zero_window far from the data clips every sample") {
  SplitMix64 rng(47);
  const auto x = uniform_vector(rng, 12, -1.0, 5.0);
  const auto h = uniform_vector(rng, 12, 0.1, 1.0);
  const double center = 1000.0;
  const SweepResult r = optimal_zero_window(x, h, 2, center);
  // With every sample clipped to level 3 the loss is a single quadratic.
  Quadratic clipped;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - 3.0;
    clipped += Quadratic{h[i], 2.0 * h[i] * d, h[i] * d * d};
  }
  const IntervalMin m = interval_quad_min(clipped, center - 1.0, center + 1.0);
  CHECK(r.z_star == doctest::Approx(m.z));
  CHECK(r.loss_star == doctest::Approx(m.value).epsilon(1e-12));
  CHECK(r.z_star == doctest::Approx(center - 1.0));  // left endpoint wins
}

TEST_CASE("window around the smoothed optimum never loses to its center") {
  SplitMix64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const int bits = 2 + trial % 3;
    const std::size_t n = 4 + rng.next() % 60;
    const auto x = uniform_vector(rng, n, -2.0, (1 << bits) + 1.0);
    const auto h = uniform_vector(rng, n, 0.0, 3.0);
    if (std::all_of(h.begin(), h.end(), [](double v) { return v == 0.0; })) continue;
    const SweepResult rough = optimal_zero_smoothed(x, h, bits);
    const SweepResult win = optimal_zero_window(x, h, bits, rough.z_star);
    CHECK(win.loss_star <= oracle::direct_zero_loss(x, h, bits, rough.z_star) + 1e-12);
    // window endpoints are inspected too
    CHECK(win.z_star >= rough.z_star - 1.0);
    CHECK(win.z_star <= rough.z_star + 1.0);
  }
}

TEST_CASE("neuqi_zero on representable rows and scale normalization") {
  auto r = neuqi_zero(with_unit_weights({0, 1, 2, 3}), 1.0, 2);
  CHECK(r.z_star == doctest::Approx(0.0));
  CHECK(r.loss_star == doctest::Approx(0.0));

  r = neuqi_zero(with_unit_weights({0, 2, 4, 6}), 2.0, 2);
  CHECK(r.z_star == doctest::Approx(0.0));
  CHECK(r.loss_star == doctest::Approx(0.0));

  CHECK_THROWS_AS(neuqi_zero(with_unit_weights({0, 1}), 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(neuqi_zero(with_unit_weights({0, 1}), -1.0, 2), std::invalid_argument);
}

TEST_CASE("neuqi_zero loss agrees with quant_loss at the returned point") {
  SplitMix64 rng(59);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 8 + rng.next() % 50;
    const WeightedRow row(gaussian_vector(rng, n), uniform_vector(rng, n, 0.0, 2.0));
    const double s = rng.uniform(0.02, 1.0);
    const int bits = 2 + trial % 3;
    const SweepResult r = neuqi_zero(row, s, bits);
    const double direct = quant_loss(row, {s, r.z_star, bits});
    CHECK(r.loss_star == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("neuqi_zero tracks the exact sweep closely") {
  SplitMix64 rng(61);
  int within_tight = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const int bits = 2 + trial % 3;
    const std::size_t n = 64;
    const WeightedRow row(gaussian_vector(rng, n), uniform_vector(rng, n, 0.1, 1.5));
    const double s = rng.uniform(0.05, 0.8);

    std::vector<double> x(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = row.values[i] / s;
      h[i] = row.weights[i] * s * s;
    }
    const double exact = optimal_zero_exact(x, h, bits).loss_star;
    const double approx = neuqi_zero(row, s, bits).loss_star;
    REQUIRE(exact > 0.0);
    if (approx <= 1.001 * exact) ++within_tight;
  }
  CHECK(within_tight >= trials * 99 / 100);
}

TEST_CASE("shift covariance of the exact sweep") {
  SplitMix64 rng(67);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 8 + rng.next() % 20;
    std::vector<double> x(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
      // samples on a coarse binary grid so x + d stays exact
      x[i] = std::floor(rng.uniform(-64.0, 832.0)) / 256.0;
      h[i] = rng.uniform(0.1, 2.0);
    }
    // span wider than 2^k - 1 levels so the optimum is unique (no tied
    // integer-shifted copies of the landscape)
    x[0] = -0.25;
    x[1] = 3.25;
    const double d = 0.75;
    std::vector<double> shifted = x;
    for (auto& v : shifted) v += d;
    const SweepResult base = optimal_zero_exact(x, h, 2);
    const SweepResult moved = optimal_zero_exact(shifted, h, 2);
    CHECK(moved.z_star == doctest::Approx(base.z_star - d).epsilon(1e-9));
    CHECK(moved.loss_star == doctest::Approx(base.loss_star).epsilon(1e-9));
  }
}

TEST_CASE("duplicating a sample equals doubling its weight") {
  SplitMix64 rng(71);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 5 + rng.next() % 15;
    auto x = uniform_vector(rng, n, -1.0, 5.0);
    auto h = uniform_vector(rng, n, 0.1, 1.0);

    std::vector<double> x_dup = x;
    std::vector<double> h_dup = h;
    x_dup.push_back(x[0]);
    h_dup.push_back(h[0]);

    std::vector<double> h_heavy = h;
    h_heavy[0] *= 2.0;

    const SweepResult a = optimal_zero_exact(x_dup, h_dup, 3);
    const SweepResult b = optimal_zero_exact(x, h_heavy, 3);
    CHECK(a.loss_star == doctest::Approx(b.loss_star).epsilon(1e-9));
    CHECK(oracle::direct_zero_loss(x, h_heavy, 3, a.z_star) ==
          doctest::Approx(b.loss_star).epsilon(1e-9));
  }
}
