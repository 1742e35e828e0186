// Acceptance suite: one pass/fail line per criterion. The CLI binary path
// arrives as argv[1] (used by the benchmark criterion).

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "layer.hpp"
#include "oracles.hpp"
#include "quant.hpp"
#include "rng.hpp"
#include "scale_search.hpp"
#include "zeropoint.hpp"

using namespace uqinit;
namespace oracle = uqinit::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g_cli_path;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> mixed_weights(SplitMix64& rng, std::size_t n, int flavor) {
  std::vector<double> h(n, 1.0);
  switch (flavor % 4) {
    case 0: break;  // unit
    case 1:
      for (auto& v : h) v = rng.uniform(0.05, 2.0);
      break;
    case 2:
      for (auto& v : h) {
        const double g = rng.gaussian();
        v = g * g;
      }
      break;
    default:
      for (auto& v : h) v = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.1, 1.0);
      if (std::all_of(h.begin(), h.end(), [](double v) { return v == 0.0; })) h[0] = 1.0;
      break;
  }
  return h;
}

// C1: exact sweep never loses to a dense zero-point grid.
bool criterion1(std::string& detail) {
  SplitMix64 rng(1001);
  const auto t0 = std::chrono::steady_clock::now();
  int failures = 0;
  double worst_gap = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int bits = 2 + trial % 3;
    const std::size_t n = 4 + rng.next() % 45;  // n <= 64
    std::vector<double> x(n);
    for (auto& v : x) {
      v = trial % 2 == 0 ? rng.uniform(-1.5, (1 << bits) + 1.5) : 1.5 * rng.gaussian() + 1.0;
    }
    const std::vector<double> h = mixed_weights(rng, n, trial);
    const SweepResult r = optimal_zero_exact(x, h, bits);
    const auto scan = oracle::dense_zero_scan(x, h, bits, 1e-4);
    const double gap = r.loss_star - scan.loss;
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1e-9) ++failures;
  }
  const double elapsed = seconds_since(t0);
  detail = "500 rows, worst sweep-minus-scan gap " + std::to_string(worst_gap) + ", " +
           std::to_string(elapsed) + " s";
  return failures == 0 && elapsed < 30.0;
}

// C2: near-optimality of the smoothed+window approximation at fixed scale.
bool criterion2(std::string& detail) {
  SplitMix64 rng(1002);
  const std::size_t n = 256;
  int within_1001 = 0;
  double worst_ratio = 0.0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const int bits = 2 + trial % 3;
    const WeightedRow row(gaussian_vector(rng, n), mixed_weights(rng, n, trial));
    const double smax =
        (*std::max_element(row.values.begin(), row.values.end()) -
         *std::min_element(row.values.begin(), row.values.end())) /
        ((1 << bits) - 1);
    const double s = smax * rng.uniform(0.05, 1.0);

    std::vector<double> x(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = row.values[i] / s;
      h[i] = row.weights[i] * s * s;
    }
    const double exact = optimal_zero_exact(x, h, bits).loss_star;
    const double approx = neuqi_zero(row, s, bits).loss_star;
    const double ratio = exact > 0.0 ? approx / exact : 1.0;
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio <= 1.01) ++within_1001;
  }
  detail = std::to_string(within_1001) + "/1000 within 1.01, worst ratio " +
           std::to_string(worst_ratio);
  return within_1001 >= trials * 99 / 100 && worst_ratio <= 1.05;
}

// C3: coarse-to-fine plus transition-point reduction is fast and faithful.
bool criterion3(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path rep = fs::temp_directory_path() / "uqinit_acceptance_bench.jsonl";
  const std::string cmd = g_cli_path +
                          " bench --n 4096 --k 2 --rows 2 --repeat 1 --seed 99 --report " +
                          rep.string() + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    detail = "bench invocation failed";
    return false;
  }
  double rel_time = -1.0, rel_loss = -1.0;
  std::ifstream in(rep);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    if (rec.value("variant", "") == "neuqi") {
      rel_time = rec["rel_time"].get<double>();
      rel_loss = rec["rel_loss"].get<double>();
    }
  }
  const double elapsed = seconds_since(t0);
  detail = "neuqi rel_time " + std::to_string(rel_time) + ", rel_loss " +
           std::to_string(rel_loss) + ", " + std::to_string(elapsed) + " s";
  return rel_time > 0.0 && rel_time <= 0.2 && rel_loss > 0.0 && rel_loss <= 1.01 &&
         elapsed < 120.0;
}

// C4: the closed-form optimum for uniform data is recovered by the search.
bool criterion4(std::string& detail) {
  SplitMix64 rng(1004);
  const double a = -0.3, b = 2.1;
  const int bits = 2;
  const std::size_t n = 100000;
  const WeightedRow row = with_unit_weights(uniform_vector(rng, n, a, b));
  const SearchConfig cfg{2048, 64, 1};
  const InitResult r = neuqi_init(row, bits, cfg);

  const double s_opt = (b - a) / (1 << bits);
  const auto [lo, hi] = std::minmax_element(row.values.begin(), row.values.end());
  const double step = (*hi - *lo) / ((1 << bits) - 1) / cfg.T;
  const double scale_err = std::abs(r.params.scale - s_opt);

  const double z_opt = -(a / r.params.scale + 0.5);
  const double z_err = std::abs(r.params.zero_point - z_opt);

  const double mean_loss = r.loss / static_cast<double>(n);
  const double mse = s_opt * s_opt / 12.0;
  const double loss_rel_err = std::abs(mean_loss - mse) / mse;

  detail = "scale err " + std::to_string(scale_err / step) + " steps, z err " +
           std::to_string(z_err) + ", mean-loss rel err " + std::to_string(loss_rel_err);
  return scale_err <= step * (1.0 + 1e-9) && z_err <= 0.05 && loss_rel_err <= 0.02;
}

// C5: average bit-width bookkeeping.
bool criterion5(std::string& detail) {
  const double real_z = average_bits({2, 16, 16, 128});
  const double int_z = average_bits({2, 16, 2, 128});
  const double g64 = average_bits({2, 16, 2, 64});
  detail = std::to_string(real_z) + " / " + std::to_string(int_z) + " / " + std::to_string(g64);
  return real_z == 2.25 && std::abs(int_z - 2.14) <= 0.005 && std::abs(g64 - 2.28) <= 0.005;
}

// C6: the real-valued zero-point dominates the k-bit integer zero-points.
bool criterion6(std::string& detail) {
  SplitMix64 rng(1006);
  const int trials = 1000;
  int strict = 0;
  int violations = 0;
  for (int trial = 0; trial < trials; ++trial) {
    const int bits = 2;
    const std::size_t n = 8 + rng.next() % 57;
    const WeightedRow row(gaussian_vector(rng, n, rng.uniform(-1.0, 1.0), rng.uniform(0.3, 2.0)),
                          mixed_weights(rng, n, trial));
    const double smax =
        (*std::max_element(row.values.begin(), row.values.end()) -
         *std::min_element(row.values.begin(), row.values.end())) /
        ((1 << bits) - 1);
    const double s = smax * rng.uniform(0.1, 1.0);
    std::vector<double> x(n), h(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = row.values[i] / s;
      h[i] = row.weights[i] * s * s;
    }
    const double exact = optimal_zero_exact(x, h, bits).loss_star;
    const double integer_best = oracle::best_integer_zero_loss(row, s, bits);
    if (exact > integer_best + 1e-9) ++violations;
    if (exact < integer_best - 1e-12) ++strict;
  }
  detail = std::to_string(violations) + " violations, strict improvement in " +
           std::to_string(strict) + "/" + std::to_string(trials);
  return violations == 0 && strict >= trials / 2;
}

// C7: Min-Max+ improves on Min-Max for uniform rows.
bool criterion7(std::string& detail) {
  SplitMix64 rng(1007);
  bool ok = true;
  std::string ratios;
  for (int bits : {2, 3}) {
    double sum_mm = 0.0, sum_mmp = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const WeightedRow row =
          with_unit_weights(uniform_vector(rng, 4096, -0.8, 1.7));
      sum_mm += quant_loss(row, minmax_init(row.values, bits));
      sum_mmp += quant_loss(row, minmax_plus_init(row.values, bits));
    }
    ok = ok && sum_mmp < sum_mm;
    ratios += "k=" + std::to_string(bits) + " ratio " + std::to_string(sum_mmp / sum_mm) + " ";
  }
  detail = ratios;
  return ok;
}

// C8: equivariances of the full search.
bool criterion8(std::string& detail) {
  SplitMix64 rng(1008);
  const std::size_t n = 64;
  const WeightedRow row(gaussian_vector(rng, n), uniform_vector(rng, n, 0.2, 1.2));
  const SearchConfig cfg{2048, 64, 1};
  const InitResult base = neuqi_init(row, 2, cfg);
  double worst = 0.0;

  for (double c : {0.5, 3.0, 100.0}) {
    std::vector<double> v = row.values;
    for (auto& w : v) w *= c;
    const InitResult r = neuqi_init(WeightedRow(v, row.weights), 2, cfg);
    worst = std::max(worst, std::abs(r.loss - c * c * base.loss) /
                                std::max(1e-300, c * c * base.loss));
    worst = std::max(worst, std::abs(r.params.scale - c * base.params.scale) /
                                (c * base.params.scale));
    worst = std::max(worst, std::abs(r.params.zero_point - base.params.zero_point) /
                                std::max(1.0, std::abs(base.params.zero_point)));
  }
  for (double d : {-5.0, 0.3}) {
    std::vector<double> v = row.values;
    for (auto& w : v) w += d;
    const InitResult r = neuqi_init(WeightedRow(v, row.weights), 2, cfg);
    worst = std::max(worst, std::abs(r.loss - base.loss) / base.loss);
    worst = std::max(worst,
                     std::abs(r.params.scale - base.params.scale) / base.params.scale);
    const double expect_z = base.params.zero_point - d / base.params.scale;
    worst = std::max(worst,
                     std::abs(r.params.zero_point - expect_z) / std::max(1.0, std::abs(expect_z)));
  }
  detail = "worst relative deviation " + std::to_string(worst);
  return worst <= 1e-6;
}

// C9: layer pipeline structure round-trip and compensation sanity.
bool criterion9(std::string& detail) {
  SplitMix64 rng(1009);
  const std::size_t rows = 64, cols = 128;
  LayerProblem p;
  p.rows = rows;
  p.cols = cols;
  p.weights = gaussian_vector(rng, rows * cols);
  const std::size_t m = 2 * cols;
  HessianEstimate est = hessian_from_activations(gaussian_vector(rng, m * cols), m, cols);
  p.hessian_full = std::move(est.full);
  p.hessian_diag = std::move(est.diag);

  const SearchConfig cfg{256, 16, 1};
  const GroupSpec g{GroupMode::grouped, 32};
  const QuantizedLayer q = quantize_layer(p, g, 2, InitMethod::neuqi, cfg, true);

  // permutation is a bijection ordered by descending diagonal
  std::vector<std::uint32_t> sorted = q.perm;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t j = 0; j < cols; ++j) {
    if (sorted[j] != j) {
      detail = "perm is not a bijection";
      return false;
    }
  }
  for (std::size_t j = 1; j < cols; ++j) {
    if (p.hessian_diag[q.perm[j - 1]] < p.hessian_diag[q.perm[j]]) {
      detail = "perm not ordered by descending diagonal";
      return false;
    }
  }
  if (q.group_size != 32 || q.n_groups != cols / 32 || q.codes.size() != rows * cols) {
    detail = "grouping metadata mismatch";
    return false;
  }
  // dequantization undoes the stored permutation exactly
  const std::vector<double> deq = dequantize_layer(q);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      const QuantParams& qp = q.params[r * q.n_groups + j / q.group_size];
      const double v = qp.scale * (q.codes[r * cols + j] - qp.zero_point);
      if (deq[r * cols + q.perm[j]] != v) {
        detail = "dequantize does not invert the permutation bit-exactly";
        return false;
      }
    }
  }

  LayerProblem ident = p;
  ident.hessian_full.assign(cols * cols, 0.0);
  for (std::size_t i = 0; i < cols; ++i) ident.hessian_full[i * cols + i] = 1.0;
  ident.hessian_diag.assign(cols, 1.0);
  const QuantizedLayer qc = quantize_layer(ident, g, 2, InitMethod::neuqi, cfg, true);
  const QuantizedLayer qp = quantize_layer(ident, g, 2, InitMethod::neuqi, cfg, false);
  if (qc.codes != qp.codes) {
    detail = "identity Hessian changed codes under compensation";
    return false;
  }
  detail = "structure and compensation sanity hold";
  return true;
}

struct Criterion {
  const char* name;
  bool (*fn)(std::string&);
};

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) {
    g_cli_path = argv[1];
  } else if (const char* env = std::getenv("UQINIT_CLI")) {
    g_cli_path = env;
  } else {
    std::cerr << "usage: acceptance <path-to-uqinit-cli>\n";
    return 2;
  }

  const Criterion criteria[] = {
      {"C1 exact-sweep oracle equivalence", criterion1},
      {"C2 zero-point approximation near-optimality", criterion2},
      {"C3 benchmark speedup and fidelity", criterion3},
      {"C4 uniform-data closed form recovered", criterion4},
      {"C5 average bit-width table", criterion5},
      {"C6 fixed-scale dominance over integer zero-points", criterion6},
      {"C7 Min-Max+ improves on Min-Max", criterion7},
      {"C8 scaling and shifting equivariance", criterion8},
      {"C9 layer pipeline integrity", criterion9},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    std::string detail;
    const bool ok = c.fn(detail);
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.name << " — " << detail << "\n";
    if (!ok) ++failed;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << "\n";
  return failed == 0 ? 0 : 1;
}
