// uqinit command line: init / quantize / compare / bench over the tensor
// container format. Talks to the core exclusively through the C API.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "report.hpp"
#include "tensor_file.hpp"
#include "uqinit.h"

namespace {

using uqcli::MethodRecord;
using uqcli::Report;
using uqcli::TensorFile;
using uqcli::TensorIoError;

// Exit codes: 0 success, 2 I/O or parse, 3 validation.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void uq_check(int rc) {
  if (rc != UQ_OK) throw ValidationError(uq_last_error());
}

int method_id(const std::string& name) {
  if (name == "minmax") return UQ_METHOD_MINMAX;
  if (name == "minmax_plus") return UQ_METHOD_MINMAX_PLUS;
  if (name == "int_search") return UQ_METHOD_INT_SEARCH;
  if (name == "int_search_zp") return UQ_METHOD_INT_SEARCH_ZP;
  if (name == "neuqi") return UQ_METHOD_NEUQI;
  if (name == "neuqi_exhaustive") return UQ_METHOD_NEUQI_EXHAUSTIVE;
  if (name == "neuqi_full") return UQ_METHOD_NEUQI_FULL;
  if (name == "oracle") return UQ_METHOD_ORACLE;
  throw ValidationError("unknown method: " + name);
}

bool integer_zero_method(const std::string& name) {
  return name == "minmax" || name == "minmax_plus" || name == "int_search" ||
         name == "int_search_zp";
}

double elapsed_seconds(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct LayerHandle {
  std::unique_ptr<uq_layer, decltype(&uq_layer_destroy)> ptr{nullptr, uq_layer_destroy};
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  bool has_full = false;
};

struct CommonOptions {
  std::string weights_path;
  std::string hessian_path;
  int bits = 2;
  std::string method = "neuqi";
  std::int64_t group = 0;  // 0 = channel-wise
  int T = 2048;
  int Tc = 64;
  int window = 1;
  bool exact = false;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string report_path;
};

void add_common_options(CLI::App* cmd, CommonOptions& o, bool needs_method) {
  cmd->add_option("--weights", o.weights_path, "tensor file holding 'weights' (rows x cols)")
      ->required();
  cmd->add_option("--hessian", o.hessian_path,
                  "tensor file holding 'hessian' (cols x cols) and/or 'hessian_diag'");
  cmd->add_option("--bits", o.bits, "weight bit-width (1-8)");
  if (needs_method) cmd->add_option("--method", o.method, "initialization method");
  cmd->add_option("--group", o.group, "group size (0 = channel-wise)");
  cmd->add_option("--T", o.T, "full scale grid size");
  cmd->add_option("--Tc", o.Tc, "coarse scale grid size");
  cmd->add_option("--window", o.window, "fine window half-width in coarse steps");
  cmd->add_flag("--exact", o.exact, "use the exact zero-point sweep inside the scale search");
  cmd->add_option("--seed", o.seed, "seed echoed into reports");
  cmd->add_option("--report", o.report_path, "write machine-readable JSONL records here");
}

void check_bits(int bits) {
  if (bits < 1 || bits > 8) throw ValidationError("bits out of range [1, 8]");
}

uq_search_config make_config(const CommonOptions& o) {
  uq_search_config cfg = uq_default_search_config();
  cfg.T = o.T;
  cfg.Tc = o.Tc;
  cfg.window_coarse_steps = o.window;
  return cfg;
}

// 'neuqi --exact' runs the coarse-to-fine search with the exact sweep.
int resolve_method(const CommonOptions& o) {
  if (!o.exact) return method_id(o.method);
  if (o.method == "neuqi") return UQ_METHOD_NEUQI_EXACT;
  if (o.method == "neuqi_exhaustive") return UQ_METHOD_NEUQI_FULL;
  throw ValidationError("--exact applies to method neuqi or neuqi_exhaustive");
}

LayerHandle load_layer(const CommonOptions& o) {
  const TensorFile wf = TensorFile::read(o.weights_path);
  std::string wname = "weights";
  if (!wf.contains(wname)) {
    const auto names = wf.names();
    if (names.size() == 1) {
      wname = names.front();
    } else {
      throw ValidationError("weights file has no tensor named 'weights'");
    }
  }
  const uqcli::Tensor& wt = wf.tensor(wname);
  if (wt.shape.size() != 2 || wt.shape[0] < 1 || wt.shape[1] < 1) {
    throw ValidationError("tensor '" + wname + "' must be 2-D (rows x cols)");
  }
  const std::vector<double> weights = wt.as_doubles();

  LayerHandle layer;
  layer.rows = wt.shape[0];
  layer.cols = wt.shape[1];
  uq_layer* raw = nullptr;
  uq_check(uq_layer_create(layer.rows, layer.cols, weights.data(), &raw));
  layer.ptr.reset(raw);

  if (!o.hessian_path.empty()) {
    const TensorFile hf = TensorFile::read(o.hessian_path);
    if (hf.contains("hessian")) {
      const uqcli::Tensor& ht = hf.tensor("hessian");
      if (ht.shape.size() != 2 || ht.shape[0] != layer.cols || ht.shape[1] != layer.cols) {
        throw ValidationError("tensor 'hessian' must be cols x cols");
      }
      const std::vector<double> full = ht.as_doubles();
      uq_check(uq_layer_set_hessian_full(raw, full.data()));
      layer.has_full = true;
    } else if (hf.contains("hessian_diag")) {
      const uqcli::Tensor& dt = hf.tensor("hessian_diag");
      if (dt.element_count() != static_cast<std::size_t>(layer.cols)) {
        throw ValidationError("tensor 'hessian_diag' must have length cols");
      }
      const std::vector<double> diag = dt.as_doubles();
      uq_check(uq_layer_set_hessian_diag(raw, diag.data()));
    } else {
      throw ValidationError("hessian file lacks tensors 'hessian' and 'hessian_diag'");
    }
  }
  return layer;
}

struct InitRun {
  std::vector<double> scales;
  std::vector<double> zero_points;
  std::vector<double> losses;
  std::int64_t evaluations = 0;
  std::int64_t n_groups = 0;
  double total_loss = 0.0;
  double wall_time_s = 0.0;
};

InitRun run_layer_init(const LayerHandle& layer, const CommonOptions& o, int method) {
  check_bits(o.bits);
  const std::int64_t gs = o.group == 0 ? layer.cols : o.group;
  if (gs < 1 || layer.cols % gs != 0) {
    throw ValidationError("cols not divisible by group size");
  }
  InitRun run;
  run.n_groups = layer.cols / gs;
  const std::size_t total = static_cast<std::size_t>(layer.rows * run.n_groups);
  run.scales.resize(total);
  run.zero_points.resize(total);
  run.losses.resize(total);
  const uq_search_config cfg = make_config(o);
  const auto t0 = std::chrono::steady_clock::now();
  uq_check(uq_layer_init(layer.ptr.get(), o.bits, o.group, method, &cfg, run.scales.data(),
                         run.zero_points.data(), run.losses.data(), &run.evaluations));
  run.wall_time_s = elapsed_seconds(t0);
  run.total_loss = std::accumulate(run.losses.begin(), run.losses.end(), 0.0);
  return run;
}

double compute_average_bits(const CommonOptions& o, std::int64_t cols) {
  const std::int64_t divisor = o.group == 0 ? cols : o.group;
  const int zero_bits = integer_zero_method(o.method) ? o.bits : 16;
  double out = 0.0;
  uq_check(uq_average_bits(o.bits, 16, zero_bits, divisor, &out));
  return out;
}

std::string grouping_label(const CommonOptions& o) {
  return o.group == 0 ? "channel" : "group" + std::to_string(o.group);
}

nlohmann::json config_echo(const CommonOptions& o) {
  return {{"T", o.T}, {"Tc", o.Tc}, {"window", o.window}, {"exact", o.exact},
          {"group", o.group}, {"bits", o.bits}};
}

void emit_report(const Report& report, const std::string& report_path) {
  report.print_table(std::cout);
  report.write_jsonl(std::cout);
  if (!report_path.empty()) {
    std::ofstream f(report_path, std::ios::trunc);
    if (!f) throw TensorIoError("cannot write " + report_path);
    report.write_jsonl(f);
  }
}

void cmd_init(const CommonOptions& o) {
  const LayerHandle layer = load_layer(o);
  const InitRun run = run_layer_init(layer, o, resolve_method(o));

  if (!o.out_path.empty()) {
    TensorFile out;
    const std::vector<std::int64_t> shape{layer.rows, run.n_groups};
    out.add("scale", shape, run.scales);
    out.add("zero_point", shape, run.zero_points);
    out.add("group_loss", shape, run.losses);
    out.metadata()["bits"] = std::to_string(o.bits);
    out.metadata()["method"] = o.method;
    out.metadata()["group_size"] = std::to_string(o.group == 0 ? layer.cols : o.group);
    out.write(o.out_path);
  }

  Report report;
  report.add({o.method, "", 0, o.bits, grouping_label(o),
              static_cast<std::size_t>(layer.rows), static_cast<std::size_t>(layer.cols),
              run.total_loss, std::nullopt, compute_average_bits(o, layer.cols),
              run.wall_time_s, run.evaluations, o.seed, config_echo(o), 1.0, 1.0});
  emit_report(report, o.report_path);
}

void cmd_quantize(const CommonOptions& o, bool compensate) {
  const LayerHandle layer = load_layer(o);
  check_bits(o.bits);
  const uq_search_config cfg = make_config(o);

  const auto t0 = std::chrono::steady_clock::now();
  uq_quantized_layer* qraw = nullptr;
  uq_check(uq_layer_quantize(layer.ptr.get(), o.bits, o.group, resolve_method(o), &cfg,
                             compensate ? 1 : 0, &qraw));
  std::unique_ptr<uq_quantized_layer, decltype(&uq_qlayer_destroy)> q(qraw, uq_qlayer_destroy);
  const double wall = elapsed_seconds(t0);

  std::int64_t rows = 0, cols = 0, gs = 0, n_groups = 0;
  std::int32_t bits = 0, comp = 0;
  uq_check(uq_qlayer_dims(q.get(), &rows, &cols, &gs, &n_groups, &bits, &comp));

  std::vector<std::int32_t> codes(static_cast<std::size_t>(rows * cols));
  uq_check(uq_qlayer_codes(q.get(), codes.data()));
  std::vector<uq_quant_params> params(static_cast<std::size_t>(rows * n_groups));
  uq_check(uq_qlayer_params(q.get(), params.data()));
  std::vector<std::uint32_t> perm(static_cast<std::size_t>(cols));
  uq_check(uq_qlayer_permutation(q.get(), perm.data()));

  double loss = 0.0;
  uq_check(uq_qlayer_diag_loss(layer.ptr.get(), q.get(), &loss));
  std::optional<double> loss_full;
  if (layer.has_full) {
    double lf = 0.0;
    uq_check(uq_qlayer_full_loss(layer.ptr.get(), q.get(), &lf));
    loss_full = lf;
  }

  if (o.out_path.empty()) throw ValidationError("quantize requires --out");
  TensorFile out;
  std::vector<double> codes_f(codes.begin(), codes.end());
  out.add("codes", {rows, cols}, codes_f, "F32");
  std::vector<double> scales(params.size()), zeros(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    scales[i] = params[i].scale;
    zeros[i] = params[i].zero_point;
  }
  out.add("scale", {rows, n_groups}, scales);
  out.add("zero_point", {rows, n_groups}, zeros);
  std::vector<double> perm_f(perm.begin(), perm.end());
  out.add("perm", {cols}, perm_f);
  const double avg_bits = compute_average_bits(o, cols);
  out.metadata()["bits"] = std::to_string(o.bits);
  out.metadata()["method"] = o.method;
  out.metadata()["group_size"] = std::to_string(gs);
  out.metadata()["compensated"] = comp ? "1" : "0";
  out.metadata()["average_bits"] = std::to_string(avg_bits);
  out.write(o.out_path);

  Report report;
  report.add({o.method, "", 0, o.bits, grouping_label(o), static_cast<std::size_t>(rows),
              static_cast<std::size_t>(cols), loss, loss_full, avg_bits, wall, 0, o.seed,
              config_echo(o), 1.0, 1.0});
  emit_report(report, o.report_path);
}

void cmd_compare(const CommonOptions& base, const std::vector<std::string>& methods,
                 std::string baseline) {
  if (methods.empty()) throw ValidationError("compare requires at least one method");
  if (baseline.empty()) baseline = methods.front();
  const LayerHandle layer = load_layer(base);

  Report report;
  for (const std::string& m : methods) {
    CommonOptions o = base;
    o.method = m;
    const InitRun run = run_layer_init(layer, o, resolve_method(o));
    report.add({m, "", 0, o.bits, grouping_label(o), static_cast<std::size_t>(layer.rows),
                static_cast<std::size_t>(layer.cols), run.total_loss, std::nullopt,
                compute_average_bits(o, layer.cols), run.wall_time_s, run.evaluations, o.seed,
                config_echo(o), 1.0, 1.0});
  }
  try {
    report.compute_ratios(baseline);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  emit_report(report, base.report_path);
}

struct BenchOptions {
  std::int64_t n = 4096;
  int k = 2;
  std::vector<std::string> variants{"full", "no_ctf", "neuqi"};
  int rows = 2;
  int repeat = 1;
  std::uint64_t seed = 1234;
  int T = 2048;
  int Tc = 64;
  int window = 1;
  std::string report_path;
};

int variant_method(const std::string& v) {
  if (v == "full") return UQ_METHOD_NEUQI_FULL;
  if (v == "no_ctf") return UQ_METHOD_NEUQI_EXHAUSTIVE;
  if (v == "neuqi") return UQ_METHOD_NEUQI;
  throw ValidationError("unknown bench variant: " + v);
}

void cmd_bench(const BenchOptions& b) {
  check_bits(b.k);
  if (b.n < 1 || b.rows < 1 || b.repeat < 1) {
    throw ValidationError("bench sizes must be positive");
  }
  // Seeded synthetic rows: gaussian values, squared-gaussian weights.
  std::vector<std::vector<double>> values(b.rows), weights(b.rows);
  for (int r = 0; r < b.rows; ++r) {
    values[r].resize(static_cast<std::size_t>(b.n));
    weights[r].resize(static_cast<std::size_t>(b.n));
    uq_check(uq_fill_random(b.seed, 2 * static_cast<std::uint64_t>(r), UQ_DIST_GAUSSIAN, b.n,
                            values[r].data()));
    uq_check(uq_fill_random(b.seed, 2 * static_cast<std::uint64_t>(r) + 1, UQ_DIST_GAUSSIAN,
                            b.n, weights[r].data()));
    for (auto& w : weights[r]) w = w * w;
  }

  uq_search_config cfg = uq_default_search_config();
  cfg.T = b.T;
  cfg.Tc = b.Tc;
  cfg.window_coarse_steps = b.window;

  Report report;
  for (int rep = 1; rep <= b.repeat; ++rep) {
    for (const std::string& v : b.variants) {
      const int method = variant_method(v);
      double loss = 0.0;
      std::int64_t evals = 0;
      const auto t0 = std::chrono::steady_clock::now();
      for (int r = 0; r < b.rows; ++r) {
        uq_init_result res{};
        uq_check(uq_row_init(values[r].data(), weights[r].data(),
                             static_cast<std::size_t>(b.n), b.k, method, &cfg, &res));
        loss += res.loss;
        evals += res.evaluations;
      }
      const double wall = elapsed_seconds(t0);
      report.add({"neuqi", v, rep, b.k, "channel", static_cast<std::size_t>(b.rows),
                  static_cast<std::size_t>(b.n), loss, std::nullopt, 0.0, wall, evals, b.seed,
                  {{"T", b.T}, {"Tc", b.Tc}, {"window", b.window}, {"variants", b.variants}},
                  1.0, 1.0});
    }
  }
  const std::string baseline =
      std::find(b.variants.begin(), b.variants.end(), "full") != b.variants.end()
          ? "full"
          : b.variants.front();
  report.compute_ratios(baseline);
  emit_report(report, b.report_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uniform quantization parameter initialization"};
  app.require_subcommand(1);

  CommonOptions init_opts;
  CLI::App* init = app.add_subcommand("init", "choose per-group quantization parameters");
  add_common_options(init, init_opts, true);
  init->add_option("--out", init_opts.out_path, "write scale/zero_point tensors here");

  CommonOptions quant_opts;
  bool compensate = false;
  CLI::App* quantize = app.add_subcommand("quantize", "quantize a layer to codes");
  add_common_options(quantize, quant_opts, true);
  quantize->add_option("--compensate", compensate,
                       "propagate rounding error through the inverse Hessian");
  quantize->add_option("--out", quant_opts.out_path, "write codes/params/perm here")
      ->required();

  CommonOptions cmp_opts;
  std::vector<std::string> cmp_methods;
  std::string cmp_baseline;
  CLI::App* compare = app.add_subcommand("compare", "run several methods on the same input");
  add_common_options(compare, cmp_opts, false);
  compare->add_option("--methods", cmp_methods, "comma-separated method list")
      ->required()
      ->delimiter(',');
  compare->add_option("--baseline", cmp_baseline, "ratio baseline (default: first method)");

  BenchOptions bench_opts;
  CLI::App* bench = app.add_subcommand("bench", "time initializer variants on synthetic rows");
  bench->add_option("--n", bench_opts.n, "row length");
  bench->add_option("--k", bench_opts.k, "bit-width");
  bench->add_option("--variants", bench_opts.variants, "subset of full,no_ctf,neuqi")
      ->delimiter(',');
  bench->add_option("--rows", bench_opts.rows, "number of synthetic rows");
  bench->add_option("--repeat", bench_opts.repeat, "timing repetitions");
  bench->add_option("--seed", bench_opts.seed, "fixture seed");
  bench->add_option("--T", bench_opts.T, "full scale grid size");
  bench->add_option("--Tc", bench_opts.Tc, "coarse scale grid size");
  bench->add_option("--window", bench_opts.window, "fine window half-width in coarse steps");
  bench->add_option("--report", bench_opts.report_path, "write JSONL records here");

  try {
    app.parse(argc, argv);
    if (init->parsed()) cmd_init(init_opts);
    if (quantize->parsed()) cmd_quantize(quant_opts, compensate);
    if (compare->parsed()) cmd_compare(cmp_opts, cmp_methods, cmp_baseline);
    if (bench->parsed()) cmd_bench(bench_opts);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  } catch (const TensorIoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
