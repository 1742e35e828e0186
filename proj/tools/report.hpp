#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace uqcli {

struct MethodRecord {
  std::string method;
  std::string variant;  // bench variant label; empty elsewhere
  int repeat = 0;
  int bits = 0;
  std::string grouping;  // "channel" or "group<g>"
  std::size_t rows = 0;
  std::size_t cols = 0;
  double loss = 0.0;
  std::optional<double> loss_full;
  double average_bits = 0.0;
  double wall_time_s = 0.0;
  std::int64_t evaluations = 0;
  std::uint64_t seed = 0;
  nlohmann::json config;
  double rel_loss = 1.0;
  double rel_time = 1.0;
};

/// Per-method records emitted both as machine-readable JSON lines and as a
/// flat table. Loss fields depend only on inputs and seed; wall times vary.
class Report {
 public:
  void add(MethodRecord record) { records_.push_back(std::move(record)); }

  /// Ratios against the named method, matched per repeat index.
  /// Throws std::invalid_argument when the baseline is absent.
  void compute_ratios(const std::string& baseline);

  void write_jsonl(std::ostream& os) const;
  void print_table(std::ostream& os) const;

  const std::vector<MethodRecord>& records() const { return records_; }

 private:
  std::vector<MethodRecord> records_;
};

}  // namespace uqcli
