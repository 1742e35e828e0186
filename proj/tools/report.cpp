#include "report.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace uqcli {

void Report::compute_ratios(const std::string& baseline) {
  for (auto& rec : records_) {
    const MethodRecord* base = nullptr;
    for (const auto& cand : records_) {
      const std::string& label = cand.variant.empty() ? cand.method : cand.variant;
      if (label == baseline && cand.repeat == rec.repeat) {
        base = &cand;
        break;
      }
    }
    if (base == nullptr) {
      throw std::invalid_argument("baseline method not in report: " + baseline);
    }
    rec.rel_loss = base->loss == 0.0 ? (rec.loss == 0.0 ? 1.0 : INFINITY)
                                     : rec.loss / base->loss;
    rec.rel_time = base->wall_time_s == 0.0 ? 1.0 : rec.wall_time_s / base->wall_time_s;
  }
}

void Report::write_jsonl(std::ostream& os) const {
  for (const auto& r : records_) {
    nlohmann::json j{{"record", "method_result"},
                     {"method", r.method},
                     {"bits", r.bits},
                     {"grouping", r.grouping},
                     {"rows", r.rows},
                     {"cols", r.cols},
                     {"loss", r.loss},
                     {"average_bits", r.average_bits},
                     {"wall_time_s", r.wall_time_s},
                     {"evaluations", r.evaluations},
                     {"seed", r.seed},
                     {"config", r.config},
                     {"rel_loss", r.rel_loss},
                     {"rel_time", r.rel_time}};
    if (!r.variant.empty()) j["variant"] = r.variant;
    if (r.repeat != 0) j["repeat"] = r.repeat;
    if (r.loss_full.has_value()) j["loss_full"] = *r.loss_full;
    os << j.dump() << "\n";
  }
}

void Report::print_table(std::ostream& os) const {
  os << std::left << std::setw(18) << "method" << std::setw(6) << "bits" << std::setw(12)
     << "grouping" << std::setw(16) << "loss" << std::setw(12) << "rel_loss" << std::setw(12)
     << "time_s" << std::setw(12) << "rel_time" << std::setw(10) << "avg_bits" << std::setw(12)
     << "evals"
     << "\n";
  for (const auto& r : records_) {
    const std::string label = r.variant.empty() ? r.method : r.variant;
    os << std::left << std::setw(18) << label << std::setw(6) << r.bits << std::setw(12)
       << r.grouping << std::setw(16) << std::setprecision(8) << r.loss << std::setw(12)
       << std::setprecision(5) << r.rel_loss << std::setw(12) << std::setprecision(4)
       << r.wall_time_s << std::setw(12) << r.rel_time << std::setw(10) << r.average_bits
       << std::setw(12) << r.evaluations << "\n";
  }
}

}  // namespace uqcli
