#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "csiwater/cross_validation.hpp"

namespace csiwater {

// "mean±std" with two decimals; "n/a" when no fold defined the metric.
std::string format_cell(const MetricSummary& s);

// Aligned table, one block per scenario, columns
// Classifier | AUC | TPR | TNR | F1-Score | Accuracy.
std::string render_text(const std::vector<CvReport>& reports, std::string_view config_hash);

// "# config_hash=<hash>" then scenario,model,metric,mean,std,seed rows.
// Values use shortest round-trip formatting.
std::string render_csv(const std::vector<CvReport>& reports, std::string_view config_hash);

struct ParsedReport {
  std::string config_hash;
  std::vector<CvReport> reports;  // rows only; fold detail is not stored
};

// Inverse of render_csv. Throws std::invalid_argument on malformed input.
ParsedReport parse_csv_report(std::istream& in);

}  // namespace csiwater
