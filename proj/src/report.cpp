#include "csiwater/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "csiwater/ingest.hpp"

namespace csiwater {
namespace {

constexpr const char* kMetricNames[] = {"auc", "tpr", "tnr", "f1", "accuracy"};

MetricSummary* metric_slot(MetricRow& row, std::string_view name) {
  if (name == "auc") return &row.auc;
  if (name == "tpr") return &row.tpr;
  if (name == "tnr") return &row.tnr;
  if (name == "f1") return &row.f1;
  if (name == "accuracy") return &row.accuracy;
  return nullptr;
}

const MetricSummary& metric_slot(const MetricRow& row, int i) {
  const MetricSummary* slots[] = {&row.auc, &row.tpr, &row.tnr, &row.f1, &row.accuracy};
  return *slots[i];
}

// Display width in code points; the cells contain a two-byte "±".
std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return w >= width ? s : s + std::string(width - w, ' ');
}

std::string csv_number(double v) { return std::isnan(v) ? "nan" : format_double(v); }

double parse_number(std::string_view s) {
  if (s == "nan") return std::nan("");
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad number '" + std::string(s) + "' in report");
  }
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_cell(const MetricSummary& s) {
  if (s.defined == 0 || std::isnan(s.mean)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f", s.mean, s.std);
  return buf;
}

std::string render_text(const std::vector<CvReport>& reports, std::string_view config_hash) {
  std::vector<std::string> order;
  for (const auto& r : reports) {
    if (std::find(order.begin(), order.end(), r.scenario) == order.end()) order.push_back(r.scenario);
  }
  const char* headers[] = {"Classifier", "AUC", "TPR", "TNR", "F1-Score", "Accuracy"};
  std::ostringstream out;
  for (std::size_t b = 0; b < order.size(); ++b) {
    std::vector<std::vector<std::string>> rows;
    const CvReport* first = nullptr;
    for (const auto& r : reports) {
      if (r.scenario != order[b]) continue;
      if (!first) first = &r;
      std::vector<std::string> row{r.model};
      for (int i = 0; i < 5; ++i) row.push_back(format_cell(metric_slot(r.row, i)));
      rows.push_back(std::move(row));
    }
    std::size_t widths[6];
    for (int c = 0; c < 6; ++c) {
      widths[c] = display_width(headers[c]);
      for (const auto& row : rows) widths[c] = std::max(widths[c], display_width(row[static_cast<std::size_t>(c)]));
    }
    if (b) out << '\n';
    out << "Scenario: " << order[b];
    if (first->k > 0) out << "  (" << first->k << "-fold CV)";
    out << "  seed " << first->seed << "  config " << config_hash << '\n';
    std::string line;
    for (int c = 0; c < 6; ++c) line += pad(headers[c], widths[c] + (c < 5 ? 2 : 0));
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
    for (const auto& row : rows) {
      line.clear();
      for (int c = 0; c < 6; ++c) line += pad(row[static_cast<std::size_t>(c)], widths[c] + (c < 5 ? 2 : 0));
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out << line << '\n';
    }
  }
  return out.str();
}

std::string render_csv(const std::vector<CvReport>& reports, std::string_view config_hash) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << '\n';
  if (!reports.empty()) out << "# k=" << reports.front().k << '\n';
  out << "scenario,model,metric,mean,std,seed\n";
  for (const auto& r : reports) {
    for (int i = 0; i < 5; ++i) {
      const auto& s = metric_slot(r.row, i);
      out << r.scenario << ',' << r.model << ',' << kMetricNames[i] << ',' << csv_number(s.mean) << ','
          << csv_number(s.std) << ',' << r.seed << '\n';
    }
  }
  return out.str();
}

ParsedReport parse_csv_report(std::istream& in) {
  ParsedReport out;
  std::string line;
  bool header = false;
  int k = 0;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.starts_with("#")) {
      constexpr std::string_view key = "# config_hash=";
      if (line.starts_with(key)) out.config_hash = line.substr(key.size());
      if (line.starts_with("# k=")) k = std::atoi(line.c_str() + 4);
      continue;
    }
    if (!header) {
      if (line != "scenario,model,metric,mean,std,seed") {
        throw std::invalid_argument("report header not recognised");
      }
      header = true;
      continue;
    }
    const auto f = split(line);
    if (f.size() != 6) throw std::invalid_argument("report line " + std::to_string(line_number) + ": expected 6 fields");
    CvReport* r = nullptr;
    for (auto& existing : out.reports) {
      if (existing.scenario == f[0] && existing.model == f[1]) r = &existing;
    }
    if (!r) {
      CvReport fresh;
      fresh.scenario = f[0];
      fresh.model = f[1];
      fresh.k = k;
      fresh.row.auc.defined = fresh.row.tpr.defined = fresh.row.tnr.defined = fresh.row.f1.defined =
          fresh.row.accuracy.defined = 0;
      out.reports.push_back(std::move(fresh));
      r = &out.reports.back();
    }
    MetricSummary* slot = metric_slot(r->row, f[2]);
    if (!slot) throw std::invalid_argument("report line " + std::to_string(line_number) + ": unknown metric " + f[2]);
    slot->mean = parse_number(f[3]);
    slot->std = parse_number(f[4]);
    slot->defined = std::isnan(slot->mean) ? 0 : 1;
    try {
      r->seed = std::stoull(f[5]);
    } catch (const std::exception&) {
      throw std::invalid_argument("report line " + std::to_string(line_number) + ": bad seed");
    }
  }
  if (!header) throw std::invalid_argument("report is empty");
  return out;
}

}  // namespace csiwater
