#include "csiwater/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <system_error>

namespace csiwater {
namespace {

std::string_view trim_line_end(std::string_view s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto at = text.find(sep, start);
    if (at == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, at - start));
    start = at + 1;
  }
}

}  // namespace

std::string_view to_string(ParseFailureKind kind) {
  switch (kind) {
    case ParseFailureKind::NotCsiLine:
      return "NotCsiLine";
    case ParseFailureKind::FieldCount:
      return "FieldCount";
    case ParseFailureKind::BadInteger:
      return "BadInteger";
    case ParseFailureKind::BadMac:
      return "BadMac";
    case ParseFailureKind::OddPayload:
      return "OddPayload";
    case ParseFailureKind::WidthMismatch:
      return "WidthMismatch";
  }
  return "?";
}

std::variant<CsiFrame, ParseFailure> parse_csi_line(const RawCsiLine& line, std::size_t expected_n) {
  const auto fail = [&](ParseFailureKind kind, std::string message) {
    return ParseFailure{line.line_number, kind, std::move(message)};
  };
  const std::string_view text = trim_line_end(line.text);

  const auto first_comma = text.find(',');
  if (text.substr(0, first_comma) != kCsiSentinel) {
    return fail(ParseFailureKind::NotCsiLine, "missing CSI_DATA sentinel");
  }

  const auto open = text.find('[');
  if (open == std::string_view::npos || text.back() != ']' || text[open - 1] != ',') {
    return fail(ParseFailureKind::FieldCount, "missing bracketed payload field");
  }
  const auto header = split(text.substr(0, open - 1), ',');
  if (header.size() < 5 || header.size() > 7) {
    return fail(ParseFailureKind::FieldCount,
                "expected 5 to 7 header fields, found " + std::to_string(header.size()));
  }

  CsiFrame frame;
  if (auto mac = MacAddress::parse(header[1])) {
    frame.source_mac = *mac;
  } else {
    return fail(ParseFailureKind::BadMac, "malformed MAC address '" + std::string(header[1]) + "'");
  }
  if (!parse_int(header[2], frame.rssi_dbm)) {
    return fail(ParseFailureKind::BadInteger, "bad RSSI '" + std::string(header[2]) + "'");
  }
  if (!parse_int(header[3], frame.channel)) {
    return fail(ParseFailureKind::BadInteger, "bad channel '" + std::string(header[3]) + "'");
  }
  if (!parse_int(header[4], frame.timestamp_ms)) {
    return fail(ParseFailureKind::BadInteger, "bad timestamp '" + std::string(header[4]) + "'");
  }

  const std::string_view payload = text.substr(open + 1, text.size() - open - 2);
  std::vector<int> values;
  values.reserve(2 * expected_n);
  std::size_t pos = 0;
  while (pos < payload.size()) {
    if (payload[pos] == ' ' || payload[pos] == '\t') {
      ++pos;
      continue;
    }
    auto end = payload.find_first_of(" \t", pos);
    if (end == std::string_view::npos) end = payload.size();
    const auto token = payload.substr(pos, end - pos);
    long long v = 0;
    if (!parse_int(token, v) || v < kPayloadMin || v > kPayloadMax) {
      return fail(ParseFailureKind::BadInteger, "bad payload integer '" + std::string(token) + "'");
    }
    values.push_back(static_cast<int>(v));
    pos = end;
  }
  if (values.size() % 2 != 0) {
    return fail(ParseFailureKind::OddPayload,
                "payload has odd integer count " + std::to_string(values.size()));
  }
  if (values.size() / 2 != expected_n) {
    return fail(ParseFailureKind::WidthMismatch, "expected " + std::to_string(expected_n) +
                                                     " subcarriers, found " +
                                                     std::to_string(values.size() / 2));
  }
  frame.subcarriers.reserve(expected_n);
  for (std::size_t i = 0; i < values.size(); i += 2) {
    frame.subcarriers.emplace_back(static_cast<double>(values[i + 1]), static_cast<double>(values[i]));
  }
  return frame;
}

std::size_t CaptureParse::count(ParseFailureKind kind) const {
  std::size_t n = 0;
  for (const auto& f : failures) n += f.kind == kind ? 1 : 0;
  return n;
}

CaptureParse parse_capture(std::istream& in, std::size_t expected_n) {
  CaptureParse result;
  std::string line;
  while (std::getline(in, line)) {
    ++result.lines;
    auto parsed = parse_csi_line({line, result.lines}, expected_n);
    if (auto* frame = std::get_if<CsiFrame>(&parsed)) {
      result.frames.push_back(std::move(*frame));
    } else {
      result.failures.push_back(std::move(std::get<ParseFailure>(parsed)));
    }
  }
  if (in.bad()) throw IoError("capture stream read failure");
  return result;
}

std::string format_csi_line(const CsiFrame& frame) {
  const auto as_payload = [](double v) {
    if (v != std::trunc(v) || v < kPayloadMin || v > kPayloadMax) {
      throw std::invalid_argument("capture sample is not an integer in payload range");
    }
    return static_cast<int>(v);
  };
  std::string out;
  out.reserve(40 + frame.width() * 12);
  out += kCsiSentinel;
  out += ',';
  out += frame.source_mac.to_string();
  out += ',' + std::to_string(frame.rssi_dbm);
  out += ',' + std::to_string(frame.channel);
  out += ',' + std::to_string(frame.timestamp_ms);
  out += ",[";
  for (std::size_t i = 0; i < frame.width(); ++i) {
    if (i > 0) out += ' ';
    out += std::to_string(as_payload(frame.subcarriers[i].im()));
    out += ' ';
    out += std::to_string(as_payload(frame.subcarriers[i].re()));
  }
  out += ']';
  return out;
}

void write_capture(std::ostream& out, std::span<const CsiFrame> frames) {
  for (const auto& frame : frames) out << format_csi_line(frame) << '\n';
  if (!out) throw IoError("capture stream write failure");
}

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

Dataset read_dataset(std::istream& in) {
  const std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw DatasetError(DatasetError::Kind::Io, 0, "dataset stream read failure");

  std::size_t pos = 0;
  std::size_t line_no = 0;
  const auto next_line = [&](std::string_view& out) {
    if (pos >= content.size()) return false;
    auto end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    out = trim_line_end(std::string_view(content).substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw DatasetError(DatasetError::Kind::BadHeader, 0, "empty dataset file");
  const auto header = split(line, ',');
  if (header.size() < 2 || header[0] != "label") {
    throw DatasetError(DatasetError::Kind::BadHeader, 1, "header must be label,f0,...");
  }
  const std::size_t width = header.size() - 1;
  for (std::size_t i = 0; i < width; ++i) {
    if (header[i + 1] != "f" + std::to_string(i)) {
      throw DatasetError(DatasetError::Kind::BadHeader, 1,
                         "header column " + std::to_string(i + 1) + " must be f" + std::to_string(i));
    }
  }

  std::vector<double> values;
  std::vector<ClassLabel> labels;
  while (next_line(line)) {
    if (line.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    const auto comma = line.find(',');
    const auto label = parse_class_label(line.substr(0, comma));
    if (!label) {
      throw DatasetError(DatasetError::Kind::UnknownLabel, line_no,
                         where + "unknown label '" + std::string(line.substr(0, comma)) + "'");
    }
    labels.push_back(*label);
    std::size_t found = 0;
    std::size_t at = comma;
    while (at != std::string_view::npos) {
      const auto start = at + 1;
      at = line.find(',', start);
      const auto cell = line.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start);
      ++found;
      if (found > width) continue;
      double v = 0.0;
      const char* end = cell.data() + cell.size();
      auto [ptr, ec] = std::from_chars(cell.data(), end, v);
      if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw DatasetError(DatasetError::Kind::BadNumber, line_no,
                           where + "bad number '" + std::string(cell) + "'");
      }
      values.push_back(v);
    }
    if (found != width) {
      throw DatasetError(DatasetError::Kind::WidthMismatch, line_no,
                         where + "expected " + std::to_string(width) + " features, found " +
                             std::to_string(found));
    }
  }

  Dataset ds;
  ds.labels = std::move(labels);
  ds.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(ds.labels.size()), static_cast<Eigen::Index>(width));
  return ds;
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  if (dataset.features.rows() != static_cast<Eigen::Index>(dataset.labels.size())) {
    throw std::invalid_argument("dataset label count does not match feature rows");
  }
  std::string text = "label";
  for (Eigen::Index j = 0; j < dataset.width(); ++j) text += ",f" + std::to_string(j);
  text += '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < dataset.features.rows(); ++i) {
    text += to_string(dataset.labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < dataset.width(); ++j) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, dataset.features(i, j));
      text += ',';
      text.append(buf, ptr);
    }
    text += '\n';
  }
  out << text;
  if (!out) throw IoError("dataset stream write failure");
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(DatasetError::Kind::Io, 0, "cannot open dataset " + path.string());
  return read_dataset(in);
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ostringstream out;
  write_dataset(out, dataset);
  write_file_atomic(path, out.view());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

}  // namespace csiwater
