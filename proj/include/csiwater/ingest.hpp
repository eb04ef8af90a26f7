#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "csiwater/csi_model.hpp"
#include "csiwater/dataset.hpp"

namespace csiwater {

// Capture line grammar:
//   CSI_DATA,<MAC>,<RSSI>,<CHANNEL>,<TIMESTAMP_MS>[,<extra>...],[i0 r0 i1 r1 ...]
// Payload integers are interleaved (imaginary, real) pairs in [-32768, 32767].
// Up to two extra header fields (signal mode, signal length) are accepted and
// ignored.
inline constexpr std::string_view kCsiSentinel = "CSI_DATA";
inline constexpr int kPayloadMin = -32768;
inline constexpr int kPayloadMax = 32767;

struct RawCsiLine {
  std::string_view text;
  std::size_t line_number = 1;
};

enum class ParseFailureKind { NotCsiLine, FieldCount, BadInteger, BadMac, OddPayload, WidthMismatch };

std::string_view to_string(ParseFailureKind kind);

struct ParseFailure {
  std::size_t line_number = 0;
  ParseFailureKind kind = ParseFailureKind::NotCsiLine;
  std::string message;
};

std::variant<CsiFrame, ParseFailure> parse_csi_line(const RawCsiLine& line, std::size_t expected_n);

struct CaptureParse {
  std::vector<CsiFrame> frames;
  std::vector<ParseFailure> failures;
  std::size_t lines = 0;

  std::size_t count(ParseFailureKind kind) const;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws IoError if the stream goes bad mid-read.
CaptureParse parse_capture(std::istream& in, std::size_t expected_n);

// Throws std::invalid_argument when a sample is not an integer in payload range.
std::string format_csi_line(const CsiFrame& frame);
void write_capture(std::ostream& out, std::span<const CsiFrame> frames);

// Dataset CSV: header `label,f0,...,f{w-1}`, one sample per row, shortest
// round-trip decimal encoding for every value.
class DatasetError : public std::runtime_error {
 public:
  enum class Kind { Io, BadHeader, WidthMismatch, UnknownLabel, BadNumber };

  DatasetError(Kind kind, std::size_t line, const std::string& message)
      : std::runtime_error(message), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  // 1-based line in the file; 0 when not tied to a line.
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

std::string format_double(double value);

Dataset read_dataset(std::istream& in);
void write_dataset(std::ostream& out, const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Writes via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace csiwater
