#include "doctest.h"

#include <chrono>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "csiwater/ingest.hpp"
#include "csiwater/synth.hpp"

using namespace csiwater;

namespace {

std::variant<CsiFrame, ParseFailure> parse(const std::string& s, std::size_t n) {
  return parse_csi_line(RawCsiLine{s, 1}, n);
}

ParseFailureKind kind_of(const std::variant<CsiFrame, ParseFailure>& r) {
  REQUIRE(std::holds_alternative<ParseFailure>(r));
  return std::get<ParseFailure>(r).kind;
}

CsiFrame random_frame(std::mt19937_64& gen, std::size_t n) {
  std::uniform_int_distribution<int> payload(kPayloadMin, kPayloadMax);
  std::uniform_int_distribution<int> byte(0, 255);
  CsiFrame f;
  for (auto& b : f.source_mac.bytes) b = static_cast<std::uint8_t>(byte(gen));
  f.rssi_dbm = std::uniform_int_distribution<int>(-100, 0)(gen);
  f.channel = std::uniform_int_distribution<int>(1, 165)(gen);
  f.timestamp_ms = std::uniform_int_distribution<std::int64_t>(0, std::int64_t{1} << 40)(gen);
  for (std::size_t i = 0; i < n; ++i) f.subcarriers.emplace_back(payload(gen), payload(gen));
  return f;
}

std::filesystem::path temp_dir(const char* name) {
  auto p = std::filesystem::temp_directory_path() / ("csiwater_" + std::string(name));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("parse a single-subcarrier line") {
  const auto r = parse("CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,1000,[3 4]", 1);
  REQUIRE(std::holds_alternative<CsiFrame>(r));
  const auto& f = std::get<CsiFrame>(r);
  CHECK(f.source_mac.to_string() == "AA:BB:CC:DD:EE:FF");
  CHECK(f.rssi_dbm == -42);
  CHECK(f.channel == 6);
  CHECK(f.timestamp_ms == 1000);
  REQUIRE(f.width() == 1);
  CHECK(f.subcarriers[0].re() == 4);
  CHECK(f.subcarriers[0].im() == 3);
}

TEST_CASE("typed failures") {
  CHECK(kind_of(parse("HELLO WORLD", 1)) == ParseFailureKind::NotCsiLine);
  CHECK(kind_of(parse("", 1)) == ParseFailureKind::NotCsiLine);
  CHECK(kind_of(parse("CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,1000,[3 4 5]", 1)) == ParseFailureKind::OddPayload);
  CHECK(kind_of(parse("CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,1000,[3 4 5 6]", 1)) == ParseFailureKind::WidthMismatch);
  CHECK(kind_of(parse("CSI_DATA,AA:BB:CC:DD:EE,-42,6,1000,[3 4]", 1)) == ParseFailureKind::BadMac);
  CHECK(kind_of(parse("CSI_DATA,AA:BB:CC:DD:EE:FF,x,6,1000,[3 4]", 1)) == ParseFailureKind::BadInteger);
  CHECK(kind_of(parse("CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,1000,[3 40000]", 1)) == ParseFailureKind::BadInteger);
  CHECK(kind_of(parse("CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,[3 4]", 1)) == ParseFailureKind::FieldCount);
  CHECK(kind_of(parse("CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,1000", 1)) == ParseFailureKind::FieldCount);
}

TEST_CASE("optional trailing header fields are accepted and ignored") {
  const auto r = parse("CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,1000,11,128,[3 4]", 1);
  REQUIRE(std::holds_alternative<CsiFrame>(r));
  CHECK(std::get<CsiFrame>(r).subcarriers[0].re() == 4);
  CHECK(kind_of(parse("CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,1000,1,2,3,[3 4]", 1)) == ParseFailureKind::FieldCount);
}

TEST_CASE("payload integer bounds") {
  CHECK(std::holds_alternative<CsiFrame>(parse("CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,1000,[-32768 32767]", 1)));
  CHECK(kind_of(parse("CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,1000,[-32769 0]", 1)) == ParseFailureKind::BadInteger);
}

TEST_CASE("parse_capture tallies") {
  std::istringstream empty("");
  const auto e = parse_capture(empty, 1);
  CHECK(e.frames.empty());
  CHECK(e.failures.empty());

  std::istringstream in(
      "CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,0,[1 2]\n"
      "boot: wifi init\n"
      "CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,100,[3 4]\r\n"
      "CSI_DATA,AA:BB:CC:DD:EE:FF,-42,6,200,[5 6]\n");
  const auto cap = parse_capture(in, 1);
  CHECK(cap.frames.size() == 3);
  CHECK(cap.count(ParseFailureKind::NotCsiLine) == 1);
  CHECK(cap.failures.front().line_number == 2);
  CHECK(cap.frames[2].timestamp_ms == 200);
  CHECK(cap.frames.size() + cap.failures.size() <= cap.lines);
}

TEST_CASE("write_capture then parse_capture is the identity on 1000 frames") {
  std::mt19937_64 gen(3);
  std::vector<CsiFrame> frames;
  for (int i = 0; i < 1000; ++i) frames.push_back(random_frame(gen, 64));
  std::stringstream text;
  write_capture(text, frames);
  const auto cap = parse_capture(text, 64);
  CHECK(cap.failures.empty());
  CHECK(cap.frames == frames);
}

TEST_CASE("write_capture refuses values the grammar cannot carry") {
  CsiFrame f;
  f.subcarriers.emplace_back(0.5, 0);
  CHECK_THROWS_AS(format_csi_line(f), std::invalid_argument);
  f.subcarriers[0] = ComplexSample(40000, 0);
  CHECK_THROWS_AS(format_csi_line(f), std::invalid_argument);
}

TEST_CASE("parser is total on random byte lines") {
  std::mt19937_64 gen(99);
  std::uniform_int_distribution<int> len(0, 200);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> pick(0, 3);
  const std::string alphabet = "CSI_DATA,:[]- 0123456789ABCDEFabcdef\r\t";
  std::size_t frames = 0, failures = 0;
  for (int i = 0; i < 100000; ++i) {
    std::string s;
    const int n = len(gen);
    const int mode = pick(gen);
    if (mode == 0) s = "CSI_DATA,";
    for (int j = 0; j < n; ++j) {
      s += mode < 2 ? alphabet[static_cast<std::size_t>(byte(gen)) % alphabet.size()] : static_cast<char>(byte(gen));
    }
    const auto r = parse(s, 1);
    (std::holds_alternative<CsiFrame>(r) ? frames : failures)++;
  }
  CHECK(frames + failures == 100000);
}

TEST_CASE("dataset csv roundtrip preserves every double") {
  std::mt19937_64 gen(5);
  Dataset ds;
  ds.features.resize(50, 6);
  for (Eigen::Index r = 0; r < 50; ++r) {
    for (Eigen::Index c = 0; c < 6; ++c) {
      std::uint64_t bits = gen();
      double v;
      std::memcpy(&v, &bits, sizeof v);
      if (!std::isfinite(v)) v = static_cast<double>(bits >> 11) * 1e-300;
      ds.features(r, c) = v;
    }
    ds.labels.push_back(kAllLabels[static_cast<std::size_t>(r % 3)]);
  }
  ds.features(0, 0) = -0.0;
  ds.features(0, 1) = std::numeric_limits<double>::denorm_min();
  ds.features(0, 2) = std::numeric_limits<double>::max();
  std::stringstream text;
  write_dataset(text, ds);
  const Dataset back = read_dataset(text);
  CHECK(back == ds);
  CHECK(std::signbit(back.features(0, 0)));
}

TEST_CASE("dataset errors name the row") {
  std::istringstream ragged("label,f0,f1\nClean,1,2\nClean,1\n");
  try {
    read_dataset(ragged);
    FAIL("expected an error");
  } catch (const DatasetError& e) {
    CHECK(e.kind() == DatasetError::Kind::WidthMismatch);
    CHECK(e.line() == 3);
  }
  std::istringstream label("label,f0\nMuddy,1\n");
  CHECK_THROWS_AS(read_dataset(label), DatasetError);
  std::istringstream header("lbl,f0\nClean,1\n");
  CHECK_THROWS_AS(read_dataset(header), DatasetError);
}

TEST_CASE("paper-shape dataset loads with the expected class counts") {
  const auto dir = temp_dir("ingest_paper_shape");
  const auto cfg = preset("paper-shape");
  REQUIRE(cfg);
  const SynthOutput s = generate(*cfg);
  write_dataset(s.dataset, dir / "full.csv");
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = load_dataset(dir / "full.csv");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(ds.size() == 5470);
  CHECK(ds.width() == 128);
  auto counts = ds.class_counts();
  CHECK(counts[ClassLabel::Clean] == 2644);
  CHECK(counts[ClassLabel::Toxic100ppm] + counts[ClassLabel::Toxic1000ppm] == 2826);
  CHECK(seconds < 1.0);
  CHECK(ds == s.dataset);
}

TEST_CASE("atomic write leaves no temporary behind") {
  const auto dir = temp_dir("ingest_atomic");
  write_file_atomic(dir / "out.txt", "hello\n");
  write_file_atomic(dir / "out.txt", "again\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  CHECK_THROWS_AS(load_dataset(dir / "missing.csv"), DatasetError);
}
