#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace csiwater {

inline constexpr std::size_t kDefaultSubcarriers = 64;

struct MacAddress {
  std::array<std::uint8_t, 6> bytes{};

  auto operator<=>(const MacAddress&) const = default;

  // Uppercase `XX:XX:XX:XX:XX:XX`.
  std::string to_string() const;
  // Accepts upper or lower case hex; exactly six colon-separated octets.
  static std::optional<MacAddress> parse(std::string_view text);
};

// One subcarrier's channel estimate. Components are always finite.
class ComplexSample {
 public:
  constexpr ComplexSample() = default;
  // Throws std::invalid_argument when either component is NaN or infinite.
  ComplexSample(double re, double im);

  double re() const { return re_; }
  double im() const { return im_; }

  bool operator==(const ComplexSample&) const = default;

 private:
  double re_ = 0.0;
  double im_ = 0.0;
};

template <typename Scalar>
Scalar amplitude(Scalar re, Scalar im) {
  return std::hypot(re, im);
}

// Two-argument arctangent mapped onto (-pi, pi]. The origin maps to 0.
template <typename Scalar>
Scalar phase(Scalar re, Scalar im) {
  if (re == Scalar(0) && im == Scalar(0)) return Scalar(0);
  const Scalar p = std::atan2(im, re);
  return p <= -std::numbers::pi_v<Scalar> ? std::numbers::pi_v<Scalar> : p;
}

struct Phase {
  double radians = 0.0;
  // Set for the zero sample, whose angle is undefined.
  bool degenerate = false;
};

inline double amplitude(const ComplexSample& s) { return amplitude(s.re(), s.im()); }

inline Phase phase(const ComplexSample& s) {
  return {phase(s.re(), s.im()), s.re() == 0.0 && s.im() == 0.0};
}

struct CsiFrame {
  std::int64_t timestamp_ms = 0;
  MacAddress source_mac;
  int rssi_dbm = 0;
  int channel = 0;
  std::vector<ComplexSample> subcarriers;

  std::size_t width() const { return subcarriers.size(); }
  bool operator==(const CsiFrame&) const = default;
};

Eigen::VectorXd frame_amplitudes(const CsiFrame& frame);
Eigen::VectorXd frame_phases(const CsiFrame& frame);
std::size_t count_degenerate_subcarriers(const CsiFrame& frame);

enum class ClassLabel { Clean = 0, Toxic100ppm = 1, Toxic1000ppm = 2 };

inline constexpr std::array<ClassLabel, 3> kAllLabels = {
    ClassLabel::Clean, ClassLabel::Toxic100ppm, ClassLabel::Toxic1000ppm};

std::string_view to_string(ClassLabel label);
std::optional<ClassLabel> parse_class_label(std::string_view text);

// Binary detection view: both toxic levels count as poisoned.
constexpr bool is_poisoned(ClassLabel label) { return label != ClassLabel::Clean; }

}  // namespace csiwater
