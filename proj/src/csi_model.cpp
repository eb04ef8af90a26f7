#include "csiwater/csi_model.hpp"

#include <charconv>
#include <stdexcept>

namespace csiwater {

std::string MacAddress::to_string() const {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(17);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i > 0) out.push_back(':');
    out.push_back(kHex[bytes[i] >> 4]);
    out.push_back(kHex[bytes[i] & 0xF]);
  }
  return out;
}

std::optional<MacAddress> MacAddress::parse(std::string_view text) {
  if (text.size() != 17) return std::nullopt;
  MacAddress mac;
  for (std::size_t i = 0; i < 6; ++i) {
    const std::size_t at = i * 3;
    if (i > 0 && text[at - 1] != ':') return std::nullopt;
    unsigned value = 0;
    for (std::size_t k = 0; k < 2; ++k) {
      const char c = text[at + k];
      unsigned digit;
      if (c >= '0' && c <= '9') {
        digit = static_cast<unsigned>(c - '0');
      } else if (c >= 'A' && c <= 'F') {
        digit = static_cast<unsigned>(c - 'A' + 10);
      } else if (c >= 'a' && c <= 'f') {
        digit = static_cast<unsigned>(c - 'a' + 10);
      } else {
        return std::nullopt;
      }
      value = value * 16 + digit;
    }
    mac.bytes[i] = static_cast<std::uint8_t>(value);
  }
  return mac;
}

ComplexSample::ComplexSample(double re, double im) : re_(re), im_(im) {
  if (!std::isfinite(re) || !std::isfinite(im)) {
    throw std::invalid_argument("ComplexSample: components must be finite");
  }
}

Eigen::VectorXd frame_amplitudes(const CsiFrame& frame) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(frame.width()));
  for (std::size_t i = 0; i < frame.width(); ++i) {
    out[static_cast<Eigen::Index>(i)] = amplitude(frame.subcarriers[i]);
  }
  return out;
}

Eigen::VectorXd frame_phases(const CsiFrame& frame) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(frame.width()));
  for (std::size_t i = 0; i < frame.width(); ++i) {
    out[static_cast<Eigen::Index>(i)] = phase(frame.subcarriers[i]).radians;
  }
  return out;
}

std::size_t count_degenerate_subcarriers(const CsiFrame& frame) {
  std::size_t n = 0;
  for (const auto& s : frame.subcarriers) n += phase(s).degenerate ? 1 : 0;
  return n;
}

std::string_view to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::Clean:
      return "Clean";
    case ClassLabel::Toxic100ppm:
      return "Toxic100ppm";
    case ClassLabel::Toxic1000ppm:
      return "Toxic1000ppm";
  }
  return "?";
}

std::optional<ClassLabel> parse_class_label(std::string_view text) {
  for (auto label : kAllLabels) {
    if (text == to_string(label)) return label;
  }
  return std::nullopt;
}

}  // namespace csiwater
