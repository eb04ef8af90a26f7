#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csiwater/csi_model.hpp"
#include "csiwater/dataset.hpp"
#include "csiwater/preprocess.hpp"

namespace csiwater {

struct ClassProfile {
  double attenuation = 1.0;  // a_c > 0
  double phase_slope = 0.0;  // radians per subcarrier index

  bool operator==(const ClassProfile&) const = default;
};

// Subcarrier i of a class-c frame is
//   a_c * g * B(i) * exp(j (theta(i) + phi_c * i)) + complex AWGN,
// with B, theta a smooth base response shared by all classes and g a
// per-frame log-normal gain (1 when gain_sigma = 0).
struct SynthConfig {
  std::map<ClassLabel, std::size_t> n_per_class;
  std::map<ClassLabel, ClassProfile> profiles;  // absent label: unit profile
  int n_subcarriers = kDefaultSubcarriers;
  double base_magnitude = 20.0;
  int base_components = 3;         // sinusoids in B and theta
  double base_ripple = 0.3;        // relative, in [0, 1)
  double base_phase_ripple = 0.5;  // radians
  double noise_sigma = 0.5;        // per real component
  double gain_sigma = 0.0;
  bool quantize = true;  // round samples to integers so captures are exact
  MacAddress mac{{0x24, 0x0A, 0xC4, 0x00, 0x00, 0x01}};
  int channel = 6;
  int rssi_dbm = -45;
  std::uint64_t seed = 1;

  // Throws std::invalid_argument.
  void validate() const;
  ClassProfile profile(ClassLabel label) const;

  bool operator==(const SynthConfig&) const = default;
};

struct SynthOutput {
  // Frames grouped by class in Clean, Toxic100ppm, Toxic1000ppm order,
  // timestamps advancing 100 ms within each class.
  std::vector<CsiFrame> frames;
  std::vector<ClassLabel> labels;
  // One row per frame, same order.
  Dataset dataset;

  std::vector<CsiFrame> frames_of(ClassLabel label) const;
};

// Frame f draws from its own substream, so output does not depend on
// generation order.
SynthOutput generate(const SynthConfig& config, const PreprocessConfig& features = {});

// Base magnitude B(i) and phase theta(i) for the config's seed.
std::pair<std::vector<double>, std::vector<double>> base_response(const SynthConfig& config);

std::vector<std::string> preset_names();
std::optional<SynthConfig> preset(std::string_view name);

}  // namespace csiwater
