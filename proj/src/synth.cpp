#include "csiwater/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "csiwater/features.hpp"
#include "csiwater/random.hpp"

namespace csiwater {

void SynthConfig::validate() const {
  if (n_subcarriers < 1) throw std::invalid_argument("synth: n_subcarriers must be >= 1");
  if (base_components < 0) throw std::invalid_argument("synth: base_components must be >= 0");
  if (!(base_magnitude > 0)) throw std::invalid_argument("synth: base_magnitude must be > 0");
  if (!(base_ripple >= 0 && base_ripple < 1)) throw std::invalid_argument("synth: base_ripple must be in [0, 1)");
  if (!(noise_sigma >= 0) || !(gain_sigma >= 0) || !std::isfinite(base_phase_ripple)) {
    throw std::invalid_argument("synth: noise_sigma and gain_sigma must be >= 0");
  }
  for (const auto& [label, p] : profiles) {
    if (!(p.attenuation > 0) || !std::isfinite(p.attenuation) || !std::isfinite(p.phase_slope)) {
      throw std::invalid_argument("synth: attenuation for " + std::string(to_string(label)) + " must be > 0");
    }
  }
}

ClassProfile SynthConfig::profile(ClassLabel label) const {
  auto it = profiles.find(label);
  return it == profiles.end() ? ClassProfile{} : it->second;
}

std::vector<CsiFrame> SynthOutput::frames_of(ClassLabel label) const {
  std::vector<CsiFrame> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (labels[i] == label) out.push_back(frames[i]);
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> base_response(const SynthConfig& config) {
  const int n = config.n_subcarriers;
  const int s = config.base_components;
  Rng rng = Rng::substream(config.seed, 0);
  std::vector<double> mag_phase(static_cast<std::size_t>(s)), ang_phase(static_cast<std::size_t>(s));
  for (int c = 0; c < s; ++c) {
    mag_phase[static_cast<std::size_t>(c)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    ang_phase[static_cast<std::size_t>(c)] = rng.uniform(0.0, 2.0 * std::numbers::pi);
  }
  std::vector<double> mag(static_cast<std::size_t>(n)), theta(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double rm = 0, rt = 0;
    for (int c = 0; c < s; ++c) {
      const double w = 2.0 * std::numbers::pi * (c + 1) * i / n;
      rm += std::sin(w + mag_phase[static_cast<std::size_t>(c)]);
      rt += std::sin(w + ang_phase[static_cast<std::size_t>(c)]);
    }
    if (s > 0) {
      rm /= s;
      rt /= s;
    }
    mag[static_cast<std::size_t>(i)] = config.base_magnitude * (1.0 + config.base_ripple * rm);
    theta[static_cast<std::size_t>(i)] = config.base_phase_ripple * rt;
  }
  return {mag, theta};
}

SynthOutput generate(const SynthConfig& config, const PreprocessConfig& features) {
  config.validate();
  const auto [mag, theta] = base_response(config);
  const int n = config.n_subcarriers;

  SynthOutput out;
  std::size_t total = 0;
  for (const auto& [label, count] : config.n_per_class) total += count;
  out.frames.reserve(total);
  out.labels.reserve(total);

  std::uint64_t frame_index = 0;
  for (ClassLabel label : kAllLabels) {
    auto it = config.n_per_class.find(label);
    if (it == config.n_per_class.end()) continue;
    const ClassProfile p = config.profile(label);
    for (std::size_t j = 0; j < it->second; ++j) {
      Rng rng = Rng::substream(config.seed, ++frame_index);
      const double g = std::exp(config.gain_sigma * rng.normal());
      CsiFrame f;
      f.timestamp_ms = static_cast<std::int64_t>(j) * 100;
      f.source_mac = config.mac;
      f.rssi_dbm = config.rssi_dbm;
      f.channel = config.channel;
      f.subcarriers.reserve(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const double m = p.attenuation * (g * mag[static_cast<std::size_t>(i)]);
        const double ang = theta[static_cast<std::size_t>(i)] + p.phase_slope * i;
        double re = m * std::cos(ang) + config.noise_sigma * rng.normal();
        double im = m * std::sin(ang) + config.noise_sigma * rng.normal();
        if (config.quantize) {
          re = std::clamp(std::round(re), -32768.0, 32767.0);
          im = std::clamp(std::round(im), -32768.0, 32767.0);
        }
        f.subcarriers.emplace_back(re, im);
      }
      out.frames.push_back(std::move(f));
      out.labels.push_back(label);
    }
  }

  std::vector<FeatureVector> vectors;
  vectors.reserve(out.frames.size());
  for (std::size_t i = 0; i < out.frames.size(); ++i) {
    vectors.push_back(build_feature_vector(out.frames[i], features, out.labels[i]));
  }
  out.dataset = assemble_dataset(vectors);
  return out;
}

std::vector<std::string> preset_names() { return {"high-contrast", "low-contrast", "null", "paper-shape"}; }

std::optional<SynthConfig> preset(std::string_view name) {
  SynthConfig c;
  if (name == "high-contrast") {
    // Adjacent attenuations differ by 0.3 * 20 = 6 amplitude units, 12 sigma.
    c.n_per_class = {{ClassLabel::Clean, 300}, {ClassLabel::Toxic100ppm, 300}, {ClassLabel::Toxic1000ppm, 300}};
    c.profiles = {{ClassLabel::Clean, {1.0, 0.0}},
                  {ClassLabel::Toxic100ppm, {0.7, 0.02}},
                  {ClassLabel::Toxic1000ppm, {0.4, 0.04}}};
    c.noise_sigma = 0.5;
    return c;
  }
  if (name == "low-contrast") {
    // Frame gain spread sets the Bayes error: Phi(-ln(1/0.8) / 2 / 0.0871) = 0.10.
    c.n_per_class = {{ClassLabel::Clean, 500}, {ClassLabel::Toxic100ppm, 500}};
    c.profiles = {{ClassLabel::Clean, {1.0, 0.0}}, {ClassLabel::Toxic100ppm, {0.8, 0.0}}};
    c.noise_sigma = 0.5;
    c.gain_sigma = 0.0871;
    return c;
  }
  if (name == "null") {
    c.n_per_class = {{ClassLabel::Clean, 200}, {ClassLabel::Toxic100ppm, 200}};
    c.profiles = {{ClassLabel::Clean, {1.0, 0.0}}, {ClassLabel::Toxic100ppm, {1.0, 0.0}}};
    c.noise_sigma = 0.5;
    return c;
  }
  if (name == "paper-shape") {
    // 2826 poisoned records split evenly between the two concentrations.
    c.n_per_class = {{ClassLabel::Clean, 2644}, {ClassLabel::Toxic100ppm, 1413}, {ClassLabel::Toxic1000ppm, 1413}};
    c.profiles = {{ClassLabel::Clean, {1.0, 0.0}},
                  {ClassLabel::Toxic100ppm, {0.85, 0.01}},
                  {ClassLabel::Toxic1000ppm, {0.7, 0.02}}};
    c.noise_sigma = 0.5;
    c.gain_sigma = 0.0871;
    return c;
  }
  return std::nullopt;
}

}  // namespace csiwater
