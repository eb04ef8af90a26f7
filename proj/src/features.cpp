#include "csiwater/features.hpp"

#include <cmath>
#include <stdexcept>

namespace csiwater {

FeatureVector build_feature_vector(const CsiFrame& frame, const PreprocessConfig& cfg, ClassLabel label) {
  const auto n = static_cast<Eigen::Index>(frame.width());
  FeatureVector fv;
  fv.label = label;
  fv.values.resize(2 * n);
  fv.values.head(n) = frame_amplitudes(frame);
  const Eigen::VectorXd raw = frame_phases(frame);
  fv.values.tail(n) = cfg.sanitize_phase ? sanitize_phase(raw) : raw;
  return fv;
}

CsiStats csi_stats(const Eigen::Ref<const Eigen::VectorXd>& amplitudes) {
  const auto n = amplitudes.size();
  if (n < 2) throw std::invalid_argument("csi_stats needs at least two values");
  const double count = static_cast<double>(n);

  double sum = 0.0;
  double abs_sum = 0.0;
  double sqrt_sum = 0.0;
  CsiStats s;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = amplitudes[i];
    sum += x;
    abs_sum += std::abs(x);
    sqrt_sum += std::sqrt(std::abs(x));
    s.peak_value = std::max(s.peak_value, std::abs(x));
    s.time_domain_energy += x * x;
  }
  const double mean = sum / count;
  double m2 = 0.0;
  double m4 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = amplitudes[i] - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= count;
  m4 /= count;
  if (m2 > 0.0) s.kurtosis = m4 / (m2 * m2);
  if (abs_sum > 0.0) s.impulse_factor = s.peak_value / (abs_sum / count);
  if (sqrt_sum > 0.0) {
    const double root_mean = sqrt_sum / count;
    s.clearance_factor = s.peak_value / (root_mean * root_mean);
  }
  return s;
}

Dataset assemble_dataset(std::span<const FeatureVector> vectors) {
  Dataset ds;
  if (vectors.empty()) return ds;
  const auto width = vectors.front().values.size();
  ds.features.resize(static_cast<Eigen::Index>(vectors.size()), width);
  ds.labels.reserve(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].values.size() != width) {
      throw std::invalid_argument("feature vector " + std::to_string(i) + " has width " +
                                  std::to_string(vectors[i].values.size()) + ", expected " +
                                  std::to_string(width));
    }
    ds.features.row(static_cast<Eigen::Index>(i)) = vectors[i].values.transpose();
    ds.labels.push_back(vectors[i].label);
  }
  return ds;
}

Featurized featurize_capture(std::span<const CsiFrame> frames, const PreprocessConfig& cfg, ClassLabel label) {
  cfg.validate();
  Featurized out;
  out.summary.input_frames = frames.size();

  std::vector<CsiFrame> working;
  if (cfg.target_mac) {
    working = filter_by_mac(frames, *cfg.target_mac);
    out.summary.foreign_mac = frames.size() - working.size();
  } else {
    working.assign(frames.begin(), frames.end());
  }
  if (cfg.drop_zero_subcarrier_frames) {
    std::vector<CsiFrame> nonzero;
    for (auto& f : working) {
      if (count_degenerate_subcarriers(f) == 0) nonzero.push_back(std::move(f));
    }
    out.summary.zero_subcarrier = working.size() - nonzero.size();
    working = std::move(nonzero);
  }
  if (cfg.reject_outliers && !working.empty()) {
    auto split = reject_outlier_frames(working, cfg);
    out.summary.outliers = split.rejected.size();
    working = std::move(split.kept);
  }
  out.vectors.reserve(working.size());
  for (const auto& f : working) out.vectors.push_back(build_feature_vector(f, cfg, label));
  out.summary.kept = out.vectors.size();
  return out;
}

}  // namespace csiwater
