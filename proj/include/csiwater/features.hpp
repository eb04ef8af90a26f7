#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "csiwater/csi_model.hpp"
#include "csiwater/dataset.hpp"
#include "csiwater/preprocess.hpp"

namespace csiwater {

// Classifier input: n amplitudes followed by n phases.
struct FeatureVector {
  Eigen::VectorXd values;
  ClassLabel label = ClassLabel::Clean;
};

FeatureVector build_feature_vector(const CsiFrame& frame, const PreprocessConfig& cfg, ClassLabel label);

// Auxiliary per-frame amplitude statistics. Undefined ratios are empty.
struct CsiStats {
  std::optional<double> kurtosis;  // Pearson, normal -> 3; empty on zero variance
  double peak_value = 0.0;
  std::optional<double> impulse_factor;    // empty when mean |x| is 0
  std::optional<double> clearance_factor;  // empty when mean sqrt|x| is 0
  double time_domain_energy = 0.0;

  bool zero_variance() const { return !kurtosis.has_value(); }
  bool zero_mean() const { return !impulse_factor.has_value(); }
};

// Requires at least two values.
CsiStats csi_stats(const Eigen::Ref<const Eigen::VectorXd>& amplitudes);

// Throws std::invalid_argument when the vectors differ in width.
Dataset assemble_dataset(std::span<const FeatureVector> vectors);

struct FeaturizeSummary {
  std::size_t input_frames = 0;
  std::size_t foreign_mac = 0;
  std::size_t zero_subcarrier = 0;
  std::size_t outliers = 0;
  std::size_t kept = 0;
};

struct Featurized {
  std::vector<FeatureVector> vectors;
  FeaturizeSummary summary;
};

// MAC filter, optional null-subcarrier drop, outlier rejection, then feature
// extraction, in that order. Frames of one capture form one time series.
Featurized featurize_capture(std::span<const CsiFrame> frames, const PreprocessConfig& cfg, ClassLabel label);

}  // namespace csiwater
