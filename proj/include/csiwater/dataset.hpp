#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "csiwater/csi_model.hpp"

namespace csiwater {

// Labeled feature matrix; one sample per row, constant width.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<ClassLabel> labels;

  std::size_t size() const { return labels.size(); }
  Eigen::Index width() const { return features.cols(); }

  std::map<ClassLabel, std::size_t> class_counts() const {
    std::map<ClassLabel, std::size_t> counts;
    for (auto label : labels) ++counts[label];
    return counts;
  }

  bool operator==(const Dataset& other) const {
    return labels == other.labels && features.rows() == other.features.rows() &&
           features.cols() == other.features.cols() &&
           (features.array() == other.features.array()).all();
  }
};

}  // namespace csiwater
