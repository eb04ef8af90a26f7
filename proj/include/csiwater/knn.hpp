#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "csiwater/learn.hpp"

namespace csiwater {

enum class KnnMetric { Euclidean, Correlation };

struct KnnParams {
  int k = 1;
  KnnMetric metric = KnnMetric::Correlation;

  bool operator==(const KnnParams&) const = default;
};

// 1 - Pearson correlation of the two vectors, clamped to [0, 2].
// Throws LearnError::ConstantVector when either vector has zero variance.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar correlation_distance(const Eigen::MatrixBase<DerivedA>& u,
                                               const Eigen::MatrixBase<DerivedB>& v) {
  using Scalar = typename DerivedA::Scalar;
  const auto cu = (u.array() - u.mean()).matrix().eval();
  const auto cv = (v.array() - v.mean()).matrix().eval();
  const Scalar nu = cu.norm();
  const Scalar nv = cv.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) {
    throw LearnError(LearnError::Kind::ConstantVector, "correlation distance of a constant vector");
  }
  const Scalar d = Scalar(1) - cu.dot(cv) / (nu * nv);
  return std::clamp(d, Scalar(0), Scalar(2));
}

class KnnModel {
 public:
  KnnModel() = default;
  // Throws LearnError::ConstantVector for a zero-variance row under the
  // correlation metric.
  KnnModel(KnnParams params, std::vector<int> classes, Eigen::MatrixXd train, std::vector<int> train_class);

  const KnnParams& params() const { return params_; }
  const std::vector<int>& classes() const { return classes_; }
  const Eigen::MatrixXd& train() const { return train_; }
  const std::vector<int>& train_class() const { return train_class_; }
  Eigen::Index width() const { return train_.cols(); }

  // Distances from each query row to every training row.
  Eigen::MatrixXd distances(const Eigen::Ref<const Eigen::MatrixXd>& queries) const;
  std::vector<Prediction> predict(const Eigen::Ref<const Eigen::MatrixXd>& queries) const;

 private:
  KnnParams params_;
  std::vector<int> classes_;
  Eigen::MatrixXd train_;
  std::vector<int> train_class_;
  Eigen::MatrixXd unit_rows_;  // centred, unit-norm rows for the correlation metric
};

KnnModel knn_train(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y, const KnnParams& params = {});

}  // namespace csiwater
