#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "csiwater/learn.hpp"

namespace csiwater {

struct AdaBoostParams {
  int n_learners = 466;
  int max_splits = 132;
  double learn_rate = 0.1241;

  bool operator==(const AdaBoostParams&) const = default;
};

// Internal node when feature >= 0; x[feature] <= threshold goes left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int class_index = 0;

  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  int predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  std::size_t split_count() const;
};

// Per-feature row order by ascending value, reused across boosting rounds.
struct SortedFeatures {
  std::vector<std::vector<int>> order;

  SortedFeatures() = default;
  explicit SortedFeatures(const Eigen::Ref<const Eigen::MatrixXd>& x);
};

// Weighted-Gini CART tree grown breadth-first: each layer's nodes are split in
// creation order until `max_splits` internal nodes exist or no split lowers
// impurity.
DecisionTree fit_tree(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> class_index, int n_classes,
                      std::span<const double> weights, int max_splits, const SortedFeatures* presorted = nullptr);

struct BoostRound {
  double weighted_error = 0.0;
  double alpha = 0.0;
  // Per-round factor of the multiclass exponential-loss bound.
  double normalizer = 1.0;
  double weight_sum = 1.0;
  double min_weight = 0.0;
};

struct AdaBoostModel {
  AdaBoostParams params;
  std::vector<int> classes;
  Eigen::Index width = 0;
  std::vector<DecisionTree> trees;
  std::vector<double> alphas;

  // Softmax of alpha-weighted votes.
  std::vector<Prediction> predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
};

// SAMME boosting. Stops early after a perfect round or at a round no better
// than chance (that round is discarded). Throws LearnError::WeakLearnerFailure
// when the first round cannot beat chance.
AdaBoostModel adaboost_train(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y,
                             const AdaBoostParams& params = {}, std::vector<BoostRound>* trace = nullptr);

}  // namespace csiwater
