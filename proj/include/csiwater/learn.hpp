#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace csiwater {

class LearnError : public std::runtime_error {
 public:
  enum class Kind {
    InvalidInput,
    WidthMismatch,
    ConstantVector,
    DegenerateClass,
    WeakLearnerFailure,
    NonFiniteLoss,
  };

  LearnError(Kind kind, const std::string& message, std::size_t index = 0)
      : std::runtime_error(message), kind_(kind), index_(index) {}

  Kind kind() const { return kind_; }
  // Offending row or batch, where applicable.
  std::size_t index() const { return index_; }

 private:
  Kind kind_;
  std::size_t index_;
};

struct Prediction {
  int label = 0;
  // One entry per model class, in class-list order.
  Eigen::VectorXd scores;
};

// First maximal entry.
inline Eigen::Index argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// Sorted distinct labels plus each sample's position in that list.
struct EncodedLabels {
  std::vector<int> classes;
  std::vector<int> index;
};

EncodedLabels encode_labels(std::span<const int> labels);

// Shared precondition check: matching sizes, non-empty, finite features.
void check_training_input(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y);

}  // namespace csiwater
