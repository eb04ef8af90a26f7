#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csiwater/learn.hpp"

namespace csiwater {

enum class KernelType { Linear, Rbf };

struct Kernel {
  KernelType type = KernelType::Linear;
  double gamma = 1.0;  // rbf: exp(-gamma * |a - b|^2)

  template <typename DerivedA, typename DerivedB>
  double operator()(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) const {
    if (type == KernelType::Linear) return a.dot(b);
    return std::exp(-gamma * (a - b).squaredNorm());
  }

  // Gram matrix between the rows of `a` and the rows of `b`.
  Eigen::MatrixXd gram(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b) const;

  bool operator==(const Kernel&) const = default;
};

struct SvmParams {
  Kernel kernel;
  double C = 1.0;
  double tol = 1e-3;
  // Iteration cap is max_passes * training size.
  int max_passes = 1000;

  bool operator==(const SvmParams&) const = default;
};

// Dual solution of one two-class problem, targets in {-1, +1}.
struct SmoSolution {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  // Dual objective sum(alpha) - alpha'Qalpha/2 at the end of each pass.
  std::vector<double> dual_objective;
};

using SmoObserver = std::function<void(std::size_t iteration, const Eigen::VectorXd& alpha)>;

SmoSolution smo_solve(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& target,
                      const SvmParams& params, const SmoObserver& observer = {});

struct BinarySvm {
  Eigen::MatrixXd support_vectors;
  Eigen::VectorXd coef;  // alpha_i * y_i
  double bias = 0.0;
  bool converged = true;

  Eigen::VectorXd decision(const Eigen::Ref<const Eigen::MatrixXd>& x, const Kernel& kernel) const;
};

// One-vs-one ensemble. Machine for class pair (a, b), a < b, is positive for b.
struct SvmModel {
  SvmParams params;
  std::vector<int> classes;
  std::vector<std::pair<int, int>> pairs;  // class indices
  std::vector<BinarySvm> machines;
  Eigen::Index width = 0;

  // False when any machine hit the iteration cap; its last iterate is kept.
  bool converged() const;
  std::vector<Prediction> predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
};

SvmModel svm_train(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y, const SvmParams& params = {});

}  // namespace csiwater
