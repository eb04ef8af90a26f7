#pragma once

#include <optional>
#include <span>

#include <Eigen/Dense>

namespace csiwater {

// Percentages in [0, 100]. A rate is empty when its denominator class is
// absent from the truth vector; f1 is empty only when TP = FP = FN = 0.
struct Metrics {
  std::optional<double> auc;
  std::optional<double> tpr;
  std::optional<double> tnr;
  std::optional<double> f1;
  double accuracy = 0.0;
};

// Mann-Whitney statistic with midranks, as a fraction in [0, 1].
// Empty when either side is empty.
std::optional<double> rank_auc(std::span<const double> positive, std::span<const double> negative);

// truth/predicted: nonzero marks the positive (poisoned) class.
Metrics binary_metrics(std::span<const int> truth, std::span<const int> predicted, std::span<const double> scores);

// truth/predicted hold class indices in [0, K); scores is n x K.
// Accuracy is overall; the rest are macro one-vs-rest averages over the
// classes where the value is defined.
Metrics multiclass_metrics(std::span<const int> truth, std::span<const int> predicted,
                           const Eigen::Ref<const Eigen::MatrixXd>& scores);

}  // namespace csiwater
