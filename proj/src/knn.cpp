#include "csiwater/knn.hpp"

#include <algorithm>
#include <numeric>

namespace csiwater {
namespace {

Eigen::MatrixXd centred_unit_rows(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  Eigen::MatrixXd out = m.colwise() - m.rowwise().mean();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm == 0.0) {
      throw LearnError(LearnError::Kind::ConstantVector,
                       "row " + std::to_string(i) + " has zero variance", static_cast<std::size_t>(i));
    }
    out.row(i) /= norm;
  }
  return out;
}

}  // namespace

EncodedLabels encode_labels(std::span<const int> labels) {
  EncodedLabels enc;
  enc.classes.assign(labels.begin(), labels.end());
  std::sort(enc.classes.begin(), enc.classes.end());
  enc.classes.erase(std::unique(enc.classes.begin(), enc.classes.end()), enc.classes.end());
  enc.index.reserve(labels.size());
  for (int label : labels) {
    const auto it = std::lower_bound(enc.classes.begin(), enc.classes.end(), label);
    enc.index.push_back(static_cast<int>(it - enc.classes.begin()));
  }
  return enc;
}

void check_training_input(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y) {
  if (x.rows() == 0 || x.cols() == 0) throw LearnError(LearnError::Kind::InvalidInput, "empty training set");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw LearnError(LearnError::Kind::InvalidInput, "feature rows and labels differ in count");
  }
  if (!x.allFinite()) throw LearnError(LearnError::Kind::InvalidInput, "non-finite training features");
}

KnnModel::KnnModel(KnnParams params, std::vector<int> classes, Eigen::MatrixXd train, std::vector<int> train_class)
    : params_(params), classes_(std::move(classes)), train_(std::move(train)), train_class_(std::move(train_class)) {
  if (params_.metric == KnnMetric::Correlation) unit_rows_ = centred_unit_rows(train_);
}

Eigen::MatrixXd KnnModel::distances(const Eigen::Ref<const Eigen::MatrixXd>& queries) const {
  if (queries.cols() != width()) throw LearnError(LearnError::Kind::WidthMismatch, "k-NN query width mismatch");
  if (params_.metric == KnnMetric::Correlation) {
    const Eigen::MatrixXd q = centred_unit_rows(queries);
    return (1.0 - (q * unit_rows_.transpose()).array()).cwiseMax(0.0).cwiseMin(2.0).matrix();
  }
  const Eigen::VectorXd qn = queries.rowwise().squaredNorm();
  const Eigen::RowVectorXd tn = train_.rowwise().squaredNorm().transpose();
  Eigen::MatrixXd d = -2.0 * queries * train_.transpose();
  d.colwise() += qn;
  d.rowwise() += tn;
  return d.cwiseMax(0.0).cwiseSqrt();
}

std::vector<Prediction> KnnModel::predict(const Eigen::Ref<const Eigen::MatrixXd>& queries) const {
  const Eigen::MatrixXd d = distances(queries);
  const auto n_train = static_cast<std::size_t>(train_.rows());
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(params_.k), n_train);
  const auto n_classes = static_cast<Eigen::Index>(classes_.size());
  std::vector<Prediction> out;
  out.reserve(static_cast<std::size_t>(queries.rows()));
  std::vector<std::size_t> order(n_train);
  for (Eigen::Index q = 0; q < d.rows(); ++q) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto row = d.row(q);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double da = row(static_cast<Eigen::Index>(a));
                        const double db = row(static_cast<Eigen::Index>(b));
                        return da < db || (da == db && a < b);
                      });
    Prediction p;
    p.scores = Eigen::VectorXd::Zero(n_classes);
    for (std::size_t i = 0; i < k; ++i) p.scores[train_class_[order[i]]] += 1.0 / static_cast<double>(k);
    p.label = classes_[static_cast<std::size_t>(argmax(p.scores))];
    out.push_back(std::move(p));
  }
  return out;
}

KnnModel knn_train(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y, const KnnParams& params) {
  check_training_input(x, y);
  if (params.k < 1 || static_cast<std::size_t>(params.k) > y.size()) {
    throw LearnError(LearnError::Kind::InvalidInput, "k must lie in [1, training size]");
  }
  if (params.metric == KnnMetric::Correlation && x.cols() < 2) {
    throw LearnError(LearnError::Kind::InvalidInput, "correlation metric needs width >= 2");
  }
  auto enc = encode_labels(y);
  return KnnModel(params, std::move(enc.classes), x, std::move(enc.index));
}

}  // namespace csiwater
