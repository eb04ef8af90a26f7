#include "csiwater/lstm.hpp"

#include <cmath>
#include <numeric>

namespace csiwater {
namespace {

using Matrix = Eigen::MatrixXd;

Matrix glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(-limit, limit);
  }
  return m;
}

// rows x cols with orthonormal columns (rows >= cols).
Matrix orthogonal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

Matrix lstm_bias(Eigen::Index hidden) {
  Matrix b = Matrix::Zero(4 * hidden, 1);
  b.middleRows(hidden, hidden).setOnes();
  return b;
}

}  // namespace

LstmWeights<double> lstm_init(Eigen::Index input_dim, Eigen::Index hidden1, Eigen::Index hidden2, Eigen::Index classes,
                              Rng& rng) {
  LstmWeights<double> w;
  w.w1 = glorot(4 * hidden1, input_dim, rng);
  w.u1 = orthogonal(4 * hidden1, hidden1, rng);
  w.b1 = lstm_bias(hidden1);
  w.w2 = glorot(4 * hidden2, hidden1, rng);
  w.u2 = orthogonal(4 * hidden2, hidden2, rng);
  w.b2 = lstm_bias(hidden2);
  w.w_out = glorot(classes, hidden2, rng);
  w.b_out = Matrix::Zero(classes, 1);
  return w;
}

LstmOptimizerState::LstmOptimizerState(const LstmConfig& config, const LstmWeights<double>& shape)
    : kind_(config.optimizer),
      beta1_(config.beta1),
      beta2_(config.beta2),
      epsilon_(config.epsilon),
      first_(shape.zeros_like()),
      second_(shape.zeros_like()) {}

void LstmOptimizerState::step(LstmWeights<double>& weights, const LstmWeights<double>& grad, double learn_rate) {
  ++step_count_;
  std::vector<Matrix*> w;
  std::vector<const Matrix*> g;
  std::vector<Matrix*> m;
  std::vector<Matrix*> v;
  weights.for_each([&](Matrix& t, bool) { w.push_back(&t); });
  grad.for_each([&](const Matrix& t, bool) { g.push_back(&t); });
  first_.for_each([&](Matrix& t, bool) { m.push_back(&t); });
  second_.for_each([&](Matrix& t, bool) { v.push_back(&t); });

  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (std::size_t i = 0; i < w.size(); ++i) {
    v[i]->array() = beta2_ * v[i]->array() + (1.0 - beta2_) * g[i]->array().square();
    if (kind_ == LstmOptimizer::Adam) {
      m[i]->array() = beta1_ * m[i]->array() + (1.0 - beta1_) * g[i]->array();
      w[i]->array() -= learn_rate * (m[i]->array() / c1) / ((v[i]->array() / c2).sqrt() + epsilon_);
    } else {
      w[i]->array() -= learn_rate * g[i]->array() / (v[i]->array().sqrt() + epsilon_);
    }
  }
}

Eigen::Index lstm_steps(LstmInputShape shape, Eigen::Index width) {
  if (shape == LstmInputShape::SingleStep) return 1;
  if (width % 2 != 0) throw LearnError(LearnError::Kind::InvalidInput, "subcarrier sequence input needs an even width");
  return width / 2;
}

std::vector<Prediction> LstmModel::predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.cols() != width) throw LearnError(LearnError::Kind::WidthMismatch, "LSTM query width mismatch");
  const Matrix input = normalization ? zscore_apply(x, *normalization) : Matrix(x);
  const Matrix probs = lstm_probabilities(weights, input, steps);
  std::vector<Prediction> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    auto& p = out[static_cast<std::size_t>(r)];
    p.scores = probs.col(r);
    p.label = classes[static_cast<std::size_t>(argmax(p.scores))];
  }
  return out;
}

LstmModel lstm_train(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y, const LstmConfig& config,
                     std::vector<LstmEpoch>* trace) {
  check_training_input(x, y);
  if (config.hidden1 < 1 || config.hidden2 < 1 || config.batch_size < 1 || config.max_epochs < 0 ||
      config.drop_period < 1 || !(config.dropout >= 0.0 && config.dropout < 1.0) || !(config.learn_rate > 0)) {
    throw LearnError(LearnError::Kind::InvalidInput, "invalid LSTM configuration");
  }
  auto enc = encode_labels(y);
  if (enc.classes.size() < 2) throw LearnError(LearnError::Kind::DegenerateClass, "LSTM needs at least two classes");

  LstmModel model;
  model.config = config;
  model.classes = enc.classes;
  model.width = x.cols();
  model.steps = lstm_steps(config.input_shape, x.cols());
  if (config.normalize) model.normalization = zscore_fit(x);
  const Matrix input = model.normalization ? zscore_apply(x, *model.normalization) : Matrix(x);

  Rng rng(config.seed);
  model.weights = lstm_init(x.cols() / model.steps, config.hidden1, config.hidden2,
                            static_cast<Eigen::Index>(enc.classes.size()), rng);
  LstmOptimizerState optimizer(config, model.weights);

  const auto n = static_cast<std::size_t>(x.rows());
  const auto batch_size = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);
  const double keep = 1.0 - config.dropout;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t global_batch = 0;
  LstmWeights<double> grad;
  Matrix batch;
  Matrix mask;
  std::vector<int> labels;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double lr = config.learn_rate * std::pow(config.drop_factor, epoch / config.drop_period);
    rng.shuffle(order.begin(), order.end());
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch_size, ++global_batch, ++batches) {
      const auto count = std::min(batch_size, n - start);
      batch.resize(static_cast<Eigen::Index>(count), input.cols());
      labels.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        batch.row(static_cast<Eigen::Index>(i)) = input.row(static_cast<Eigen::Index>(order[start + i]));
        labels[i] = enc.index[order[start + i]];
      }
      const Matrix* mask_ptr = nullptr;
      if (config.dropout > 0.0) {
        mask.resize(config.hidden2, static_cast<Eigen::Index>(count));
        for (Eigen::Index j = 0; j < mask.cols(); ++j) {
          for (Eigen::Index i = 0; i < mask.rows(); ++i) mask(i, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;
        }
        mask_ptr = &mask;
      }
      const double loss = lstm_loss<double>(model.weights, batch, labels, model.steps, config.l2, mask_ptr, &grad);
      if (!std::isfinite(loss)) {
        throw LearnError(LearnError::Kind::NonFiniteLoss,
                         "non-finite loss at batch " + std::to_string(global_batch), global_batch);
      }
      optimizer.step(model.weights, grad, lr);
      loss_sum += loss;
    }
    if (trace != nullptr) trace->push_back({loss_sum / static_cast<double>(std::max<std::size_t>(batches, 1)), lr});
  }
  return model;
}

}  // namespace csiwater
