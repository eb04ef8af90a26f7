#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "csiwater/learn.hpp"
#include "csiwater/lstm_net.hpp"
#include "csiwater/preprocess.hpp"
#include "csiwater/random.hpp"

namespace csiwater {

enum class LstmInputShape {
  SubcarrierSequence,  // width/2 steps of (amplitude_i, phase_i)
  SingleStep,          // one step carrying the whole vector
};

enum class LstmOptimizer { Adam, RmsProp };

struct LstmConfig {
  int hidden1 = 200;
  int hidden2 = 100;
  double dropout = 0.5;
  double l2 = 5e-4;
  double learn_rate = 1e-3;
  int drop_period = 2;  // epochs between learning-rate drops
  double drop_factor = 0.1;
  int batch_size = 150;
  int max_epochs = 50;
  double beta1 = 0.9;
  double beta2 = 0.9;  // squared-gradient decay
  double epsilon = 1e-8;
  LstmOptimizer optimizer = LstmOptimizer::Adam;
  LstmInputShape input_shape = LstmInputShape::SubcarrierSequence;
  bool normalize = true;  // z-score fitted on the training rows
  std::uint64_t seed = 0;

  bool operator==(const LstmConfig&) const = default;
};

// Glorot-uniform input and output weights, orthogonal recurrent weights,
// zero biases except forget gates at 1.
LstmWeights<double> lstm_init(Eigen::Index input_dim, Eigen::Index hidden1, Eigen::Index hidden2,
                              Eigen::Index classes, Rng& rng);

class LstmOptimizerState {
 public:
  LstmOptimizerState(const LstmConfig& config, const LstmWeights<double>& shape);
  void step(LstmWeights<double>& weights, const LstmWeights<double>& grad, double learn_rate);

 private:
  LstmOptimizer kind_;
  double beta1_, beta2_, epsilon_;
  long step_count_ = 0;
  LstmWeights<double> first_, second_;
};

struct LstmModel {
  LstmConfig config;
  std::vector<int> classes;
  Eigen::Index width = 0;
  Eigen::Index steps = 1;
  std::optional<ZScore> normalization;
  LstmWeights<double> weights;

  std::vector<Prediction> predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
};

struct LstmEpoch {
  double mean_loss = 0.0;
  double learn_rate = 0.0;
};

Eigen::Index lstm_steps(LstmInputShape shape, Eigen::Index width);

// Deterministic for a fixed config.seed. Throws LearnError::NonFiniteLoss
// with the global batch index when a batch loss is not finite.
LstmModel lstm_train(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y, const LstmConfig& config = {},
                     std::vector<LstmEpoch>* trace = nullptr);

}  // namespace csiwater
