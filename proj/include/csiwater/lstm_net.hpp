#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace csiwater {

// Two stacked LSTM layers (the second keeps only its last hidden state),
// dropout, dense layer, softmax. Gate blocks are stacked i, f, g, o. Batches
// are columns.
template <typename Scalar>
struct LstmWeights {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix w1, u1, b1;
  Matrix w2, u2, b2;
  Matrix w_out, b_out;

  // f(tensor, is_regularized) over every parameter tensor.
  template <typename F>
  void for_each(F&& f) {
    f(w1, true);
    f(u1, true);
    f(b1, false);
    f(w2, true);
    f(u2, true);
    f(b2, false);
    f(w_out, true);
    f(b_out, false);
  }
  template <typename F>
  void for_each(F&& f) const {
    const_cast<LstmWeights*>(this)->for_each([&](const Matrix& m, bool reg) { f(m, reg); });
  }

  Eigen::Index input_dim() const { return w1.cols(); }
  Eigen::Index hidden1() const { return u1.cols(); }
  Eigen::Index hidden2() const { return u2.cols(); }
  Eigen::Index classes() const { return w_out.rows(); }

  LstmWeights zeros_like() const {
    LstmWeights z = *this;
    z.for_each([](Matrix& m, bool) { m.setZero(); });
    return z;
  }

  Eigen::Index parameter_count() const {
    Eigen::Index n = 0;
    for_each([&](const Matrix& m, bool) { n += m.size(); });
    return n;
  }

  Scalar squared_weight_norm() const {
    Scalar s = 0;
    for_each([&](const Matrix& m, bool reg) {
      if (reg) s += m.squaredNorm();
    });
    return s;
  }
};

template <typename Scalar>
struct LstmLayerTrace {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<Matrix> gates;   // activated i, f, g, o; 4H x B per step
  std::vector<Matrix> cell;    // H x B
  std::vector<Matrix> tanh_cell;
  std::vector<Matrix> hidden;
};

template <typename Scalar>
struct LstmTrace {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<Matrix> inputs;  // D x B per step
  LstmLayerTrace<Scalar> layer1;
  LstmLayerTrace<Scalar> layer2;
  Matrix features;  // last hidden state of layer 2 after dropout
  Matrix probs;     // K x B
};

namespace detail {

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

// Sample row entry (c * steps + t) feeds channel c at step t.
template <typename Scalar, typename Derived>
std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> split_steps(const Eigen::MatrixBase<Derived>& batch,
                                                                               Eigen::Index steps) {
  const Eigen::Index channels = batch.cols() / steps;
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> out(static_cast<std::size_t>(steps));
  for (Eigen::Index t = 0; t < steps; ++t) {
    auto& m = out[static_cast<std::size_t>(t)];
    m.resize(channels, batch.rows());
    for (Eigen::Index c = 0; c < channels; ++c) m.row(c) = batch.col(c * steps + t).transpose().template cast<Scalar>();
  }
  return out;
}

template <typename Scalar>
void layer_forward(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& w,
                   const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& u,
                   const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& b,
                   const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& inputs,
                   LstmLayerTrace<Scalar>& trace) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index h = u.cols();
  const Eigen::Index batch = inputs.front().cols();
  Matrix h_prev = Matrix::Zero(h, batch);
  Matrix c_prev = Matrix::Zero(h, batch);
  for (const auto& x : inputs) {
    Matrix z = w * x + u * h_prev;
    z.colwise() += b.col(0);
    z.topRows(2 * h) = z.topRows(2 * h).unaryExpr([](Scalar v) { return sigmoid(v); });
    z.middleRows(2 * h, h) = z.middleRows(2 * h, h).array().tanh();
    z.bottomRows(h) = z.bottomRows(h).unaryExpr([](Scalar v) { return sigmoid(v); });
    Matrix c = z.middleRows(h, h).cwiseProduct(c_prev) + z.topRows(h).cwiseProduct(z.middleRows(2 * h, h));
    Matrix tc = c.array().tanh();
    Matrix hid = z.bottomRows(h).cwiseProduct(tc);
    trace.gates.push_back(std::move(z));
    trace.cell.push_back(c);
    trace.tanh_cell.push_back(std::move(tc));
    trace.hidden.push_back(hid);
    h_prev = std::move(hid);
    c_prev = std::move(c);
  }
}

// Back-propagation through time. `dh` holds the loss gradient reaching each
// step's hidden output from above; returns gradients w.r.t. each step input.
template <typename Scalar>
std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> layer_backward(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& w,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& u,
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& inputs, const LstmLayerTrace<Scalar>& trace,
    const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& dh,
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& dw, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& du,
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& db) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index h = u.cols();
  const Eigen::Index batch = inputs.front().cols();
  const auto steps = inputs.size();
  std::vector<Matrix> dx(steps);
  Matrix dh_next = Matrix::Zero(h, batch);
  Matrix dc_next = Matrix::Zero(h, batch);
  Matrix dz(4 * h, batch);
  for (std::size_t s = steps; s-- > 0;) {
    const Matrix& z = trace.gates[s];
    const auto gi = z.topRows(h).array();
    const auto gf = z.middleRows(h, h).array();
    const auto gg = z.middleRows(2 * h, h).array();
    const auto go = z.bottomRows(h).array();
    const auto tc = trace.tanh_cell[s].array();
    const Matrix dhs = dh[s] + dh_next;
    const Matrix dc = (dhs.array() * go * (Scalar(1) - tc.square())).matrix() + dc_next;
    const Matrix c_prev = s > 0 ? trace.cell[s - 1] : Matrix::Zero(h, batch);
    const Matrix h_prev = s > 0 ? trace.hidden[s - 1] : Matrix::Zero(h, batch);

    dz.topRows(h) = dc.array() * gg * gi * (Scalar(1) - gi);
    dz.middleRows(h, h) = dc.array() * c_prev.array() * gf * (Scalar(1) - gf);
    dz.middleRows(2 * h, h) = dc.array() * gi * (Scalar(1) - gg.square());
    dz.bottomRows(h) = dhs.array() * tc * go * (Scalar(1) - go);
    dc_next = dc.array() * gf;

    dw.noalias() += dz * inputs[s].transpose();
    du.noalias() += dz * h_prev.transpose();
    db.col(0) += dz.rowwise().sum();
    dx[s].noalias() = w.transpose() * dz;
    dh_next.noalias() = u.transpose() * dz;
  }
  return dx;
}

}  // namespace detail

// Mean cross-entropy over the batch plus l2 * (sum of squared weights, biases
// excluded). `batch` rows are samples; `dropout_mask` (H2 x B, already scaled
// by 1/keep) is applied when non-null. Fills `grad` and `trace` when non-null.
template <typename Scalar, typename Derived>
Scalar lstm_loss(const LstmWeights<Scalar>& net, const Eigen::MatrixBase<Derived>& batch, std::span<const int> labels,
                 Eigen::Index steps, Scalar l2,
                 const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* dropout_mask,
                 LstmWeights<Scalar>* grad, LstmTrace<Scalar>* trace = nullptr) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  LstmTrace<Scalar> local;
  LstmTrace<Scalar>& tr = trace != nullptr ? *trace : local;
  tr = LstmTrace<Scalar>{};
  tr.inputs = detail::split_steps<Scalar>(batch, steps);
  detail::layer_forward(net.w1, net.u1, net.b1, tr.inputs, tr.layer1);
  detail::layer_forward(net.w2, net.u2, net.b2, tr.layer1.hidden, tr.layer2);
  tr.features = tr.layer2.hidden.back();
  if (dropout_mask != nullptr) tr.features.array() *= dropout_mask->array();

  Matrix logits = net.w_out * tr.features;
  logits.colwise() += net.b_out.col(0);
  const Eigen::Index b = logits.cols();
  Scalar loss = 0;
  tr.probs.resize(logits.rows(), b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const Scalar top = logits.col(j).maxCoeff();
    const auto e = (logits.col(j).array() - top).exp();
    const Scalar sum = e.sum();
    tr.probs.col(j) = e / sum;
    loss -= logits(labels[static_cast<std::size_t>(j)], j) - top - std::log(sum);
  }
  loss = loss / Scalar(b) + l2 * net.squared_weight_norm();
  if (grad == nullptr) return loss;

  *grad = net.zeros_like();
  Matrix dlogits = tr.probs;
  for (Eigen::Index j = 0; j < b; ++j) dlogits(labels[static_cast<std::size_t>(j)], j) -= Scalar(1);
  dlogits /= Scalar(b);
  grad->w_out.noalias() = dlogits * tr.features.transpose();
  grad->b_out.col(0) = dlogits.rowwise().sum();
  Matrix dfeat = net.w_out.transpose() * dlogits;
  if (dropout_mask != nullptr) dfeat.array() *= dropout_mask->array();

  std::vector<Matrix> dh2(tr.inputs.size(), Matrix::Zero(net.hidden2(), b));
  dh2.back() = dfeat;
  const auto dh1 = detail::layer_backward(net.w2, net.u2, tr.layer1.hidden, tr.layer2, dh2, grad->w2, grad->u2, grad->b2);
  detail::layer_backward(net.w1, net.u1, tr.inputs, tr.layer1, dh1, grad->w1, grad->u1, grad->b1);

  grad->w1 += Scalar(2) * l2 * net.w1;
  grad->u1 += Scalar(2) * l2 * net.u1;
  grad->w2 += Scalar(2) * l2 * net.w2;
  grad->u2 += Scalar(2) * l2 * net.u2;
  grad->w_out += Scalar(2) * l2 * net.w_out;
  return loss;
}

// Class probabilities (K x B) with dropout disabled.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> lstm_probabilities(const LstmWeights<Scalar>& net,
                                                                         const Eigen::MatrixBase<Derived>& batch,
                                                                         Eigen::Index steps) {
  std::vector<int> dummy(static_cast<std::size_t>(batch.rows()), 0);
  LstmTrace<Scalar> trace;
  lstm_loss<Scalar>(net, batch, dummy, steps, Scalar(0), nullptr, nullptr, &trace);
  return trace.probs;
}

}  // namespace csiwater
