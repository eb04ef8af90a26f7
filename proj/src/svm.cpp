#include "csiwater/svm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace csiwater {
namespace {

constexpr double kTau = 1e-12;

}  // namespace

Eigen::MatrixXd Kernel::gram(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b) const {
  Eigen::MatrixXd g = a * b.transpose();
  if (type == KernelType::Linear) return g;
  const Eigen::VectorXd an = a.rowwise().squaredNorm();
  const Eigen::RowVectorXd bn = b.rowwise().squaredNorm().transpose();
  g *= -2.0;
  g.colwise() += an;
  g.rowwise() += bn;
  return (-gamma * g.cwiseMax(0.0).array()).exp().matrix();
}

SmoSolution smo_solve(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& target,
                      const SvmParams& params, const SmoObserver& observer) {
  const Eigen::Index n = x.rows();
  const double c = params.C;
  const Eigen::VectorXd& y = target;
  const Eigen::MatrixXd k = params.kernel.gram(x, x);
  const Eigen::VectorXd kd = k.diagonal();

  SmoSolution sol;
  sol.alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd& a = sol.alpha;
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // Q alpha - 1

  const auto in_up = [&](Eigen::Index t) { return (y[t] > 0 && a[t] < c) || (y[t] < 0 && a[t] > 0); };
  const auto in_low = [&](Eigen::Index t) { return (y[t] > 0 && a[t] > 0) || (y[t] < 0 && a[t] < c); };
  const auto dual = [&] { return a.sum() - 0.5 * a.dot(grad + Eigen::VectorXd::Ones(n)); };

  const auto max_iter = static_cast<std::size_t>(std::max(params.max_passes, 1)) * static_cast<std::size_t>(n);
  for (;;) {
    // Working set: maximal violator i, then j by second-order gain.
    double g_max = -std::numeric_limits<double>::infinity();
    Eigen::Index i = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] > g_max) {
        g_max = -y[t] * grad[t];
        i = t;
      }
    }
    double g_min = std::numeric_limits<double>::infinity();
    Eigen::Index j = -1;
    double best_gain = std::numeric_limits<double>::infinity();
    if (i >= 0) {
      for (Eigen::Index t = 0; t < n; ++t) {
        if (!in_low(t)) continue;
        const double v = -y[t] * grad[t];
        g_min = std::min(g_min, v);
        const double diff = g_max - v;
        if (diff <= 0) continue;
        double quad = kd[i] + kd[t] - 2.0 * k(i, t);
        if (quad <= 0) quad = kTau;
        const double gain = -(diff * diff) / quad;
        if (gain < best_gain) {
          best_gain = gain;
          j = t;
        }
      }
    }
    if (i < 0 || j < 0 || g_max - g_min < params.tol) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= max_iter) break;

    const double old_i = a[i];
    const double old_j = a[j];
    const double qij = y[i] * y[j] * k(i, j);
    if (y[i] != y[j]) {
      double quad = kd[i] + kd[j] + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) {
          a[j] = 0;
          a[i] = diff;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = -diff;
      }
      if (diff > 0) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = c - diff;
        }
      } else if (a[j] > c) {
        a[j] = c;
        a[i] = c + diff;
      }
    } else {
      double quad = kd[i] + kd[j] - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) {
          a[i] = c;
          a[j] = sum - c;
        }
      } else if (a[j] < 0) {
        a[j] = 0;
        a[i] = sum;
      }
      if (sum > c) {
        if (a[j] > c) {
          a[j] = c;
          a[i] = sum - c;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = sum;
      }
    }
    const double di = a[i] - old_i;
    const double dj = a[j] - old_j;
    // Q(:, t) = y .* y[t] .* K(:, t)
    grad.array() += y.array() * (k.col(i).array() * (y[i] * di) + k.col(j).array() * (y[j] * dj));

    ++sol.iterations;
    if (observer) observer(sol.iterations, a);
    if (sol.iterations % static_cast<std::size_t>(n) == 0) sol.dual_objective.push_back(dual());
  }
  sol.dual_objective.push_back(dual());

  // Bias: mean over free vectors, else midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (a[t] >= c) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (a[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : 0.5 * (ub + lb);
  sol.bias = -rho;
  return sol;
}

Eigen::VectorXd BinarySvm::decision(const Eigen::Ref<const Eigen::MatrixXd>& x, const Kernel& kernel) const {
  if (support_vectors.rows() == 0) return Eigen::VectorXd::Constant(x.rows(), bias);
  return (kernel.gram(x, support_vectors) * coef).array() + bias;
}

bool SvmModel::converged() const {
  for (const auto& m : machines) {
    if (!m.converged) return false;
  }
  return true;
}

std::vector<Prediction> SvmModel::predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.cols() != width) throw LearnError(LearnError::Kind::WidthMismatch, "SVM query width mismatch");
  const auto n_classes = static_cast<Eigen::Index>(classes.size());
  Eigen::MatrixXd decisions(x.rows(), static_cast<Eigen::Index>(machines.size()));
  for (std::size_t m = 0; m < machines.size(); ++m) {
    decisions.col(static_cast<Eigen::Index>(m)) = machines[m].decision(x, params.kernel);
  }
  std::vector<Prediction> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    auto& p = out[static_cast<std::size_t>(r)];
    if (n_classes == 2) {
      const double d = decisions(r, 0);
      p.scores = Eigen::Vector2d(-d, d);
    } else {
      Eigen::VectorXd votes = Eigen::VectorXd::Zero(n_classes);
      Eigen::VectorXd margin = Eigen::VectorXd::Zero(n_classes);
      for (std::size_t m = 0; m < machines.size(); ++m) {
        const auto [lo, hi] = pairs[m];
        const double d = decisions(r, static_cast<Eigen::Index>(m));
        votes[d > 0 ? hi : lo] += 1.0;
        margin[hi] += d;
        margin[lo] -= d;
      }
      // Integer votes, vote ties settled by aggregate margin mapped into (0, 1).
      p.scores = votes.array() + 0.5 + 0.99 * margin.array().atan() / std::numbers::pi;
    }
    p.label = classes[static_cast<std::size_t>(argmax(p.scores))];
  }
  return out;
}

SvmModel svm_train(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y, const SvmParams& params) {
  check_training_input(x, y);
  if (!(params.C > 0) || !(params.tol > 0)) throw LearnError(LearnError::Kind::InvalidInput, "SVM needs C > 0, tol > 0");
  if (params.kernel.type == KernelType::Rbf && !(params.kernel.gamma > 0)) {
    throw LearnError(LearnError::Kind::InvalidInput, "rbf kernel needs gamma > 0");
  }
  auto enc = encode_labels(y);
  if (enc.classes.size() < 2) throw LearnError(LearnError::Kind::DegenerateClass, "SVM needs at least two classes");

  SvmModel model;
  model.params = params;
  model.classes = enc.classes;
  model.width = x.cols();
  const int n_classes = static_cast<int>(enc.classes.size());
  for (int lo = 0; lo < n_classes; ++lo) {
    for (int hi = lo + 1; hi < n_classes; ++hi) {
      std::vector<Eigen::Index> rows;
      for (std::size_t s = 0; s < enc.index.size(); ++s) {
        if (enc.index[s] == lo || enc.index[s] == hi) rows.push_back(static_cast<Eigen::Index>(s));
      }
      const Eigen::MatrixXd sub = x(rows, Eigen::all);
      Eigen::VectorXd target(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        target[static_cast<Eigen::Index>(r)] = enc.index[static_cast<std::size_t>(rows[r])] == hi ? 1.0 : -1.0;
      }
      const auto sol = smo_solve(sub, target, params);
      BinarySvm machine;
      machine.bias = sol.bias;
      machine.converged = sol.converged;
      std::vector<Eigen::Index> sv;
      for (Eigen::Index r = 0; r < sol.alpha.size(); ++r) {
        if (sol.alpha[r] > 0) sv.push_back(r);
      }
      machine.support_vectors = sub(sv, Eigen::all);
      machine.coef.resize(static_cast<Eigen::Index>(sv.size()));
      for (std::size_t s = 0; s < sv.size(); ++s) {
        machine.coef[static_cast<Eigen::Index>(s)] = sol.alpha[sv[s]] * target[sv[s]];
      }
      model.pairs.emplace_back(lo, hi);
      model.machines.push_back(std::move(machine));
    }
  }
  return model;
}

}  // namespace csiwater
