#include "csiwater/adaboost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace csiwater {
namespace {

int majority(const std::vector<double>& counts) {
  int best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

double purity_score(const std::vector<double>& counts, double total) {
  double s = 0.0;
  for (double c : counts) s += c * c;
  return s / total;
}

}  // namespace

int DecisionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int at = 0;
  while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(at)];
    at = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(at)].class_index;
}

std::size_t DecisionTree::split_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature >= 0; }));
}

SortedFeatures::SortedFeatures(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  order.resize(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    auto& o = order[static_cast<std::size_t>(f)];
    o.resize(static_cast<std::size_t>(x.rows()));
    std::iota(o.begin(), o.end(), 0);
    std::stable_sort(o.begin(), o.end(), [&](int a, int b) { return x(a, f) < x(b, f); });
  }
}

DecisionTree fit_tree(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> class_index, int n_classes,
                      std::span<const double> weights, int max_splits, const SortedFeatures* presorted) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto k = static_cast<std::size_t>(n_classes);
  SortedFeatures local;
  if (presorted == nullptr) {
    local = SortedFeatures(x);
    presorted = &local;
  }

  DecisionTree tree;
  std::vector<std::vector<double>> counts;
  std::vector<double> totals;
  std::vector<int> node_of(n, 0);

  tree.nodes.emplace_back();
  counts.emplace_back(k, 0.0);
  totals.push_back(0.0);
  for (std::size_t s = 0; s < n; ++s) {
    counts[0][static_cast<std::size_t>(class_index[s])] += weights[s];
    totals[0] += weights[s];
  }

  std::vector<int> frontier{0};
  int splits = 0;
  while (!frontier.empty() && splits < max_splits) {
    std::vector<int> slot_of(tree.nodes.size(), -1);
    std::vector<int> candidates;
    for (int node : frontier) {
      const auto& c = counts[static_cast<std::size_t>(node)];
      const auto occupied = std::count_if(c.begin(), c.end(), [](double v) { return v > 0.0; });
      if (occupied > 1) {
        slot_of[static_cast<std::size_t>(node)] = static_cast<int>(candidates.size());
        candidates.push_back(node);
      }
    }
    if (candidates.empty()) break;

    const auto m = candidates.size();
    std::vector<double> best_score(m, -std::numeric_limits<double>::infinity());
    std::vector<int> best_feature(m, -1);
    std::vector<double> best_threshold(m, 0.0);
    std::vector<double> left(m * k);
    std::vector<double> left_weight(m);
    std::vector<double> last(m);
    std::vector<char> seen(m);

    for (std::size_t f = 0; f < presorted->order.size(); ++f) {
      std::fill(left.begin(), left.end(), 0.0);
      std::fill(left_weight.begin(), left_weight.end(), 0.0);
      std::fill(seen.begin(), seen.end(), 0);
      for (int s : presorted->order[f]) {
        const int slot = slot_of[static_cast<std::size_t>(node_of[static_cast<std::size_t>(s)])];
        if (slot < 0) continue;
        const auto sl = static_cast<std::size_t>(slot);
        const double v = x(s, static_cast<Eigen::Index>(f));
        if (seen[sl] && v > last[sl]) {
          const auto node = static_cast<std::size_t>(candidates[sl]);
          const double wl = left_weight[sl];
          const double wr = totals[node] - wl;
          if (wl > 0.0 && wr > 0.0) {
            double sl2 = 0.0;
            double sr2 = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
              const double lc = left[sl * k + c];
              const double rc = counts[node][c] - lc;
              sl2 += lc * lc;
              sr2 += rc * rc;
            }
            const double score = sl2 / wl + sr2 / wr;
            if (score > best_score[sl]) {
              best_score[sl] = score;
              best_feature[sl] = static_cast<int>(f);
              double threshold = 0.5 * (last[sl] + v);
              if (threshold >= v) threshold = last[sl];
              best_threshold[sl] = threshold;
            }
          }
        }
        const double w = weights[static_cast<std::size_t>(s)];
        left[sl * k + static_cast<std::size_t>(class_index[static_cast<std::size_t>(s)])] += w;
        left_weight[sl] += w;
        last[sl] = v;
        seen[sl] = 1;
      }
    }

    std::vector<int> next;
    for (std::size_t sl = 0; sl < m && splits < max_splits; ++sl) {
      const auto node = static_cast<std::size_t>(candidates[sl]);
      if (best_feature[sl] < 0) continue;
      const double gain = best_score[sl] - purity_score(counts[node], totals[node]);
      if (!(gain > 1e-12 * totals[node])) continue;
      const int l = static_cast<int>(tree.nodes.size());
      tree.nodes[node].feature = best_feature[sl];
      tree.nodes[node].threshold = best_threshold[sl];
      tree.nodes[node].left = l;
      tree.nodes[node].right = l + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      counts.emplace_back(k, 0.0);
      counts.emplace_back(k, 0.0);
      totals.push_back(0.0);
      totals.push_back(0.0);
      next.push_back(l);
      next.push_back(l + 1);
      ++splits;
    }
    for (std::size_t s = 0; s < n; ++s) {
      const auto& node = tree.nodes[static_cast<std::size_t>(node_of[s])];
      if (node.feature < 0) continue;
      const int child = x(static_cast<Eigen::Index>(s), node.feature) <= node.threshold ? node.left : node.right;
      node_of[s] = child;
      counts[static_cast<std::size_t>(child)][static_cast<std::size_t>(class_index[s])] += weights[s];
      totals[static_cast<std::size_t>(child)] += weights[s];
    }
    frontier = std::move(next);
  }

  for (std::size_t i = 0; i < tree.nodes.size(); ++i) tree.nodes[i].class_index = majority(counts[i]);
  return tree;
}

std::vector<Prediction> AdaBoostModel::predict(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.cols() != width) throw LearnError(LearnError::Kind::WidthMismatch, "AdaBoost query width mismatch");
  const auto n_classes = static_cast<Eigen::Index>(classes.size());
  std::vector<Prediction> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Eigen::VectorXd votes = Eigen::VectorXd::Zero(n_classes);
    for (std::size_t t = 0; t < trees.size(); ++t) votes[trees[t].predict(x.row(r))] += alphas[t];
    const Eigen::VectorXd e = (votes.array() - votes.maxCoeff()).exp();
    auto& p = out[static_cast<std::size_t>(r)];
    p.scores = e / e.sum();
    p.label = classes[static_cast<std::size_t>(argmax(p.scores))];
  }
  return out;
}

AdaBoostModel adaboost_train(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y,
                             const AdaBoostParams& params, std::vector<BoostRound>* trace) {
  check_training_input(x, y);
  if (params.n_learners < 1 || params.max_splits < 1 || !(params.learn_rate > 0)) {
    throw LearnError(LearnError::Kind::InvalidInput, "AdaBoost needs learners >= 1, splits >= 1, rate > 0");
  }
  auto enc = encode_labels(y);
  const auto n_classes = static_cast<int>(enc.classes.size());
  if (n_classes < 2) throw LearnError(LearnError::Kind::DegenerateClass, "AdaBoost needs at least two classes");

  AdaBoostModel model;
  model.params = params;
  model.classes = enc.classes;
  model.width = x.cols();

  const auto n = static_cast<std::size_t>(x.rows());
  const double kk = n_classes;
  const double chance_error = 1.0 - 1.0 / kk;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<char> miss(n);
  const SortedFeatures sorted(x);

  for (int round = 0; round < params.n_learners; ++round) {
    DecisionTree tree = fit_tree(x, enc.index, n_classes, w, params.max_splits, &sorted);
    double error = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      miss[s] = tree.predict(x.row(static_cast<Eigen::Index>(s))) != enc.index[s];
      if (miss[s]) error += w[s];
    }
    if (error >= chance_error) {
      if (round == 0) {
        throw LearnError(LearnError::Kind::WeakLearnerFailure, "first weak learner does not beat chance");
      }
      break;
    }
    const double clipped = std::max(error, 1e-10);
    const double alpha = params.learn_rate * (std::log((1.0 - clipped) / clipped) + std::log(kk - 1.0));
    const double normalizer = (1.0 - error) * std::exp(-alpha * (kk - 1.0) / kk) + error * std::exp(alpha / kk);

    const double boost = std::exp(alpha);
    double sum = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (miss[s]) w[s] *= boost;
      sum += w[s];
    }
    for (auto& v : w) v /= sum;

    model.trees.push_back(std::move(tree));
    model.alphas.push_back(alpha);
    if (trace != nullptr) {
      trace->push_back({error, alpha, normalizer, std::accumulate(w.begin(), w.end(), 0.0),
                        *std::min_element(w.begin(), w.end())});
    }
    if (error == 0.0) break;
  }
  return model;
}

}  // namespace csiwater
