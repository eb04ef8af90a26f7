#include "csiwater/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace csiwater {

std::optional<double> rank_auc(std::span<const double> positive, std::span<const double> negative) {
  if (positive.empty() || negative.empty()) return std::nullopt;
  const std::size_t n = positive.size() + negative.size();
  std::vector<std::pair<double, bool>> all;
  all.reserve(n);
  for (double s : positive) all.emplace_back(s, true);
  for (double s : negative) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && all[j].first == all[i].first) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
    for (std::size_t t = i; t < j; ++t) {
      if (all[t].second) rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(positive.size());
  const double q = static_cast<double>(negative.size());
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

Metrics binary_metrics(std::span<const int> truth, std::span<const int> predicted, std::span<const double> scores) {
  if (truth.empty() || truth.size() != predicted.size() || truth.size() != scores.size()) {
    throw std::invalid_argument("binary_metrics: inputs must be non-empty and equally sized");
  }
  double tp = 0, tn = 0, fp = 0, fn = 0;
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] != 0;
    const bool p = predicted[i] != 0;
    if (t && p) ++tp;
    if (t && !p) ++fn;
    if (!t && p) ++fp;
    if (!t && !p) ++tn;
    (t ? pos : neg).push_back(scores[i]);
  }
  Metrics m;
  m.accuracy = 100.0 * (tp + tn) / static_cast<double>(truth.size());
  if (tp + fn > 0) m.tpr = 100.0 * tp / (tp + fn);
  if (tn + fp > 0) m.tnr = 100.0 * tn / (tn + fp);
  if (2 * tp + fp + fn > 0) m.f1 = 100.0 * 2 * tp / (2 * tp + fp + fn);
  if (auto a = rank_auc(pos, neg)) m.auc = 100.0 * *a;
  return m;
}

Metrics multiclass_metrics(std::span<const int> truth, std::span<const int> predicted,
                           const Eigen::Ref<const Eigen::MatrixXd>& scores) {
  const std::size_t n = truth.size();
  if (n == 0 || predicted.size() != n || static_cast<std::size_t>(scores.rows()) != n) {
    throw std::invalid_argument("multiclass_metrics: inputs must be non-empty and equally sized");
  }
  const auto k = scores.cols();
  if (k < 2) throw std::invalid_argument("multiclass_metrics: need at least two classes");

  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) correct += truth[i] == predicted[i];

  struct Mean {
    double sum = 0;
    int count = 0;
    void add(const std::optional<double>& v) {
      if (v) sum += *v, ++count;
    }
    std::optional<double> get() const { return count ? std::optional<double>(sum / count) : std::nullopt; }
  } auc, tpr, tnr, f1;

  std::vector<int> t(n), p(n);
  std::vector<double> s(n);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = truth[i] == c;
      p[i] = predicted[i] == c;
      s[i] = scores(static_cast<Eigen::Index>(i), c);
    }
    const Metrics one = binary_metrics(t, p, s);
    auc.add(one.auc);
    tpr.add(one.tpr);
    tnr.add(one.tnr);
    f1.add(one.f1);
  }
  Metrics m;
  m.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(n);
  m.auc = auc.get();
  m.tpr = tpr.get();
  m.tnr = tnr.get();
  m.f1 = f1.get();
  return m;
}

}  // namespace csiwater
