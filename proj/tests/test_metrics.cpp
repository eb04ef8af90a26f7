#include "doctest.h"

#include <cmath>
#include <random>

#include "csiwater/metrics.hpp"

using namespace csiwater;

namespace {

double all_pairs_auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  double s = 0;
  for (double p : pos) {
    for (double n : neg) s += p > n ? 1.0 : p == n ? 0.5 : 0.0;
  }
  return s / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

}  // namespace

TEST_CASE("perfect binary predictions") {
  std::vector<int> t{1, 1, 0, 0}, p{1, 1, 0, 0};
  std::vector<double> s{0.9, 0.8, 0.2, 0.1};
  const Metrics m = binary_metrics(t, p, s);
  CHECK(*m.auc == 100);
  CHECK(*m.tpr == 100);
  CHECK(*m.tnr == 100);
  CHECK(*m.f1 == 100);
  CHECK(m.accuracy == 100);
}

TEST_CASE("hand-counted confusion table") {
  std::vector<int> t{1, 1, 0, 0, 1, 0}, p{1, 0, 1, 0, 1, 0};
  std::vector<double> s(6, 0.5);
  const Metrics m = binary_metrics(t, p, s);
  CHECK(*m.tpr == doctest::Approx(200.0 / 3));
  CHECK(*m.tnr == doctest::Approx(200.0 / 3));
  CHECK(m.accuracy == doctest::Approx(200.0 / 3));
  CHECK(*m.f1 == doctest::Approx(200.0 / 3));
  CHECK(*m.auc == 50);
}

TEST_CASE("degenerate cases") {
  std::vector<int> t{1, 1}, p{0, 0};
  std::vector<double> s{0.1, 0.2};
  const Metrics m = binary_metrics(t, p, s);
  CHECK_FALSE(m.auc);
  CHECK_FALSE(m.tnr);
  CHECK(*m.tpr == 0);
  CHECK(*m.f1 == 0);
  CHECK(m.accuracy == 0);
  std::vector<int> neg{0, 0};
  const Metrics n = binary_metrics(neg, neg, s);
  CHECK_FALSE(n.f1);
  CHECK(n.accuracy == 100);
  CHECK_THROWS_AS(binary_metrics(t, std::vector<int>{1}, s), std::invalid_argument);
}

TEST_CASE("rank AUC equals the all-pairs oracle") {
  std::mt19937_64 gen(41);
  std::uniform_int_distribution<int> size(1, 50), coarse(0, 5);
  std::normal_distribution<double> g(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> pos(static_cast<std::size_t>(size(gen))), neg(static_cast<std::size_t>(size(gen)));
    const bool ties = t % 2 == 0;
    for (auto& v : pos) v = ties ? coarse(gen) : g(gen) + 0.5;
    for (auto& v : neg) v = ties ? coarse(gen) : g(gen);
    const double auc = *rank_auc(pos, neg);
    CHECK(std::abs(auc - all_pairs_auc(pos, neg)) <= 1e-12);
    // Strictly increasing transforms leave it unchanged.
    std::vector<double> ep = pos, en = neg, sp = pos, sn = neg;
    for (auto& v : ep) v = std::exp(v);
    for (auto& v : en) v = std::exp(v);
    for (auto& v : sp) v *= 1000;
    for (auto& v : sn) v *= 1000;
    CHECK(*rank_auc(ep, en) == auc);
    CHECK(*rank_auc(sp, sn) == auc);
  }
}

TEST_CASE("metric bounds and f1 zero rule") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<int> truth(30), pred(30);
    std::vector<double> s(30);
    for (std::size_t i = 0; i < 30; ++i) {
      truth[i] = u(gen) < 0.5;
      pred[i] = u(gen) < 0.5;
      s[i] = u(gen);
    }
    const Metrics m = binary_metrics(truth, pred, s);
    for (const auto& v : {m.auc, m.tpr, m.tnr, m.f1}) {
      if (v) {
        CHECK(*v >= 0);
        CHECK(*v <= 100);
      }
    }
    int tp = 0;
    for (std::size_t i = 0; i < 30; ++i) tp += truth[i] && pred[i];
    if (tp == 0 && m.f1) CHECK(*m.f1 == 0);
  }
}

TEST_CASE("multiclass examples") {
  std::vector<int> t{0, 1, 2, 0, 1, 2};
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(6, 3);
  for (int i = 0; i < 6; ++i) s(i, t[static_cast<std::size_t>(i)]) = 1;
  const Metrics diag = multiclass_metrics(t, t, s);
  CHECK(*diag.auc == 100);
  CHECK(*diag.tpr == 100);
  CHECK(*diag.tnr == 100);
  CHECK(*diag.f1 == 100);
  CHECK(diag.accuracy == 100);

  std::vector<int> ones(6, 1);
  CHECK(multiclass_metrics(t, ones, s).accuracy == doctest::Approx(100.0 / 3));
}

TEST_CASE("multiclass equals the average of one-vs-rest binary calls") {
  std::mt19937_64 gen(43);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 60;
    std::vector<int> t(n), p(n);
    Eigen::MatrixXd s(static_cast<Eigen::Index>(n), 3);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(i % 3);
      p[i] = static_cast<int>(gen() % 3);
      for (int c = 0; c < 3; ++c) s(static_cast<Eigen::Index>(i), c) = u(gen);
    }
    const Metrics m = multiclass_metrics(t, p, s);
    double auc = 0, tpr = 0, tnr = 0, f1 = 0;
    for (int c = 0; c < 3; ++c) {
      std::vector<int> bt(n), bp(n);
      std::vector<double> bs(n);
      for (std::size_t i = 0; i < n; ++i) {
        bt[i] = t[i] == c;
        bp[i] = p[i] == c;
        bs[i] = s(static_cast<Eigen::Index>(i), c);
      }
      const Metrics b = binary_metrics(bt, bp, bs);
      auc += *b.auc / 3;
      tpr += *b.tpr / 3;
      tnr += *b.tnr / 3;
      f1 += *b.f1 / 3;
    }
    CHECK(*m.auc == doctest::Approx(auc).epsilon(1e-12));
    CHECK(*m.tpr == doctest::Approx(tpr).epsilon(1e-12));
    CHECK(*m.tnr == doctest::Approx(tnr).epsilon(1e-12));
    CHECK(*m.f1 == doctest::Approx(f1).epsilon(1e-12));
  }
}
