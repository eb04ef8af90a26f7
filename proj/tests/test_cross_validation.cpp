#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>

#include "csiwater/cross_validation.hpp"

using namespace csiwater;

namespace {

ScenarioData gaussian_data(std::uint64_t seed, std::vector<int> counts, int width, double gap) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0, 1);
  ScenarioData d;
  int n = 0;
  for (int c : counts) n += c;
  d.x.resize(n, width);
  int row = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (int i = 0; i < counts[c]; ++i, ++row) {
      for (int j = 0; j < width; ++j) d.x(row, j) = g(gen) + (j == static_cast<int>(c) ? gap : 0.0);
      d.y.push_back(static_cast<int>(c));
    }
  }
  for (std::size_t c = 0; c < counts.size(); ++c) d.class_names.push_back("c" + std::to_string(c));
  d.scenario = counts.size() == 2 ? Scenario::CleanVs100ppm : Scenario::AllThree;
  return d;
}

std::map<int, int> per_class_in_fold(const FoldPlan& plan, std::span<const int> labels, int fold) {
  std::map<int, int> out;
  for (auto r : plan.test_rows(fold)) ++out[labels[static_cast<std::size_t>(r)]];
  return out;
}

}  // namespace

TEST_CASE("ten of each class over five folds") {
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) labels.push_back(0);
  for (int i = 0; i < 10; ++i) labels.push_back(1);
  const FoldPlan plan = stratified_kfold(labels, 5, 3);
  for (int f = 0; f < 5; ++f) {
    const auto counts = per_class_in_fold(plan, labels, f);
    CHECK(counts.at(0) == 2);
    CHECK(counts.at(1) == 2);
    CHECK(plan.train_rows(f).size() == 16);
  }
}

TEST_CASE("eleven samples of one class") {
  std::vector<int> labels(11, 0);
  labels.push_back(1);
  labels.push_back(1);
  labels.push_back(1);
  labels.push_back(1);
  labels.push_back(1);
  const FoldPlan plan = stratified_kfold(labels, 5, 9);
  std::vector<int> sizes;
  for (int f = 0; f < 5; ++f) sizes.push_back(per_class_in_fold(plan, labels, f)[0]);
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<int>{2, 2, 2, 2, 3});
}

TEST_CASE("fold plans: exact cover, stratification, determinism") {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<int> labels;
    const int classes = 2 + static_cast<int>(gen() % 3);
    for (int c = 0; c < classes; ++c) {
      const int n = 5 + static_cast<int>(gen() % 40);
      for (int i = 0; i < n; ++i) labels.push_back(c);
    }
    std::shuffle(labels.begin(), labels.end(), gen);
    const std::uint64_t seed = gen();
    const FoldPlan plan = stratified_kfold(labels, 5, seed);
    CHECK(plan == stratified_kfold(labels, 5, seed));
    std::vector<int> seen(labels.size(), 0);
    for (int f = 0; f < 5; ++f) {
      for (auto r : plan.test_rows(f)) ++seen[static_cast<std::size_t>(r)];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
    std::map<int, std::pair<int, int>> range;
    for (int c = 0; c < classes; ++c) range[c] = {1 << 30, -1};
    for (int f = 0; f < 5; ++f) {
      auto counts = per_class_in_fold(plan, labels, f);
      for (int c = 0; c < classes; ++c) {
        range[c].first = std::min(range[c].first, counts[c]);
        range[c].second = std::max(range[c].second, counts[c]);
      }
    }
    for (const auto& [c, r] : range) CHECK(r.second - r.first <= 1);
  }
}

TEST_CASE("a class smaller than k is rejected") {
  std::vector<int> labels{0, 0, 0, 0, 0, 1, 1, 1};
  try {
    stratified_kfold(labels, 5, 0);
    FAIL("expected ClassTooSmall");
  } catch (const EvalError& e) {
    CHECK(e.kind() == EvalError::Kind::ClassTooSmall);
  }
}

TEST_CASE("identical fold metrics summarize to zero spread") {
  Metrics m;
  m.auc = 90;
  m.tpr = 80;
  m.tnr = 70;
  m.f1 = 60;
  m.accuracy = 75;
  const std::vector<Metrics> folds(5, m);
  const MetricRow row = summarize(folds);
  CHECK(row.auc.mean == 90);
  CHECK(row.auc.std == 0);
  CHECK(row.accuracy.mean == 75);
  CHECK(row.accuracy.std == 0);
  CHECK(row.f1.defined == 5);
}

TEST_CASE("summary uses sample deviation and skips undefined folds") {
  std::vector<Metrics> folds(3);
  folds[0].accuracy = 10;
  folds[1].accuracy = 20;
  folds[2].accuracy = 30;
  folds[0].tpr = 50;
  const MetricRow row = summarize(folds);
  CHECK(row.accuracy.mean == doctest::Approx(20));
  CHECK(row.accuracy.std == doctest::Approx(10));
  CHECK(row.tpr.defined == 1);
  CHECK(row.tpr.mean == 50);
  CHECK(row.auc.defined == 0);
}

TEST_CASE("a feature that encodes the label gives perfect accuracy for every family") {
  ScenarioData d = gaussian_data(6, {40, 40}, 5, 0.0);
  for (Eigen::Index i = 0; i < d.x.rows(); ++i) d.x(i, 2) = d.y[static_cast<std::size_t>(i)] * 100.0;
  for (auto f : kAllFamilies) {
    CAPTURE(to_string(f));
    ModelSpec spec = ModelSpec::defaults(f);
    if (f == ModelFamily::Knn) spec.params = KnnParams{1, KnnMetric::Euclidean};
    if (f == ModelFamily::AdaBoost) spec.params = AdaBoostParams{10, 4, 0.5};
    if (f == ModelFamily::Lstm) {
      LstmConfig c;
      c.hidden1 = 8;
      c.hidden2 = 4;
      c.max_epochs = 30;
      c.learn_rate = 0.02;
      c.drop_factor = 1.0;
      c.batch_size = 16;
      c.input_shape = LstmInputShape::SingleStep;
      spec.params = c;
    }
    const CvReport r = cross_validate(d, spec, 5, 1);
    CHECK(r.row.accuracy.mean == 100);
    CHECK(r.row.accuracy.std == 0);
    CHECK(r.folds.size() == 5);
  }
}

TEST_CASE("cross validation is deterministic and thread-count independent") {
  const ScenarioData d = gaussian_data(7, {30, 30, 30}, 6, 1.0);
  const ModelSpec spec{AdaBoostParams{15, 6, 0.3}, false, 0, 0};
  const CvReport a = cross_validate(d, spec, 5, 42, 1);
  const CvReport b = cross_validate(d, spec, 5, 42, 3);
  REQUIRE(a.folds.size() == b.folds.size());
  for (std::size_t f = 0; f < a.folds.size(); ++f) {
    CHECK(serialize_model(a.folds[f].model) == serialize_model(b.folds[f].model));
    CHECK(a.folds[f].metrics.accuracy == b.folds[f].metrics.accuracy);
  }
  CHECK(a.row.accuracy.mean == b.row.accuracy.mean);
  CHECK(a.row.auc.mean == b.row.auc.mean);
}

TEST_CASE("test split perturbation leaves trained parameters unchanged") {
  const ScenarioData d = gaussian_data(8, {25, 25}, 4, 1.5);
  const FoldPlan plan = stratified_kfold(d.y, 5, 11);
  const std::vector<ModelSpec> specs{
      {KnnParams{3, KnnMetric::Correlation}, true, 0, 0},
      {SvmParams{{KernelType::Rbf, 0.2}, 2.0}, true, 0, 0},
      {AdaBoostParams{10, 4, 0.5}, true, 0, 0},
      {KnnParams{}, false, 3, 5},
  };
  for (int fold = 0; fold < 5; ++fold) {
    ScenarioData poisoned = d;
    for (auto r : plan.test_rows(fold)) poisoned.x.row(r) = poisoned.x.row(r) * 1000.0 + Eigen::RowVectorXd::Constant(4, 50.0);
    for (const auto& spec : specs) {
      const FoldResult clean = run_fold(d, spec, plan, fold, 3);
      const FoldResult dirty = run_fold(poisoned, spec, plan, fold, 3);
      CHECK(serialize_model(clean.model) == serialize_model(dirty.model));
      CHECK(clean.spec == dirty.spec);
    }
  }
}

TEST_CASE("random search") {
  const ScenarioData d = gaussian_data(9, {20, 20}, 4, 8.0);
  const SearchResult one = random_search(d, ModelFamily::Knn, 1, 17);
  CHECK(one.trials.size() == 1);
  CHECK(one.best == draw_spec(ModelFamily::Knn, 17, 0));

  const SearchResult a = random_search(d, ModelFamily::Svm, 6, 23);
  const SearchResult b = random_search(d, ModelFamily::Svm, 6, 23);
  CHECK(a.best == b.best);
  CHECK(a.best_accuracy == b.best_accuracy);
  CHECK(a.best_accuracy == 100);
  for (const auto& [spec, acc] : a.trials) CHECK(acc <= a.best_accuracy);

  CHECK_THROWS_AS(random_search(d, ModelFamily::Lstm, 3, 1), EvalError);
  CHECK_THROWS_AS(random_search(d, ModelFamily::Knn, 0, 1), EvalError);
}

TEST_CASE("search draws stay inside the quoted ranges") {
  for (int i = 0; i < 200; ++i) {
    const auto k = std::get<KnnParams>(draw_spec(ModelFamily::Knn, 5, i).params);
    CHECK(k.k >= 1);
    CHECK(k.k <= 15);
    const auto s = std::get<SvmParams>(draw_spec(ModelFamily::Svm, 5, i).params);
    CHECK(s.C >= 1e-2);
    CHECK(s.C <= 1e3);
    const auto a = std::get<AdaBoostParams>(draw_spec(ModelFamily::AdaBoost, 5, i).params);
    CHECK(a.n_learners >= 10);
    CHECK(a.n_learners <= 500);
    CHECK(a.max_splits >= 1);
    CHECK(a.max_splits <= 150);
    CHECK(a.learn_rate >= 0.01);
    CHECK(a.learn_rate <= 1);
  }
}

TEST_CASE("scenario selection") {
  Dataset ds;
  ds.features = Eigen::MatrixXd::Zero(6, 2);
  ds.labels = {ClassLabel::Clean, ClassLabel::Toxic1000ppm, ClassLabel::Clean,
               ClassLabel::Toxic1000ppm, ClassLabel::Toxic1000ppm, ClassLabel::Clean};
  for (Eigen::Index i = 0; i < 6; ++i) ds.features(i, 0) = static_cast<double>(i);
  const ScenarioData hi = select_scenario(ds, Scenario::CleanVs1000ppm);
  CHECK(hi.binary());
  CHECK(hi.y == std::vector<int>{0, 1, 0, 1, 1, 0});
  CHECK(hi.name() == "CleanVs1000ppm");
  try {
    select_scenario(ds, Scenario::CleanVs100ppm);
    FAIL("expected MissingClass");
  } catch (const EvalError& e) {
    CHECK(e.kind() == EvalError::Kind::MissingClass);
  }
  ds.labels[0] = ClassLabel::Toxic100ppm;
  const ScenarioData pooled = select_scenario(ds, Scenario::AllThree, MulticlassMode::PoisonedVsClean);
  CHECK(pooled.binary());
  CHECK(pooled.y == std::vector<int>{1, 1, 0, 1, 1, 0});
  const ScenarioData three = select_scenario(ds, Scenario::AllThree);
  CHECK(three.y == std::vector<int>{1, 2, 0, 2, 2, 0});
  CHECK(three.name() == "AllThree/ThreeClass");
}
