#include "csiwater/cross_validation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <thread>

#include "csiwater/random.hpp"

namespace csiwater {
namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Returns the first
// (lowest index) failure, if any, after all work has stopped.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  auto guarded = [&](int i) {
    try {
      fn(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  threads = std::clamp(threads, 1, std::max(n, 1));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) guarded(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

std::vector<int> take(const std::vector<int>& y, const std::vector<Eigen::Index>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(y[static_cast<std::size_t>(r)]);
  return out;
}

std::uint64_t fold_seed(std::uint64_t seed, int fold) { return mix_seed(seed ^ mix_seed(0x100 + fold)); }

MetricSummary summarize_one(std::span<const Metrics> folds, std::optional<double> (*get)(const Metrics&)) {
  std::vector<double> v;
  for (const auto& m : folds) {
    if (auto x = get(m)) v.push_back(*x);
  }
  MetricSummary s;
  s.defined = static_cast<int>(v.size());
  if (v.empty()) {
    s.mean = std::nan("");
    s.std = std::nan("");
    return s;
  }
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

}  // namespace

std::vector<Eigen::Index> FoldPlan::train_rows(int fold) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != fold) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

std::vector<Eigen::Index> FoldPlan::test_rows(int fold) const {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == fold) rows.push_back(static_cast<Eigen::Index>(i));
  }
  return rows;
}

FoldPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  for (const auto& [label, idx] : members) {
    if (idx.size() < static_cast<std::size_t>(k)) {
      throw EvalError(EvalError::Kind::ClassTooSmall, "class " + std::to_string(label) + " has " +
                                                          std::to_string(idx.size()) + " samples, fewer than k = " +
                                                          std::to_string(k));
    }
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.assign(labels.size(), 0);
  Rng rng(seed);
  std::size_t offset = 0;
  for (auto& [label, idx] : members) {
    rng.shuffle(idx.begin(), idx.end());
    for (std::size_t j = 0; j < idx.size(); ++j) {
      plan.assignment[idx[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(k));
    }
    offset += idx.size();
  }
  return plan;
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::CleanVs100ppm:
      return "CleanVs100ppm";
    case Scenario::CleanVs1000ppm:
      return "CleanVs1000ppm";
    case Scenario::AllThree:
      return "AllThree";
  }
  return "?";
}

std::optional<Scenario> parse_scenario(std::string_view text) {
  for (auto s : {Scenario::CleanVs100ppm, Scenario::CleanVs1000ppm, Scenario::AllThree}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

std::string_view to_string(MulticlassMode m) {
  return m == MulticlassMode::ThreeClass ? "ThreeClass" : "PoisonedVsClean";
}

std::optional<MulticlassMode> parse_multiclass_mode(std::string_view text) {
  if (text == "ThreeClass") return MulticlassMode::ThreeClass;
  if (text == "PoisonedVsClean") return MulticlassMode::PoisonedVsClean;
  return std::nullopt;
}

std::string ScenarioData::name() const {
  std::string s(to_string(scenario));
  if (scenario == Scenario::AllThree) s += "/" + std::string(to_string(mode));
  return s;
}

ScenarioData select_scenario(const Dataset& data, Scenario scenario, MulticlassMode mode) {
  ScenarioData out;
  out.scenario = scenario;
  out.mode = mode;
  std::map<ClassLabel, int> index;
  switch (scenario) {
    case Scenario::CleanVs100ppm:
      index = {{ClassLabel::Clean, 0}, {ClassLabel::Toxic100ppm, 1}};
      out.class_names = {"Clean", "Toxic100ppm"};
      break;
    case Scenario::CleanVs1000ppm:
      index = {{ClassLabel::Clean, 0}, {ClassLabel::Toxic1000ppm, 1}};
      out.class_names = {"Clean", "Toxic1000ppm"};
      break;
    case Scenario::AllThree:
      if (mode == MulticlassMode::ThreeClass) {
        index = {{ClassLabel::Clean, 0}, {ClassLabel::Toxic100ppm, 1}, {ClassLabel::Toxic1000ppm, 2}};
        out.class_names = {"Clean", "Toxic100ppm", "Toxic1000ppm"};
      } else {
        index = {{ClassLabel::Clean, 0}, {ClassLabel::Toxic100ppm, 1}, {ClassLabel::Toxic1000ppm, 1}};
        out.class_names = {"Clean", "Poisoned"};
      }
      break;
  }
  const auto counts = data.class_counts();
  for (const auto& [label, idx] : index) {
    if (!counts.contains(label)) {
      throw EvalError(EvalError::Kind::MissingClass, "scenario " + out.name() + " needs class " +
                                                         std::string(to_string(label)) + ", absent from the dataset");
    }
  }
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto it = index.find(data.labels[i]);
    if (it == index.end()) continue;
    rows.push_back(static_cast<Eigen::Index>(i));
    out.y.push_back(it->second);
  }
  out.x = take_rows(data.features, rows);
  return out;
}

Metrics score_model(const TrainedModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y,
                    int num_classes) {
  const auto preds = predict(model, x);
  const auto& classes = model.classes();
  const auto n = static_cast<Eigen::Index>(preds.size());
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, num_classes);
  std::vector<int> predicted(preds.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = preds[static_cast<std::size_t>(i)];
    predicted[static_cast<std::size_t>(i)] = p.label;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (classes[c] >= 0 && classes[c] < num_classes) scores(i, classes[c]) = p.scores(static_cast<Eigen::Index>(c));
    }
  }
  if (num_classes == 2) {
    std::vector<double> pos(scores.col(1).begin(), scores.col(1).end());
    return binary_metrics(y, predicted, pos);
  }
  return multiclass_metrics(y, predicted, scores);
}

FoldResult run_fold(const ScenarioData& data, const ModelSpec& spec, const FoldPlan& plan, int fold,
                    std::uint64_t seed) {
  const auto train = plan.train_rows(fold);
  const auto test = plan.test_rows(fold);
  ScenarioData train_data;
  train_data.x = take_rows(data.x, train);
  train_data.y = take(data.y, train);
  train_data.class_names = data.class_names;
  train_data.scenario = data.scenario;
  train_data.mode = data.mode;

  const std::uint64_t s = fold_seed(seed, fold);
  FoldResult out;
  out.spec = spec;
  if (spec.search_budget > 0) {
    out.spec = random_search(train_data, spec.family(), spec.search_budget, mix_seed(s ^ spec.search_seed)).best;
  }
  out.model = train_model(out.spec, train_data.x, train_data.y, s);
  const Eigen::MatrixXd test_x = take_rows(data.x, test);
  const auto test_y = take(data.y, test);
  out.metrics = score_model(out.model, test_x, test_y, static_cast<int>(data.class_names.size()));
  return out;
}

MetricRow summarize(std::span<const Metrics> folds) {
  MetricRow r;
  r.auc = summarize_one(folds, [](const Metrics& m) { return m.auc; });
  r.tpr = summarize_one(folds, [](const Metrics& m) { return m.tpr; });
  r.tnr = summarize_one(folds, [](const Metrics& m) { return m.tnr; });
  r.f1 = summarize_one(folds, [](const Metrics& m) { return m.f1; });
  r.accuracy = summarize_one(folds, [](const Metrics& m) { return std::optional<double>(m.accuracy); });
  return r;
}

CvReport cross_validate(const ScenarioData& data, const ModelSpec& spec, int k, std::uint64_t seed, int threads) {
  const FoldPlan plan = stratified_kfold(data.y, k, seed);
  CvReport report;
  report.scenario = data.name();
  report.model = std::string(display_name(spec.family()));
  report.seed = seed;
  report.k = k;
  report.folds.resize(static_cast<std::size_t>(k));
  parallel_for(k, threads, [&](int fold) {
    try {
      report.folds[static_cast<std::size_t>(fold)] = run_fold(data, spec, plan, fold, seed);
    } catch (const EvalError& e) {
      if (e.kind() == EvalError::Kind::TrainingFailure) throw;
      throw EvalError(EvalError::Kind::TrainingFailure,
                      "fold " + std::to_string(fold) + ", model " + report.model + ": " + e.what(), fold);
    } catch (const std::exception& e) {
      throw EvalError(EvalError::Kind::TrainingFailure,
                      "fold " + std::to_string(fold) + ", model " + report.model + ": " + e.what(), fold);
    }
  });
  if (spec.family() == ModelFamily::Svm) {
    // Name the kernel(s) actually used so a row is unambiguous.
    bool linear = false, rbf = false;
    for (const auto& f : report.folds) {
      const auto type = std::get<SvmParams>(f.spec.params).kernel.type;
      (type == KernelType::Linear ? linear : rbf) = true;
    }
    report.model += linear && rbf ? " (linear/rbf)" : linear ? " (linear)" : " (rbf)";
  }
  std::vector<Metrics> metrics;
  for (const auto& f : report.folds) metrics.push_back(f.metrics);
  report.row = summarize(metrics);
  return report;
}

ModelSpec draw_spec(ModelFamily family, std::uint64_t seed, int draw) {
  Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(draw));
  ModelSpec spec = ModelSpec::defaults(family);
  switch (family) {
    case ModelFamily::Knn: {
      KnnParams p;
      p.k = 1 + static_cast<int>(rng.below(15));
      p.metric = rng.below(2) == 0 ? KnnMetric::Euclidean : KnnMetric::Correlation;
      spec.params = p;
      break;
    }
    case ModelFamily::Svm: {
      SvmParams p;
      p.kernel.type = rng.below(2) == 0 ? KernelType::Linear : KernelType::Rbf;
      p.C = std::pow(10.0, rng.uniform(-2.0, 3.0));
      p.kernel.gamma = std::pow(10.0, rng.uniform(-4.0, 1.0));
      spec.params = p;
      break;
    }
    case ModelFamily::AdaBoost: {
      AdaBoostParams p;
      p.n_learners = 10 + static_cast<int>(rng.below(491));
      p.max_splits = 1 + static_cast<int>(rng.below(150));
      p.learn_rate = rng.uniform(0.01, 1.0);
      spec.params = p;
      break;
    }
    case ModelFamily::Lstm:
      throw EvalError(EvalError::Kind::EmptySpace, "LSTM hyperparameters are fixed; no search space");
  }
  return spec;
}

SearchResult random_search(const ScenarioData& data, ModelFamily family, int budget, std::uint64_t seed, int inner_k,
                           int threads) {
  if (budget < 1) throw EvalError(EvalError::Kind::EmptySpace, "search budget must be at least 1");
  if (family == ModelFamily::Lstm) {
    throw EvalError(EvalError::Kind::EmptySpace, "LSTM hyperparameters are fixed; no search space");
  }
  SearchResult result;
  result.trials.resize(static_cast<std::size_t>(budget));
  const std::uint64_t inner_seed = mix_seed(seed);
  parallel_for(budget, threads, [&](int i) {
    ModelSpec spec = draw_spec(family, seed, i);
    double accuracy = -1.0;  // a draw that cannot be trained ranks last
    try {
      accuracy = cross_validate(data, spec, inner_k, inner_seed, 1).row.accuracy.mean;
    } catch (const EvalError& e) {
      if (e.kind() != EvalError::Kind::TrainingFailure) throw;
    }
    result.trials[static_cast<std::size_t>(i)] = {spec, accuracy};
  });
  result.best = result.trials.front().first;
  result.best_accuracy = result.trials.front().second;
  for (const auto& [spec, acc] : result.trials) {
    if (acc > result.best_accuracy) {
      result.best = spec;
      result.best_accuracy = acc;
    }
  }
  return result;
}

}  // namespace csiwater
