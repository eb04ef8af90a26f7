#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "csiwater/dataset.hpp"
#include "csiwater/metrics.hpp"
#include "csiwater/model.hpp"

namespace csiwater {

class EvalError : public std::runtime_error {
 public:
  enum class Kind { ClassTooSmall, MissingClass, EmptySpace, TrainingFailure };

  EvalError(Kind kind, const std::string& message, int fold = -1)
      : std::runtime_error(message), kind_(kind), fold_(fold) {}

  Kind kind() const { return kind_; }
  // Failing fold for TrainingFailure, else -1.
  int fold() const { return fold_; }

 private:
  Kind kind_;
  int fold_;
};

struct FoldPlan {
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<int> assignment;

  std::vector<Eigen::Index> train_rows(int fold) const;
  std::vector<Eigen::Index> test_rows(int fold) const;

  bool operator==(const FoldPlan&) const = default;
};

// Shuffles each class with a seeded stream, then deals its members round-robin
// starting where the previous class stopped.
FoldPlan stratified_kfold(std::span<const int> labels, int k, std::uint64_t seed);

enum class Scenario { CleanVs100ppm, CleanVs1000ppm, AllThree };
enum class MulticlassMode { ThreeClass, PoisonedVsClean };

std::string_view to_string(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view text);
std::string_view to_string(MulticlassMode m);
std::optional<MulticlassMode> parse_multiclass_mode(std::string_view text);

// Rows of one scenario with labels re-indexed to 0..K-1. Binary scenarios
// put Clean at 0 and the poisoned side at 1.
struct ScenarioData {
  Eigen::MatrixXd x;
  std::vector<int> y;
  std::vector<std::string> class_names;
  Scenario scenario = Scenario::AllThree;
  MulticlassMode mode = MulticlassMode::ThreeClass;

  bool binary() const { return class_names.size() == 2; }
  // e.g. "CleanVs100ppm", "AllThree/ThreeClass".
  std::string name() const;
};

ScenarioData select_scenario(const Dataset& data, Scenario scenario,
                             MulticlassMode mode = MulticlassMode::ThreeClass);

// Scores a trained model on labelled rows using the scenario's metric rule.
// Two classes use binary metrics with class 1 positive; more use the macro
// one-vs-rest rule.
Metrics score_model(const TrainedModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y,
                    int num_classes);

struct FoldResult {
  ModelSpec spec;  // after any per-fold search
  TrainedModel model;
  Metrics metrics;
};

// Trains on the plan's training rows only and scores the held-out rows.
FoldResult run_fold(const ScenarioData& data, const ModelSpec& spec, const FoldPlan& plan, int fold,
                    std::uint64_t seed);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
  int defined = 0;  // folds where the metric was defined
};

struct MetricRow {
  MetricSummary auc, tpr, tnr, f1, accuracy;
};

// Mean and sample (n - 1) standard deviation over the folds where each
// metric is defined.
MetricRow summarize(std::span<const Metrics> folds);

struct CvReport {
  std::string scenario;
  std::string model;
  std::uint64_t seed = 0;
  int k = 0;
  std::vector<FoldResult> folds;
  MetricRow row;
};

CvReport cross_validate(const ScenarioData& data, const ModelSpec& spec, int k, std::uint64_t seed,
                        int threads = 1);

struct SearchResult {
  ModelSpec best;
  double best_accuracy = 0.0;
  std::vector<std::pair<ModelSpec, double>> trials;
};

// Draws `budget` specs from the family's space and keeps the one with the
// highest inner k-fold mean accuracy; earlier draws win ties.
SearchResult random_search(const ScenarioData& data, ModelFamily family, int budget, std::uint64_t seed,
                           int inner_k = 5, int threads = 1);

// The i-th draw of the family's search space under `seed`.
ModelSpec draw_spec(ModelFamily family, std::uint64_t seed, int draw);

}  // namespace csiwater
