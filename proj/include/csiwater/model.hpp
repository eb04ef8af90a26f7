#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "csiwater/adaboost.hpp"
#include "csiwater/knn.hpp"
#include "csiwater/learn.hpp"
#include "csiwater/lstm.hpp"
#include "csiwater/preprocess.hpp"
#include "csiwater/svm.hpp"

namespace csiwater {

enum class ModelFamily { Knn, Svm, AdaBoost, Lstm };

inline constexpr std::array<ModelFamily, 4> kAllFamilies = {ModelFamily::Lstm, ModelFamily::Knn, ModelFamily::AdaBoost,
                                                            ModelFamily::Svm};

// "knn", "svm", "adaboost", "lstm".
std::string_view to_string(ModelFamily family);
std::optional<ModelFamily> parse_model_family(std::string_view text);
// Row names used in report tables.
std::string_view display_name(ModelFamily family);

using ModelParams = std::variant<KnnParams, SvmParams, AdaBoostParams, LstmConfig>;

struct ModelSpec {
  ModelParams params;
  // Fit a z-score on the training rows and apply it ahead of the model.
  bool standardize = false;
  // When > 0, hyperparameters are chosen per training split by random search
  // with this many draws; `params` is then only used for the family.
  int search_budget = 0;
  std::uint64_t search_seed = 0;  // mixed with the fold seed

  ModelFamily family() const;
  static ModelSpec defaults(ModelFamily family);

  bool operator==(const ModelSpec&) const = default;
};

nlohmann::json to_json(const ModelParams& params);
// Starts from the family defaults and overrides the keys present. Throws
// std::invalid_argument on unknown keys or bad values.
ModelParams model_params_from_json(ModelFamily family, const nlohmann::json& j);

struct TrainedModel {
  std::variant<KnnModel, SvmModel, AdaBoostModel, LstmModel> model;
  std::optional<ZScore> standardization;
  std::uint64_t seed = 0;

  ModelFamily family() const;
  const std::vector<int>& classes() const;
  Eigen::Index width() const;
};

// `seed` drives every stochastic step (LSTM init, shuffling, dropout).
TrainedModel train_model(const ModelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y,
                         std::uint64_t seed);

std::vector<Prediction> predict(const TrainedModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x);
Prediction predict_row(const TrainedModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x);

// Self-describing JSON container; every double round-trips exactly.
std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace csiwater
