#include "csiwater/model.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>

#include "csiwater/ingest.hpp"

namespace csiwater {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  std::vector<double> data(static_cast<std::size_t>(m.size()));
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data.data(), m.rows(), m.cols()) = m;
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw std::invalid_argument("matrix payload size mismatch");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(data.data(), rows, cols);
}

json zscore_to_json(const ZScore& z) {
  return {{"mean", std::vector<double>(z.mean.begin(), z.mean.end())},
          {"stddev", std::vector<double>(z.stddev.begin(), z.stddev.end())}};
}

ZScore zscore_from_json(const json& j) {
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto sd = j.at("stddev").get<std::vector<double>>();
  ZScore z;
  z.mean = Eigen::Map<const Eigen::RowVectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  z.stddev = Eigen::Map<const Eigen::RowVectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size()));
  return z;
}

// Reads an optional key into `out`, rejecting unknown keys afterwards.
class KeyReader {
 public:
  explicit KeyReader(const json& j) : j_(j) {
    if (!j_.is_object()) throw std::invalid_argument("model parameters must be an object");
  }
  template <typename T>
  void read(const char* key, T& out) {
    seen_.push_back(key);
    if (j_.contains(key)) out = j_.at(key).get<T>();
  }
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        throw std::invalid_argument("unknown model parameter '" + key + "'");
      }
    }
  }

 private:
  const json& j_;
  std::vector<std::string> seen_;
};

std::string knn_metric_name(KnnMetric m) { return m == KnnMetric::Correlation ? "correlation" : "euclidean"; }

KnnMetric parse_knn_metric(const std::string& s) {
  if (s == "correlation") return KnnMetric::Correlation;
  if (s == "euclidean") return KnnMetric::Euclidean;
  throw std::invalid_argument("unknown k-NN metric '" + s + "'");
}

std::string kernel_name(KernelType k) { return k == KernelType::Rbf ? "rbf" : "linear"; }

KernelType parse_kernel(const std::string& s) {
  if (s == "rbf" || s == "gaussian") return KernelType::Rbf;
  if (s == "linear") return KernelType::Linear;
  throw std::invalid_argument("unknown SVM kernel '" + s + "'");
}

}  // namespace

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::Knn:
      return "knn";
    case ModelFamily::Svm:
      return "svm";
    case ModelFamily::AdaBoost:
      return "adaboost";
    case ModelFamily::Lstm:
      return "lstm";
  }
  return "?";
}

std::optional<ModelFamily> parse_model_family(std::string_view text) {
  for (auto f : kAllFamilies) {
    if (text == to_string(f)) return f;
  }
  return std::nullopt;
}

std::string_view display_name(ModelFamily family) {
  switch (family) {
    case ModelFamily::Knn:
      return "K-NN";
    case ModelFamily::Svm:
      return "SVM";
    case ModelFamily::AdaBoost:
      return "Ensemble";
    case ModelFamily::Lstm:
      return "LSTM";
  }
  return "?";
}

ModelFamily ModelSpec::family() const { return static_cast<ModelFamily>(params.index()); }

ModelSpec ModelSpec::defaults(ModelFamily family) {
  switch (family) {
    case ModelFamily::Knn:
      return {KnnParams{}, false, 0, 0};
    case ModelFamily::Svm:
      return {SvmParams{}, true, 0, 0};
    case ModelFamily::AdaBoost:
      return {AdaBoostParams{}, false, 0, 0};
    case ModelFamily::Lstm:
      return {LstmConfig{}, false, 0, 0};
  }
  throw std::invalid_argument("unknown model family");
}

json to_json(const ModelParams& params) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, KnnParams>) {
          return {{"k", p.k}, {"metric", knn_metric_name(p.metric)}};
        } else if constexpr (std::is_same_v<T, SvmParams>) {
          return {{"kernel", kernel_name(p.kernel.type)}, {"gamma", p.kernel.gamma}, {"C", p.C},
                  {"tol", p.tol}, {"max_passes", p.max_passes}};
        } else if constexpr (std::is_same_v<T, AdaBoostParams>) {
          return {{"learners", p.n_learners}, {"max_splits", p.max_splits}, {"learn_rate", p.learn_rate}};
        } else {
          return {{"hidden1", p.hidden1},
                  {"hidden2", p.hidden2},
                  {"dropout", p.dropout},
                  {"l2", p.l2},
                  {"learn_rate", p.learn_rate},
                  {"drop_period", p.drop_period},
                  {"drop_factor", p.drop_factor},
                  {"batch_size", p.batch_size},
                  {"max_epochs", p.max_epochs},
                  {"beta1", p.beta1},
                  {"beta2", p.beta2},
                  {"epsilon", p.epsilon},
                  {"optimizer", p.optimizer == LstmOptimizer::Adam ? "adam" : "rmsprop"},
                  {"input_shape", p.input_shape == LstmInputShape::SingleStep ? "single-step" : "subcarrier-sequence"},
                  {"normalize", p.normalize},
                  {"seed", p.seed}};
        }
      },
      params);
}

ModelParams model_params_from_json(ModelFamily family, const json& j) {
  KeyReader r(j);
  switch (family) {
    case ModelFamily::Knn: {
      KnnParams p;
      std::string metric = knn_metric_name(p.metric);
      r.read("k", p.k);
      r.read("metric", metric);
      r.finish();
      p.metric = parse_knn_metric(metric);
      if (p.k < 1) throw std::invalid_argument("k-NN k must be >= 1");
      return p;
    }
    case ModelFamily::Svm: {
      SvmParams p;
      std::string kernel = kernel_name(p.kernel.type);
      r.read("kernel", kernel);
      r.read("gamma", p.kernel.gamma);
      r.read("C", p.C);
      r.read("tol", p.tol);
      r.read("max_passes", p.max_passes);
      r.finish();
      p.kernel.type = parse_kernel(kernel);
      if (!(p.C > 0) || !(p.tol > 0) || !(p.kernel.gamma > 0)) {
        throw std::invalid_argument("SVM needs positive C, tol and gamma");
      }
      return p;
    }
    case ModelFamily::AdaBoost: {
      AdaBoostParams p;
      r.read("learners", p.n_learners);
      r.read("max_splits", p.max_splits);
      r.read("learn_rate", p.learn_rate);
      r.finish();
      if (p.n_learners < 1 || p.max_splits < 1 || !(p.learn_rate > 0)) {
        throw std::invalid_argument("AdaBoost needs learners >= 1, max_splits >= 1, learn_rate > 0");
      }
      return p;
    }
    case ModelFamily::Lstm: {
      LstmConfig p;
      std::string optimizer = "adam";
      std::string shape = "subcarrier-sequence";
      r.read("hidden1", p.hidden1);
      r.read("hidden2", p.hidden2);
      r.read("dropout", p.dropout);
      r.read("l2", p.l2);
      r.read("learn_rate", p.learn_rate);
      r.read("drop_period", p.drop_period);
      r.read("drop_factor", p.drop_factor);
      r.read("batch_size", p.batch_size);
      r.read("max_epochs", p.max_epochs);
      r.read("beta1", p.beta1);
      r.read("beta2", p.beta2);
      r.read("epsilon", p.epsilon);
      r.read("optimizer", optimizer);
      r.read("input_shape", shape);
      r.read("normalize", p.normalize);
      r.read("seed", p.seed);
      r.finish();
      if (optimizer == "adam") {
        p.optimizer = LstmOptimizer::Adam;
      } else if (optimizer == "rmsprop") {
        p.optimizer = LstmOptimizer::RmsProp;
      } else {
        throw std::invalid_argument("unknown LSTM optimizer '" + optimizer + "'");
      }
      if (shape == "subcarrier-sequence") {
        p.input_shape = LstmInputShape::SubcarrierSequence;
      } else if (shape == "single-step") {
        p.input_shape = LstmInputShape::SingleStep;
      } else {
        throw std::invalid_argument("unknown LSTM input shape '" + shape + "'");
      }
      if (p.hidden1 < 1 || p.hidden2 < 1 || p.batch_size < 1 || p.max_epochs < 0 || p.drop_period < 1 ||
          !(p.dropout >= 0 && p.dropout < 1) || !(p.learn_rate > 0)) {
        throw std::invalid_argument("invalid LSTM parameters");
      }
      return p;
    }
  }
  throw std::invalid_argument("unknown model family");
}

ModelFamily TrainedModel::family() const { return static_cast<ModelFamily>(model.index()); }

const std::vector<int>& TrainedModel::classes() const {
  return std::visit(
      [](const auto& m) -> const std::vector<int>& {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KnnModel>) {
          return m.classes();
        } else {
          return m.classes;
        }
      },
      model);
}

Eigen::Index TrainedModel::width() const {
  return std::visit(
      [](const auto& m) -> Eigen::Index {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KnnModel>) {
          return m.width();
        } else {
          return m.width;
        }
      },
      model);
}

TrainedModel train_model(const ModelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> y,
                         std::uint64_t seed) {
  check_training_input(x, y);
  TrainedModel out;
  out.seed = seed;
  Eigen::MatrixXd scaled;
  if (spec.standardize) {
    out.standardization = zscore_fit(x);
    scaled = zscore_apply(x, *out.standardization);
  }
  const Eigen::Ref<const Eigen::MatrixXd> input = spec.standardize ? Eigen::Ref<const Eigen::MatrixXd>(scaled) : x;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, KnnParams>) {
          out.model = knn_train(input, y, p);
        } else if constexpr (std::is_same_v<T, SvmParams>) {
          out.model = svm_train(input, y, p);
        } else if constexpr (std::is_same_v<T, AdaBoostParams>) {
          out.model = adaboost_train(input, y, p);
        } else {
          LstmConfig cfg = p;
          cfg.seed = seed;
          out.model = lstm_train(input, y, cfg);
        }
      },
      spec.params);
  return out;
}

std::vector<Prediction> predict(const TrainedModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.cols() != model.width()) throw LearnError(LearnError::Kind::WidthMismatch, "query width does not match model");
  if (model.standardization) {
    const Eigen::MatrixXd scaled = zscore_apply(x, *model.standardization);
    return std::visit([&](const auto& m) { return m.predict(scaled); }, model.model);
  }
  return std::visit([&](const auto& m) { return m.predict(x); }, model.model);
}

Prediction predict_row(const TrainedModel& model, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const Eigen::MatrixXd row = x;
  return predict(model, Eigen::Ref<const Eigen::MatrixXd>(row)).front();
}

std::string serialize_model(const TrainedModel& model) {
  json j;
  j["format"] = "csiwater-model";
  j["version"] = 1;
  j["family"] = to_string(model.family());
  j["seed"] = model.seed;
  j["standardization"] = model.standardization ? zscore_to_json(*model.standardization) : json(nullptr);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, KnnModel>) {
          j["params"] = to_json(m.params());
          j["classes"] = m.classes();
          j["state"] = {{"train", matrix_to_json(m.train())}, {"train_class", m.train_class()}};
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          j["params"] = to_json(m.params);
          j["classes"] = m.classes;
          json machines = json::array();
          for (std::size_t i = 0; i < m.machines.size(); ++i) {
            const auto& mc = m.machines[i];
            machines.push_back({{"pair", {m.pairs[i].first, m.pairs[i].second}},
                                {"support_vectors", matrix_to_json(mc.support_vectors)},
                                {"coef", std::vector<double>(mc.coef.begin(), mc.coef.end())},
                                {"bias", mc.bias},
                                {"converged", mc.converged}});
          }
          j["state"] = {{"width", m.width}, {"machines", machines}};
        } else if constexpr (std::is_same_v<T, AdaBoostModel>) {
          j["params"] = to_json(m.params);
          j["classes"] = m.classes;
          json trees = json::array();
          for (const auto& tree : m.trees) {
            json nodes = json::array();
            for (const auto& n : tree.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.class_index});
            trees.push_back(nodes);
          }
          j["state"] = {{"width", m.width}, {"trees", trees}, {"alphas", m.alphas}};
        } else {
          j["params"] = to_json(m.config);
          j["classes"] = m.classes;
          json weights = json::object();
          const char* names[] = {"w1", "u1", "b1", "w2", "u2", "b2", "w_out", "b_out"};
          std::size_t at = 0;
          m.weights.for_each([&](const Eigen::MatrixXd& t, bool) { weights[names[at++]] = matrix_to_json(t); });
          j["state"] = {{"width", m.width},
                        {"steps", m.steps},
                        {"normalization", m.normalization ? zscore_to_json(*m.normalization) : json(nullptr)},
                        {"weights", weights}};
        }
      },
      model.model);
  return j.dump();
}

TrainedModel deserialize_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != "csiwater-model" || j.at("version") != 1) {
      throw std::invalid_argument("unsupported model container");
    }
    const auto family = parse_model_family(j.at("family").get<std::string>());
    if (!family) throw std::invalid_argument("unknown model family in container");
    TrainedModel out;
    out.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("standardization").is_null()) out.standardization = zscore_from_json(j.at("standardization"));
    const auto params = model_params_from_json(*family, j.at("params"));
    auto classes = j.at("classes").get<std::vector<int>>();
    const json& s = j.at("state");
    switch (*family) {
      case ModelFamily::Knn:
        out.model = KnnModel(std::get<KnnParams>(params), std::move(classes), matrix_from_json(s.at("train")),
                             s.at("train_class").get<std::vector<int>>());
        break;
      case ModelFamily::Svm: {
        SvmModel m;
        m.params = std::get<SvmParams>(params);
        m.classes = std::move(classes);
        m.width = s.at("width").get<Eigen::Index>();
        for (const auto& mj : s.at("machines")) {
          BinarySvm mc;
          mc.support_vectors = matrix_from_json(mj.at("support_vectors"));
          const auto coef = mj.at("coef").get<std::vector<double>>();
          mc.coef = Eigen::Map<const Eigen::VectorXd>(coef.data(), static_cast<Eigen::Index>(coef.size()));
          mc.bias = mj.at("bias").get<double>();
          mc.converged = mj.at("converged").get<bool>();
          m.pairs.emplace_back(mj.at("pair").at(0).get<int>(), mj.at("pair").at(1).get<int>());
          m.machines.push_back(std::move(mc));
        }
        out.model = std::move(m);
        break;
      }
      case ModelFamily::AdaBoost: {
        AdaBoostModel m;
        m.params = std::get<AdaBoostParams>(params);
        m.classes = std::move(classes);
        m.width = s.at("width").get<Eigen::Index>();
        m.alphas = s.at("alphas").get<std::vector<double>>();
        for (const auto& tj : s.at("trees")) {
          DecisionTree tree;
          for (const auto& nj : tj) {
            tree.nodes.push_back({nj.at(0).get<int>(), nj.at(1).get<double>(), nj.at(2).get<int>(), nj.at(3).get<int>(),
                                  nj.at(4).get<int>()});
          }
          m.trees.push_back(std::move(tree));
        }
        out.model = std::move(m);
        break;
      }
      case ModelFamily::Lstm: {
        LstmModel m;
        m.config = std::get<LstmConfig>(params);
        m.classes = std::move(classes);
        m.width = s.at("width").get<Eigen::Index>();
        m.steps = s.at("steps").get<Eigen::Index>();
        if (!s.at("normalization").is_null()) m.normalization = zscore_from_json(s.at("normalization"));
        const char* names[] = {"w1", "u1", "b1", "w2", "u2", "b2", "w_out", "b_out"};
        std::size_t at = 0;
        m.weights.for_each([&](Eigen::MatrixXd& t, bool) { t = matrix_from_json(s.at("weights").at(names[at++])); });
        out.model = std::move(m);
        break;
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed model container: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize_model(text);
}

}  // namespace csiwater
