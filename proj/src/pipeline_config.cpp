#include "csiwater/pipeline_config.hpp"

#include <cstdio>
#include <fstream>

namespace csiwater {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

ClassLabel label_or_throw(const std::string& s) {
  auto label = parse_class_label(s);
  if (!label) throw ConfigError("unknown class label '" + s + "'");
  return *label;
}

MacAddress mac_or_throw(const std::string& s) {
  auto mac = MacAddress::parse(s);
  if (!mac) throw ConfigError("bad MAC address '" + s + "'");
  return *mac;
}

json preprocess_to_json(const PreprocessConfig& p) {
  return {{"target_mac", p.target_mac ? json(p.target_mac->to_string()) : json(nullptr)},
          {"reject_outliers", p.reject_outliers},
          {"hampel_window", p.hampel_window},
          {"hampel_k", p.hampel_k},
          {"sanitize_phase", p.sanitize_phase},
          {"drop_zero_subcarrier_frames", p.drop_zero_subcarrier_frames}};
}

PreprocessConfig preprocess_from_json(const json& j) {
  const std::string where = "preprocess";
  reject_unknown(j, {"target_mac", "reject_outliers", "hampel_window", "hampel_k", "sanitize_phase",
                     "drop_zero_subcarrier_frames"},
                 where);
  PreprocessConfig p;
  if (j.contains("target_mac") && !j.at("target_mac").is_null()) {
    std::string mac;
    read(j, "target_mac", mac, where);
    p.target_mac = mac_or_throw(mac);
  }
  read(j, "reject_outliers", p.reject_outliers, where);
  read(j, "hampel_window", p.hampel_window, where);
  read(j, "hampel_k", p.hampel_k, where);
  read(j, "sanitize_phase", p.sanitize_phase, where);
  read(j, "drop_zero_subcarrier_frames", p.drop_zero_subcarrier_frames, where);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

json optional_path(const std::optional<std::filesystem::path>& p) { return p ? json(p->generic_string()) : json(nullptr); }

void read_path(const json& j, const char* key, std::optional<std::filesystem::path>& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  std::string s;
  read(j, key, s, "paths");
  out = s;
}

}  // namespace

json to_json(const ModelSpec& spec) {
  json j = {{"family", to_string(spec.family())}, {"params", to_json(spec.params)}, {"standardize", spec.standardize}};
  if (spec.search_budget > 0) j["search"] = {{"budget", spec.search_budget}, {"seed", spec.search_seed}};
  return j;
}

ModelSpec model_spec_from_json(const json& j) {
  const std::string where = "model entry";
  reject_unknown(j, {"family", "params", "standardize", "search"}, where);
  std::string name;
  read(j, "family", name, where);
  const auto family = parse_model_family(name);
  if (!family) throw ConfigError("unknown model family '" + name + "'");
  ModelSpec spec = ModelSpec::defaults(*family);
  try {
    spec.params = model_params_from_json(*family, j.value("params", json::object()));
  } catch (const std::exception& e) {
    throw ConfigError(std::string(to_string(*family)) + ": " + e.what());
  }
  read(j, "standardize", spec.standardize, where);
  if (j.contains("search")) {
    const json& s = j.at("search");
    reject_unknown(s, {"budget", "seed"}, "search");
    read(s, "budget", spec.search_budget, "search");
    read(s, "seed", spec.search_seed, "search");
    if (spec.search_budget < 1) throw ConfigError("search budget must be >= 1");
    if (*family == ModelFamily::Lstm) throw ConfigError("LSTM hyperparameters are fixed; search is not available");
  }
  return spec;
}

json to_json(const SynthConfig& c) {
  json counts = json::object(), profiles = json::object();
  for (const auto& [label, n] : c.n_per_class) counts[std::string(to_string(label))] = n;
  for (const auto& [label, p] : c.profiles) {
    profiles[std::string(to_string(label))] = {{"attenuation", p.attenuation}, {"phase_slope", p.phase_slope}};
  }
  return {{"n_per_class", counts},
          {"profiles", profiles},
          {"n_subcarriers", c.n_subcarriers},
          {"base_magnitude", c.base_magnitude},
          {"base_components", c.base_components},
          {"base_ripple", c.base_ripple},
          {"base_phase_ripple", c.base_phase_ripple},
          {"noise_sigma", c.noise_sigma},
          {"gain_sigma", c.gain_sigma},
          {"quantize", c.quantize},
          {"mac", c.mac.to_string()},
          {"channel", c.channel},
          {"rssi_dbm", c.rssi_dbm},
          {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const json& j, SynthConfig c) {
  const std::string where = "synth";
  reject_unknown(j, {"preset", "n_per_class", "profiles", "n_subcarriers", "base_magnitude", "base_components",
                     "base_ripple", "base_phase_ripple", "noise_sigma", "gain_sigma", "quantize", "mac", "channel",
                     "rssi_dbm", "seed"},
                 where);
  if (j.contains("n_per_class")) {
    c.n_per_class.clear();
    for (const auto& [key, value] : j.at("n_per_class").items()) {
      if (!value.is_number_unsigned()) throw ConfigError("class count for " + key + " must be a non-negative integer");
      c.n_per_class[label_or_throw(key)] = value.get<std::size_t>();
    }
  }
  if (j.contains("profiles")) {
    for (const auto& [key, value] : j.at("profiles").items()) {
      reject_unknown(value, {"attenuation", "phase_slope"}, "profile " + key);
      ClassProfile& p = c.profiles[label_or_throw(key)];
      read(value, "attenuation", p.attenuation, "profile " + key);
      read(value, "phase_slope", p.phase_slope, "profile " + key);
    }
  }
  read(j, "n_subcarriers", c.n_subcarriers, where);
  read(j, "base_magnitude", c.base_magnitude, where);
  read(j, "base_components", c.base_components, where);
  read(j, "base_ripple", c.base_ripple, where);
  read(j, "base_phase_ripple", c.base_phase_ripple, where);
  read(j, "noise_sigma", c.noise_sigma, where);
  read(j, "gain_sigma", c.gain_sigma, where);
  read(j, "quantize", c.quantize, where);
  if (j.contains("mac")) {
    std::string mac;
    read(j, "mac", mac, where);
    c.mac = mac_or_throw(mac);
  }
  read(j, "channel", c.channel, where);
  read(j, "rssi_dbm", c.rssi_dbm, where);
  read(j, "seed", c.seed, where);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

PipelineConfig parse_pipeline_config(const json& j) {
  reject_unknown(j, {"preprocess", "models", "eval", "synth", "paths", "threads", "quiet"}, "config");
  PipelineConfig c;
  if (j.contains("preprocess")) c.preprocess = preprocess_from_json(j.at("preprocess"));
  if (j.contains("models")) {
    if (!j.at("models").is_array()) throw ConfigError("models must be an array");
    for (const auto& m : j.at("models")) c.models.push_back(model_spec_from_json(m));
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    reject_unknown(e, {"k", "seed", "scenarios", "scenario", "multiclass_mode"}, "eval");
    read(e, "k", c.eval.k, "eval");
    read(e, "seed", c.eval.seed, "eval");
    if (c.eval.k < 2) throw ConfigError("eval.k must be >= 2");
    std::vector<std::string> names;
    if (e.contains("scenario")) {
      std::string one;
      read(e, "scenario", one, "eval");
      names.push_back(one);
    }
    if (e.contains("scenarios")) read(e, "scenarios", names, "eval");
    if (!names.empty()) {
      c.eval.scenarios.clear();
      for (const auto& n : names) {
        auto s = parse_scenario(n);
        if (!s) throw ConfigError("unknown scenario '" + n + "'");
        c.eval.scenarios.push_back(*s);
      }
    }
    if (e.contains("multiclass_mode")) {
      std::string mode;
      read(e, "multiclass_mode", mode, "eval");
      auto m = parse_multiclass_mode(mode);
      if (!m) throw ConfigError("unknown multiclass_mode '" + mode + "'");
      c.eval.mode = *m;
    }
  }
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    if (!s.is_object()) throw ConfigError("synth must be an object");
    SynthConfig base;
    if (s.contains("preset")) {
      read(s, "preset", c.synth_preset, "synth");
      auto p = preset(c.synth_preset);
      if (!p) throw ConfigError("unknown preset '" + c.synth_preset + "'");
      base = *p;
    }
    c.synth = synth_config_from_json(s, base);
  }
  if (j.contains("paths")) {
    const json& p = j.at("paths");
    reject_unknown(p, {"dataset", "captures", "out_dataset", "out_capture", "report_text", "report_csv", "model_out"},
                   "paths");
    read_path(p, "dataset", c.paths.dataset);
    if (p.contains("captures")) {
      if (!p.at("captures").is_object()) throw ConfigError("paths.captures must map class labels to files");
      for (const auto& [key, value] : p.at("captures").items()) {
        if (!value.is_string()) throw ConfigError("capture path for " + key + " must be a string");
        c.paths.captures[label_or_throw(key)] = value.get<std::string>();
      }
    }
    read_path(p, "out_dataset", c.paths.out_dataset);
    read_path(p, "out_capture", c.paths.out_capture);
    read_path(p, "report_text", c.paths.report_text);
    read_path(p, "report_csv", c.paths.report_csv);
    read_path(p, "model_out", c.paths.model_out);
  }
  read(j, "threads", c.threads, "config");
  read(j, "quiet", c.quiet, "config");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);  // comments allowed
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_pipeline_config(j);
}

json to_json(const PipelineConfig& c) {
  json models = json::array();
  for (const auto& m : c.models) models.push_back(to_json(m));
  json scenarios = json::array();
  for (auto s : c.eval.scenarios) scenarios.push_back(to_string(s));
  json captures = json::object();
  for (const auto& [label, p] : c.paths.captures) captures[std::string(to_string(label))] = p.generic_string();
  json synth = to_json(c.synth);
  if (!c.synth_preset.empty()) synth["preset"] = c.synth_preset;
  return {{"preprocess", preprocess_to_json(c.preprocess)},
          {"models", models},
          {"eval",
           {{"k", c.eval.k},
            {"seed", c.eval.seed},
            {"scenarios", scenarios},
            {"multiclass_mode", to_string(c.eval.mode)}}},
          {"synth", synth},
          {"paths",
           {{"dataset", optional_path(c.paths.dataset)},
            {"captures", captures},
            {"out_dataset", optional_path(c.paths.out_dataset)},
            {"out_capture", optional_path(c.paths.out_capture)},
            {"report_text", optional_path(c.paths.report_text)},
            {"report_csv", optional_path(c.paths.report_csv)},
            {"model_out", optional_path(c.paths.model_out)}}}};
}

std::string config_hash(const PipelineConfig& config) {
  // Output destinations and run-time knobs do not change results.
  nlohmann::json j = to_json(config);
  for (const char* key : {"out_dataset", "out_capture", "report_text", "report_csv", "model_out"}) {
    j["paths"].erase(key);
  }
  j.erase("threads");
  j.erase("quiet");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace csiwater
