#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "csiwater/cross_validation.hpp"
#include "csiwater/model.hpp"
#include "csiwater/preprocess.hpp"
#include "csiwater/synth.hpp"

namespace csiwater {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalSection {
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<Scenario> scenarios{Scenario::AllThree};
  MulticlassMode mode = MulticlassMode::ThreeClass;

  bool operator==(const EvalSection&) const = default;
};

struct PathsSection {
  std::optional<std::filesystem::path> dataset;                 // eval input
  std::map<ClassLabel, std::filesystem::path> captures;         // featurize input
  std::optional<std::filesystem::path> out_dataset;             // synth / featurize output
  std::optional<std::filesystem::path> out_capture;             // synth capture prefix
  std::optional<std::filesystem::path> report_text;
  std::optional<std::filesystem::path> report_csv;
  std::optional<std::filesystem::path> model_out;

  bool operator==(const PathsSection&) const = default;
};

struct PipelineConfig {
  PreprocessConfig preprocess;
  std::vector<ModelSpec> models;  // empty: all four families with defaults
  EvalSection eval;
  SynthConfig synth;
  std::string synth_preset;  // name the synth section started from, if any
  PathsSection paths;
  int threads = 1;
  bool quiet = false;
};

// Throws ConfigError on any unknown key or invalid value.
PipelineConfig parse_pipeline_config(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Canonical form; threads and quiet are left out because they never change
// results.
nlohmann::json to_json(const PipelineConfig& config);

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SynthConfig& config);
// Applies the keys present in `j` on top of `base`.
SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig base = {});

// FNV-1a 64 of the canonical JSON, ignoring output paths and run-time knobs.
std::string config_hash(const PipelineConfig& config);

}  // namespace csiwater
