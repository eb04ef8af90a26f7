#include "csiwater/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "csiwater/cross_validation.hpp"
#include "csiwater/features.hpp"
#include "csiwater/ingest.hpp"
#include "csiwater/model.hpp"
#include "csiwater/pipeline_config.hpp"
#include "csiwater/report.hpp"
#include "csiwater/synth.hpp"

namespace csiwater::cli {
namespace {

namespace fs = std::filesystem;

// Exit with a code and a message for standard error.
struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, const std::string& message) { throw Failure{code, message}; }

void require_input(const fs::path& p) {
  std::error_code ec;
  if (!fs::is_regular_file(p, ec)) fail(kIo, "input file not found: " + p.string());
}

void require_output_dir(const fs::path& p) {
  const fs::path dir = p.parent_path().empty() ? fs::path(".") : p.parent_path();
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(kIo, "output directory does not exist: " + dir.string());
}

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool quiet = false;
};

PipelineConfig base_config(const Globals& g) {
  PipelineConfig c;
  if (!g.config.empty()) {
    try {
      c = load_pipeline_config(g.config);
    } catch (const ConfigError& e) {
      fail(kUsage, e.what());
    }
  }
  if (g.threads) {
    if (*g.threads < 1) fail(kUsage, "--threads must be >= 1");
    c.threads = *g.threads;
  }
  c.quiet = c.quiet || g.quiet;
  if (c.paths.dataset && !c.paths.captures.empty()) {
    fail(kUsage, "config names both a dataset and captures; exactly one input source is allowed");
  }
  return c;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string preset;
  std::string out_dataset;
  std::string out_capture;
};

int cmd_synth(const Globals& g, const SynthArgs& a, std::ostream& out) {
  PipelineConfig c = base_config(g);
  if (!a.preset.empty()) {
    auto p = preset(a.preset);
    if (!p) {
      std::string names;
      for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
      fail(kUsage, "unknown preset '" + a.preset + "' (available: " + names + ")");
    }
    c.synth = *p;
    c.synth_preset = a.preset;
  } else if (c.synth_preset.empty() && c.synth.n_per_class.empty()) {
    fail(kUsage, "synth needs --preset or a synth section in the config");
  }
  if (g.seed) c.synth.seed = *g.seed;
  if (!a.out_dataset.empty()) c.paths.out_dataset = a.out_dataset;
  if (!a.out_capture.empty()) c.paths.out_capture = a.out_capture;
  if (!c.paths.out_dataset && !c.paths.out_capture) fail(kUsage, "synth needs --out-dataset and/or --out-capture");
  if (c.paths.out_capture && !c.synth.quantize) fail(kUsage, "capture output needs quantize = true");
  if (c.paths.out_dataset) require_output_dir(*c.paths.out_dataset);
  if (c.paths.out_capture) require_output_dir(c.paths.out_capture->string() + "_x");

  const SynthOutput s = generate(c.synth, c.preprocess);
  if (c.paths.out_dataset) write_dataset(s.dataset, *c.paths.out_dataset);
  if (c.paths.out_capture) {
    for (ClassLabel label : kAllLabels) {
      if (!c.synth.n_per_class.contains(label)) continue;
      std::ostringstream text;
      const auto frames = s.frames_of(label);
      write_capture(text, frames);
      write_file_atomic(c.paths.out_capture->string() + "_" + std::string(to_string(label)) + ".csi", text.str());
    }
  }
  if (!c.quiet) {
    for (const auto& [label, n] : s.dataset.class_counts()) out << to_string(label) << ": " << n << '\n';
    out << "total: " << s.dataset.size() << " rows x " << s.dataset.width() << " features\n";
  }
  return kOk;
}

// ------------------------------------------------------------ featurize

struct FeaturizeArgs {
  std::vector<std::string> inputs;  // LABEL=PATH
  std::string output;
  std::string mac;
  bool keep_outliers = false;
  int width = kDefaultSubcarriers;
};

int cmd_featurize(const Globals& g, const FeaturizeArgs& a, std::ostream& out, std::ostream& err) {
  PipelineConfig c = base_config(g);
  if (!a.inputs.empty()) {
    c.paths.captures.clear();
    c.paths.dataset.reset();
    for (const auto& spec : a.inputs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) fail(kUsage, "--input expects LABEL=PATH, got '" + spec + "'");
      auto label = parse_class_label(spec.substr(0, eq));
      if (!label) fail(kUsage, "unknown class label '" + spec.substr(0, eq) + "'");
      c.paths.captures[*label] = spec.substr(eq + 1);
    }
  }
  if (!a.output.empty()) c.paths.out_dataset = a.output;
  if (!a.mac.empty()) {
    auto mac = MacAddress::parse(a.mac);
    if (!mac) fail(kUsage, "bad MAC address '" + a.mac + "'");
    c.preprocess.target_mac = *mac;
  }
  if (a.keep_outliers) c.preprocess.reject_outliers = false;
  if (c.paths.captures.empty()) fail(kUsage, "featurize needs at least one --input LABEL=PATH");
  if (!c.paths.out_dataset) fail(kUsage, "featurize needs --output");
  if (a.width < 1) fail(kUsage, "--width must be >= 1");
  for (const auto& [label, p] : c.paths.captures) require_input(p);
  require_output_dir(*c.paths.out_dataset);

  std::vector<FeatureVector> vectors;
  std::map<ParseFailureKind, std::size_t> failures;
  std::size_t lines = 0, parsed = 0;
  FeaturizeSummary total;
  for (const auto& [label, p] : c.paths.captures) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(kIo, "cannot open " + p.string());
    const CaptureParse cap = parse_capture(in, static_cast<std::size_t>(a.width));
    lines += cap.lines;
    parsed += cap.frames.size();
    for (const auto& f : cap.failures) ++failures[f.kind];
    Featurized fz = featurize_capture(cap.frames, c.preprocess, label);
    total.input_frames += fz.summary.input_frames;
    total.foreign_mac += fz.summary.foreign_mac;
    total.zero_subcarrier += fz.summary.zero_subcarrier;
    total.outliers += fz.summary.outliers;
    total.kept += fz.summary.kept;
    for (auto& v : fz.vectors) vectors.push_back(std::move(v));
  }

  std::ostringstream tally;
  tally << "lines: " << lines << ", parsed frames: " << parsed << '\n';
  for (const auto& [kind, n] : failures) tally << "  rejected " << to_string(kind) << ": " << n << '\n';
  tally << "filtered: foreign MAC " << total.foreign_mac << ", zero subcarrier " << total.zero_subcarrier
        << ", outliers " << total.outliers << '\n';
  tally << "kept: " << total.kept << '\n';
  if (vectors.empty()) {
    err << tally.str();
    fail(kEmpty, "no frames survived featurization");
  }
  write_dataset(assemble_dataset(vectors), *c.paths.out_dataset);
  if (!c.quiet) out << tally.str();
  return kOk;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
  std::string dataset;
  std::vector<std::string> scenarios;
  std::string mode;
  std::optional<int> k;
  std::vector<std::string> models;
  std::optional<int> search_budget;
  std::string report_text;
  std::string report_csv;
  std::string save_model;
};

int cmd_eval(const Globals& g, const EvalArgs& a, std::ostream& out, std::ostream& err) {
  PipelineConfig c = base_config(g);
  if (!a.dataset.empty()) {
    c.paths.dataset = a.dataset;
    c.paths.captures.clear();
  }
  if (!a.scenarios.empty()) {
    c.eval.scenarios.clear();
    for (const auto& s : a.scenarios) {
      auto sc = parse_scenario(s);
      if (!sc) fail(kUsage, "unknown scenario '" + s + "'");
      c.eval.scenarios.push_back(*sc);
    }
  }
  if (!a.mode.empty()) {
    auto m = parse_multiclass_mode(a.mode);
    if (!m) fail(kUsage, "unknown multiclass mode '" + a.mode + "'");
    c.eval.mode = *m;
  }
  if (a.k) {
    if (*a.k < 2) fail(kUsage, "--k must be >= 2");
    c.eval.k = *a.k;
  }
  if (g.seed) c.eval.seed = *g.seed;
  if (!a.models.empty()) {
    std::vector<ModelSpec> chosen;
    for (const auto& name : a.models) {
      auto f = parse_model_family(name);
      if (!f) fail(kUsage, "unknown model family '" + name + "'");
      auto it = std::find_if(c.models.begin(), c.models.end(), [&](const ModelSpec& m) { return m.family() == *f; });
      chosen.push_back(it != c.models.end() ? *it : ModelSpec::defaults(*f));
    }
    c.models = chosen;
  }
  if (c.models.empty()) {
    for (auto f : kAllFamilies) c.models.push_back(ModelSpec::defaults(f));
  }
  if (a.search_budget) {
    if (*a.search_budget < 1) fail(kUsage, "--search-budget must be >= 1");
    for (auto& m : c.models) {
      if (m.family() != ModelFamily::Lstm) m.search_budget = *a.search_budget;
    }
  }
  if (!a.report_text.empty()) c.paths.report_text = a.report_text;
  if (!a.report_csv.empty()) c.paths.report_csv = a.report_csv;
  if (!a.save_model.empty()) c.paths.model_out = a.save_model;
  if (!c.paths.dataset) fail(kUsage, "eval needs --dataset");
  if (c.paths.model_out && (c.models.size() != 1 || c.eval.scenarios.size() != 1)) {
    fail(kUsage, "saving a model needs exactly one model and one scenario");
  }
  require_input(*c.paths.dataset);
  for (const auto& p : {c.paths.report_text, c.paths.report_csv, c.paths.model_out}) {
    if (p) require_output_dir(*p);
  }

  Dataset data;
  try {
    data = load_dataset(*c.paths.dataset);
  } catch (const DatasetError& e) {
    fail(kIo, e.what());
  }
  std::vector<ScenarioData> scenarios;
  for (auto s : c.eval.scenarios) {
    try {
      scenarios.push_back(select_scenario(data, s, c.eval.mode));
    } catch (const EvalError& e) {
      fail(kUsage, e.what());
    }
  }

  const std::string hash = config_hash(c);
  std::vector<CvReport> reports;
  for (const auto& sd : scenarios) {
    for (const auto& spec : c.models) {
      try {
        reports.push_back(cross_validate(sd, spec, c.eval.k, c.eval.seed, c.threads));
      } catch (const EvalError& e) {
        if (e.kind() == EvalError::Kind::TrainingFailure) fail(kTraining, e.what());
        fail(kUsage, e.what());
      }
      if (!c.quiet) err << "done: " << sd.name() << " / " << reports.back().model << '\n';
    }
  }
  const std::string text = render_text(reports, hash);
  if (c.paths.report_text) write_file_atomic(*c.paths.report_text, text);
  if (c.paths.report_csv) write_file_atomic(*c.paths.report_csv, render_csv(reports, hash));
  if (c.paths.model_out) {
    const auto& sd = scenarios.front();
    try {
      save_model(train_model(c.models.front(), sd.x, sd.y, c.eval.seed), *c.paths.model_out);
    } catch (const LearnError& e) {
      fail(kTraining, std::string("final model: ") + e.what());
    }
  }
  if (!c.quiet) out << text;
  return kOk;
}

// --------------------------------------------------------------- report

int cmd_report(const Globals& g, const std::string& input, const std::string& output, std::ostream& out) {
  require_input(input);
  if (!output.empty()) require_output_dir(output);
  std::ifstream in(input);
  if (!in) fail(kIo, "cannot open " + input);
  ParsedReport parsed;
  try {
    parsed = parse_csv_report(in);
  } catch (const std::invalid_argument& e) {
    fail(kIo, input + ": " + e.what());
  }
  const std::string text = render_text(parsed.reports, parsed.config_hash);
  if (!output.empty()) write_file_atomic(output, text);
  if (output.empty() || !g.quiet) out << text;
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wi-Fi CSI water contamination pipeline", "csiwater"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "JSON pipeline config");
  app.add_option("--seed", g.seed, "seed for synth or eval (overrides config)");
  app.add_option("--threads", g.threads, "worker threads for folds");
  app.add_flag("--quiet", g.quiet, "suppress progress and summaries");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "generate a synthetic capture and/or dataset");
  synth->add_option("--preset", sa.preset, "preset name");
  synth->add_option("--out-dataset", sa.out_dataset, "dataset CSV to write");
  synth->add_option("--out-capture", sa.out_capture, "capture prefix; writes PREFIX_<Label>.csi");

  FeaturizeArgs fa;
  auto* featurize = app.add_subcommand("featurize", "parse captures into a dataset CSV");
  featurize->add_option("--input", fa.inputs, "LABEL=PATH, repeatable");
  featurize->add_option("--output", fa.output, "dataset CSV to write");
  featurize->add_option("--mac", fa.mac, "keep only frames from this source MAC");
  featurize->add_flag("--keep-outliers", fa.keep_outliers, "disable Hampel frame rejection");
  featurize->add_option("--width", fa.width, "expected subcarriers per frame");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "stratified k-fold evaluation");
  eval->add_option("--dataset", ea.dataset, "dataset CSV");
  eval->add_option("--scenario", ea.scenarios, "CleanVs100ppm, CleanVs1000ppm or AllThree; repeatable");
  eval->add_option("--mode", ea.mode, "ThreeClass or PoisonedVsClean");
  eval->add_option("--k", ea.k, "folds");
  eval->add_option("--model", ea.models, "knn, svm, adaboost or lstm; repeatable");
  eval->add_option("--search-budget", ea.search_budget, "random-search draws per fold");
  eval->add_option("--report-text", ea.report_text, "text table to write");
  eval->add_option("--report-csv", ea.report_csv, "CSV report to write");
  eval->add_option("--save-model", ea.save_model, "train on the full scenario and save");

  std::string report_in, report_out;
  auto* report = app.add_subcommand("report", "render a CSV report as a text table");
  report->add_option("input", report_in, "CSV report")->required();
  report->add_option("--output", report_out, "text file to write");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*synth) return cmd_synth(g, sa, out);
    if (*featurize) return cmd_featurize(g, fa, out, err);
    if (*eval) return cmd_eval(g, ea, out, err);
    if (*report) return cmd_report(g, report_in, report_out, out);
  } catch (const Failure& f) {
    err << "error: " << f.message << '\n';
    return f.code;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const DatasetError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace csiwater::cli
