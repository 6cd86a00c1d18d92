// Copyright 2026 The swaybench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: stimulus generation, trial simulation, CSV
// ingestion, analysis, surrogate references, scoring and batch reports.
//
// Exit codes: 0 ok, 2 validation error, 3 trial failure (fall),
// 4 analysis error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "swaybench/errors.h"
#include "swaybench/pipeline.h"
#include "swaybench/scoring.h"
#include "swaybench/stimulus.h"
#include "swaybench/surrogate.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace swaybench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitFall = 3;
constexpr int kExitAnalysis = 4;

json ReadJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config", path + ": " + e.what());
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("output", "cannot write " + path.string());
  out << text;
}

void WriteJson(const fs::path& path, const json& j) {
  WriteText(path, j.dump(2) + "\n");
}

struct Options {
  std::string config;
  std::string preset = "standard";
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out = ".";
  std::string recording;
  std::string reference;
  std::string schema;
  std::string frf;
  std::string stimulus_config;
  int n_subjects = 38;
  int n_bootstrap = kDefaultBootstrap;
  int threads = 0;
  bool noise = false;
};

TrialConfig LoadTrialConfig(const Options& o) {
  TrialConfig c = TrialConfig::ForPreset(o.preset);
  if (!o.config.empty()) {
    json j = ReadJson(o.config);
    if (!j.contains("preset")) j["preset"] = o.preset;
    c = j.get<TrialConfig>();
  }
  if (o.seed_set) c.seed = o.seed;
  if (o.noise) c.noise = TypicalSensorNoise();
  return c;
}

PrtsConfig LoadStimulusConfig(const Options& o) {
  PrtsConfig c;
  if (!o.stimulus_config.empty()) c = ReadJson(o.stimulus_config).get<PrtsConfig>();
  return c;
}

ScoreOptions MakeScoreOptions(const Options& o) {
  ScoreOptions s;
  s.n_bootstrap = o.n_bootstrap;
  s.seed = o.seed;
  return s;
}

int GenerateStimulus(const Options& o) {
  PrtsConfig c;
  if (!o.config.empty()) c = ReadJson(o.config).get<PrtsConfig>();
  const SampledSignal s = GeneratePrts(c);
  const PrtsTiming t = DescribeTiming(c);
  fs::create_directories(o.out);
  std::ofstream csv(fs::path(o.out) / "stimulus.csv");
  WriteStimulusCsv(csv, s);
  WriteJson(fs::path(o.out) / "stimulus.json",
            {{"config", c},
             {"samples_per_period", t.samples_per_period},
             {"realized_period_s", t.realized_period},
             {"fundamental_hz", t.fundamental},
             {"peak_frequencies_hz", PeakFrequencies(c)}});
  std::cout << "wrote " << s.size() << " samples, period "
            << t.realized_period << " s, to " << o.out << "\n";
  return kExitOk;
}

int RunTrialVerb(const Options& o) {
  const TrialConfig c = LoadTrialConfig(o);
  fs::create_directories(o.out);
  WriteJson(fs::path(o.out) / "trial_config.json", c);
  const TrialRecording rec = RunTrial(c);
  ExportCsvFile(rec, (fs::path(o.out) / "recording.csv").string());
  std::cout << "trial '" << c.preset << "' completed, " << rec.com_sway.size()
            << " samples, config hash " << rec.metadata.config_hash << "\n";
  return kExitOk;
}

int Ingest(const Options& o) {
  CsvSchema schema;
  if (!o.schema.empty()) schema = ReadJson(o.schema).get<CsvSchema>();
  const TrialRecording rec = IngestCsvFile(o.recording, schema);
  fs::create_directories(o.out);
  ExportCsvFile(rec, (fs::path(o.out) / "recording.csv").string());
  std::cout << "ingested " << rec.com_sway.size() << " samples at "
            << rec.com_sway.sample_rate << " Hz, " << rec.joint_names.size()
            << " joints\n";
  return kExitOk;
}

void WriteReports(const std::vector<BenchmarkReport>& reports,
                  const ReferenceStats& ref, const std::string& out) {
  fs::create_directories(out);
  WriteJson(fs::path(out) / "report.json", ReportsToJson(reports, ref));
  const std::string summary = ReportSummary(reports);
  WriteText(fs::path(out) / "summary.txt", summary);
  WritePlotData(reports, ref, (fs::path(out) / "plots").string());
  for (const auto& r : reports) {
    const auto& frf = r.measurement.frf;
    WriteJson(fs::path(out) / ("frf_" + r.label + ".json"),
              SpectrumToJson("frf", frf.h, frf.plan));
  }
  std::cout << summary;
}

int AnalyzeVerb(const Options& o) {
  const ReferenceStats ref = LoadReference(o.reference);
  TrialRecording rec = IngestCsvFile(o.recording);
  if (rec.metadata.label.empty()) rec.metadata.label = "trial";
  AnalysisOptions a;
  a.stimulus = LoadStimulusConfig(o);
  a.score = MakeScoreOptions(o);
  WriteReports({Analyze(rec, ref, a)}, ref, o.out);
  return kExitOk;
}

int MakeReference(const Options& o) {
  SurrogateConfig c;
  if (!o.config.empty()) c = ReadJson(o.config).get<SurrogateConfig>();
  c.n_subjects = o.n_subjects;
  if (o.seed_set) c.seed = o.seed;
  if (o.threads > 0) c.threads = o.threads;
  const SurrogateResult r = SurrogateReference(c);
  fs::create_directories(o.out);
  SaveReference(r.stats, (fs::path(o.out) / "reference.json").string());
  std::cout << "reference from " << r.stats.n_subjects << " of "
            << c.n_subjects << " subjects";
  if (r.stats.ridge > 0.0) std::cout << ", ridge " << r.stats.ridge;
  std::cout << "\n";
  for (const auto& f : r.failures) {
    std::cout << "  subject " << f.subject << " failed: " << f.what << "\n";
  }
  return kExitOk;
}

int ScoreVerb(const Options& o) {
  const ReferenceStats ref = LoadReference(o.reference);
  const Frf frf = FrfFromJson(ReadJson(o.frf));
  const ScoreReport r = Score(frf, ref, MakeScoreOptions(o));
  std::cout << json(r).dump(2) << "\n";
  return kExitOk;
}

int Report(const Options& o) {
  const ReferenceStats ref = LoadReference(o.reference);
  const std::vector<std::string>& presets = PresetNames();
  std::vector<std::optional<TrialRecording>> recordings(presets.size());
  ParallelFor(static_cast<int>(presets.size()), o.threads, [&](int i) {
    TrialConfig c = LoadTrialConfig(o);
    c.preset = presets[i];
    c.controller = Preset(presets[i]);
    recordings[i] = RunTrial(c);
  });
  AnalysisOptions a;
  a.stimulus = LoadStimulusConfig(o);
  a.score = MakeScoreOptions(o);
  std::vector<BenchmarkReport> reports;
  for (const auto& rec : recordings) reports.push_back(Analyze(*rec, ref, a));
  WriteReports(reports, ref, o.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swaybench: posturography human-likeness benchmark"};
  app.require_subcommand(1);
  Options o;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& s) {
          o.seed = s;
          o.seed_set = true;
        },
        "random seed");
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("-o,--out", o.out, "output directory");
  };

  auto* gen = app.add_subcommand("generate-stimulus", "write a PRTS stimulus");
  gen->add_option("-c,--config", o.config, "stimulus config JSON")
      ->check(CLI::ExistingFile);
  add_out(gen);

  auto* run = app.add_subcommand("run-trial", "simulate one trial");
  run->add_option("-c,--config", o.config, "trial config JSON")
      ->check(CLI::ExistingFile);
  run->add_option("-p,--preset", o.preset, "controller preset")
      ->check(CLI::IsMember(PresetNames()));
  run->add_flag("--noise", o.noise, "enable typical sensor noise");
  add_seed(run);
  add_out(run);

  auto* ingest = app.add_subcommand("ingest", "validate a recording CSV");
  ingest->add_option("-r,--recording", o.recording, "recording CSV")
      ->required()
      ->check(CLI::ExistingFile);
  ingest->add_option("-s,--schema", o.schema, "column mapping JSON")
      ->check(CLI::ExistingFile);
  add_out(ingest);

  auto* analyze = app.add_subcommand("analyze", "analyze and score a recording");
  analyze->add_option("-r,--recording", o.recording, "recording CSV")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--reference", o.reference, "reference JSON")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--stimulus-config", o.stimulus_config,
                      "stimulus config JSON")
      ->check(CLI::ExistingFile);
  analyze->add_option("--bootstrap", o.n_bootstrap, "bootstrap resamples")
      ->check(CLI::PositiveNumber);
  add_seed(analyze);
  add_out(analyze);

  auto* make_ref =
      app.add_subcommand("make-reference", "build a surrogate reference");
  make_ref->add_option("-c,--config", o.config, "surrogate config JSON")
      ->check(CLI::ExistingFile);
  make_ref->add_option("-n,--subjects", o.n_subjects, "number of subjects")
      ->check(CLI::Range(2, 100000));
  make_ref->add_option("-j,--threads", o.threads, "worker threads");
  add_seed(make_ref);
  add_out(make_ref);

  auto* score = app.add_subcommand("score", "score an FRF file");
  score->add_option("--frf", o.frf, "FRF JSON")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--reference", o.reference, "reference JSON")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--bootstrap", o.n_bootstrap, "bootstrap resamples")
      ->check(CLI::PositiveNumber);
  add_seed(score);

  auto* report =
      app.add_subcommand("report", "run and score all controller presets");
  report->add_option("--reference", o.reference, "reference JSON")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("-c,--config", o.config, "base trial config JSON")
      ->check(CLI::ExistingFile);
  report->add_option("--stimulus-config", o.stimulus_config,
                     "stimulus config JSON")
      ->check(CLI::ExistingFile);
  report->add_option("--bootstrap", o.n_bootstrap, "bootstrap resamples")
      ->check(CLI::PositiveNumber);
  report->add_flag("--noise", o.noise, "enable typical sensor noise");
  report->add_option("-j,--threads", o.threads, "worker threads");
  add_seed(report);
  add_out(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen) return GenerateStimulus(o);
    if (*run) return RunTrialVerb(o);
    if (*ingest) return Ingest(o);
    if (*analyze) return AnalyzeVerb(o);
    if (*make_ref) return MakeReference(o);
    if (*score) return ScoreVerb(o);
    if (*report) return Report(o);
  } catch (const FallError& e) {
    std::cerr << "trial failed at t = " << e.time() << " s: " << e.what()
              << "\n";
    return kExitFall;
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IngestError& e) {
    std::cerr << "invalid recording: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DimensionError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "invalid JSON: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return kExitAnalysis;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAnalysis;
  }
  return kExitOk;
}
