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

#ifndef SWAYBENCH_PIPELINE_H_
#define SWAYBENCH_PIPELINE_H_

// Trial orchestration: closed-loop simulation, CSV exchange, alignment,
// FRF measurement, scoring and energy estimation.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "swaybench/dec_control.h"
#include "swaybench/plant.h"
#include "swaybench/scoring.h"
#include "swaybench/signal.h"
#include "swaybench/spectral.h"
#include "swaybench/stimulus.h"

namespace swaybench {

inline constexpr int kRecordingSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kTrialConfigSchemaVersion = 1;
// Minimum normalized cross-correlation accepted by Align().
inline constexpr double kAlignmentFloor = 0.2;
// Maximum relative deviation of a timestamp step from the nominal step.
inline constexpr double kIngestJitter = 0.01;
inline constexpr char kEnergyMethod[] =
    "rectified work: trapezoid of |tau * omega|, omega by central "
    "differences";

struct TrialConfig {
  std::string preset = "standard";  // label of the controller variant
  PlantParams plant = PlantParams::Default();
  DecParams controller = DecParams::Standard();
  // Recording rate and number of analysed periods.
  PrtsConfig stimulus = [] {
    PrtsConfig c;
    c.n_periods = 2;
    return c;
  }();
  double sim_rate = 1000.0;  // Hz, plant integration
  int warmup_periods = 1;    // simulated and discarded
  SensorNoise noise;
  std::uint64_t seed = 1;

  // Standard body with the named controller preset.
  static TrialConfig ForPreset(const std::string& preset);
  void Validate() const;
};

// FNV-1a over the canonical JSON serialisation, as 16 hex digits.
std::string ConfigHash(const nlohmann::json& config);

struct TrialMetadata {
  std::string source = "simulated";  // or "ingested"
  std::string label;
  std::uint64_t seed = 0;
  std::string config_hash;
  nlohmann::json config = nlohmann::json::object();
};

struct TrialRecording {
  SampledSignal stimulus;       // deg, commanded tilt (may be empty)
  SampledSignal measured_tilt;  // deg, from sensors
  SampledSignal com_sway;       // deg, from sensors
  std::vector<std::string> joint_names;
  std::vector<SampledSignal> joint_angles;   // deg
  std::vector<SampledSignal> joint_torques;  // N*m
  TrialMetadata metadata;

  // Shared sample rate and equal lengths; DimensionError otherwise.
  void Validate() const;
};

// Simulates warm-up plus the analysed periods and records the analysed
// part at the stimulus rate. Throws FallError (with the time) on a fall.
TrialRecording RunTrial(const TrialConfig& config);

struct AlignmentResult {
  int lag = 0;               // samples; recorded[n] ~ ideal[n - lag]
  double correlation = 0.0;  // normalized, at the chosen lag
};

// Circular cross-correlation of the period-folded recording with one
// period of the ideal stimulus over lags in (-P/2, P/2]. Ties go to the
// smallest |lag| (then the positive one). AlignmentError when the
// recording is shorter than one period, the rates differ or the peak is
// below kAlignmentFloor.
AlignmentResult AlignDetailed(const SampledSignal& recorded,
                              const SampledSignal& ideal);
int Align(const SampledSignal& recorded, const SampledSignal& ideal);

// Rectified mechanical work of one joint in J. Angles in rad or deg.
double EstimateEnergy(const SampledSignal& torque, const SampledSignal& angle);

struct EnergyEstimate {
  std::vector<std::string> joints;
  std::vector<double> per_joint;  // J
  double ankle = 0.0;             // J, ankle joint(s)
  double total = 0.0;             // J
};

EnergyEstimate EstimateTrialEnergy(const TrialRecording& recording);

struct FrfMeasurement {
  Frf frf;
  WeightVector weights;  // from the aligned ideal input
  AlignmentResult alignment;
  int n_periods = 0;
};

// Aligns the measured tilt to the ideal stimulus, then estimates the FRF
// from COM sway against the aligned ideal over whole periods. Errors are
// rethrown as AnalysisError tagged "align", "extract" or "frf".
FrfMeasurement MeasureFrf(const TrialRecording& recording,
                          const PrtsConfig& stimulus,
                          const BandPlan& plan = DefaultBandPlan());

struct AnalysisOptions {
  PrtsConfig stimulus;
  ScoreOptions score;
};

struct BenchmarkReport {
  std::string label;
  ScoreReport score;
  FrfMeasurement measurement;
  std::optional<EnergyEstimate> energy;
  nlohmann::json manifest = nlohmann::json::object();
};

// Errors carry the failing stage ("align", "extract", "frf", "score",
// "energy").
BenchmarkReport Analyze(const TrialRecording& recording,
                        const ReferenceStats& ref,
                        const AnalysisOptions& options = {});

nlohmann::json ReportToJson(const BenchmarkReport& report);
nlohmann::json ReportsToJson(const std::vector<BenchmarkReport>& reports,
                             const ReferenceStats& ref);
std::string ReportSummary(const std::vector<BenchmarkReport>& reports);
// Writes frf_magnitude.dat, frf_phase.dat and score_cdf.dat into dir.
void WritePlotData(const std::vector<BenchmarkReport>& reports,
                   const ReferenceStats& ref, const std::string& dir);

// Column mapping for CSV exchange. Empty joint lists are filled from the
// header: columns "angle_<joint>_deg" and "torque_<joint>_Nm".
struct CsvSchema {
  std::string time = "time_s";
  std::string stimulus = "stimulus_deg";  // optional column
  std::string measured_tilt = "support_tilt_deg";
  std::string com_sway = "com_sway_deg";
  std::vector<std::string> joints;
  std::map<std::string, std::string> angle_columns;   // joint -> column
  std::map<std::string, std::string> torque_columns;  // joint -> column
};

void ExportCsv(const TrialRecording& recording, std::ostream& out);
void ExportCsvFile(const TrialRecording& recording, const std::string& path);
// IngestError names the 1-based data row for NaNs, unparsable cells and
// timestamp jitter above kIngestJitter.
TrialRecording IngestCsv(std::istream& in, const CsvSchema& schema = {});
TrialRecording IngestCsvFile(const std::string& path,
                             const CsvSchema& schema = {});

// Runs body(i) for i in [0, n) on up to `threads` workers (0: hardware
// concurrency). Results must be written by index; the first exception in
// index order is rethrown after all workers finish.
void ParallelFor(int n, int threads, const std::function<void(int)>& body);

void to_json(nlohmann::json& j, const TrialConfig& c);
void from_json(const nlohmann::json& j, TrialConfig& c);
void from_json(const nlohmann::json& j, CsvSchema& s);
void to_json(nlohmann::json& j, const EnergyEstimate& e);

}  // namespace swaybench

#endif  // SWAYBENCH_PIPELINE_H_
