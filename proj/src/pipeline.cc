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

#include "swaybench/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "swaybench/errors.h"

namespace swaybench {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// n / d when n is (to 1e-9) an integer multiple of d, else -1.
long IntegerRatio(double n, double d) {
  const double r = n / d;
  const double rounded = std::round(r);
  if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * rounded) return -1;
  return static_cast<long>(rounded);
}

SampledSignal MakeSignal(double rate, Unit units, double t0,
                         std::size_t reserve) {
  SampledSignal s;
  s.sample_rate = rate;
  s.units = units;
  s.t0 = t0;
  s.values.reserve(reserve);
  return s;
}

double ToRadians(double value, Unit units) {
  return units == Unit::kDegrees ? value * kDeg : value;
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(Trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <typename F>
auto Staged(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const AnalysisError&) {
    throw;
  } catch (const std::exception& e) {
    throw AnalysisError(stage, e.what());
  }
}

}  // namespace

TrialConfig TrialConfig::ForPreset(const std::string& preset) {
  TrialConfig c;
  c.preset = preset;
  c.controller = Preset(preset);
  return c;
}

void TrialConfig::Validate() const {
  plant.Validate();
  controller.Validate();
  stimulus.Validate();
  noise.Validate();
  if (controller.NumJoints() < plant.NumLinks()) {
    throw ConfigError("controller", "fewer joint modules than plant links");
  }
  if (!(sim_rate > 0.0)) throw ConfigError("sim_rate_hz", "must be > 0");
  if (warmup_periods < 0) {
    throw ConfigError("warmup_periods", "must be >= 0");
  }
  const long per_tick = IntegerRatio(sim_rate, controller.tick_rate);
  const long per_record = IntegerRatio(sim_rate, stimulus.sample_rate);
  if (per_tick < 1) {
    throw ConfigError("sim_rate_hz", "must be a multiple of the tick rate");
  }
  if (per_record < 1 || per_record % per_tick != 0) {
    throw ConfigError("stimulus.sample_rate",
                      "recording instants must fall on controller ticks");
  }
  PrtsConfig fast = stimulus;
  fast.sample_rate = sim_rate;
  if (DescribeTiming(fast).samples_per_period !=
      per_record * DescribeTiming(stimulus).samples_per_period) {
    throw ConfigError("sim_rate_hz",
                      "stimulus period is not commensurate with both rates");
  }
}

std::string ConfigHash(const nlohmann::json& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void TrialRecording::Validate() const {
  std::vector<const SampledSignal*> all = {&measured_tilt, &com_sway};
  if (!stimulus.values.empty()) all.push_back(&stimulus);
  for (const auto& s : joint_angles) all.push_back(&s);
  for (const auto& s : joint_torques) all.push_back(&s);
  for (const auto* s : all) {
    s->Validate();
    if (s->sample_rate != measured_tilt.sample_rate) {
      throw DimensionError("recording signals differ in sample rate");
    }
    if (s->size() != measured_tilt.size()) {
      throw DimensionError("recording signals differ in length");
    }
  }
  if (joint_angles.size() != joint_names.size() ||
      joint_torques.size() != joint_names.size()) {
    throw DimensionError("one angle and one torque signal per joint");
  }
}

TrialRecording RunTrial(const TrialConfig& config) {
  config.Validate();
  const PlantParams& plant = config.plant;
  const int n = plant.NumLinks();
  DecController controller(config.controller.Truncated(n), plant);

  const long per_tick = IntegerRatio(config.sim_rate,
                                     config.controller.tick_rate);
  const long per_record = IntegerRatio(config.sim_rate,
                                       config.stimulus.sample_rate);
  PrtsConfig fast = config.stimulus;
  fast.sample_rate = config.sim_rate;
  fast.n_periods = 1;
  const SampledSignal period = GeneratePrts(fast);  // deg
  const long steps_per_period = static_cast<long>(period.size());
  const long warmup = steps_per_period * config.warmup_periods;
  const long total =
      warmup + steps_per_period * config.stimulus.n_periods;
  const double dt = 1.0 / config.sim_rate;
  const double fs = config.stimulus.sample_rate;
  const std::size_t n_rec = static_cast<std::size_t>((total - warmup) /
                                                     per_record);
  const double t_rec = static_cast<double>(warmup) * dt;

  TrialRecording rec;
  rec.stimulus = MakeSignal(fs, Unit::kDegrees, t_rec, n_rec);
  rec.measured_tilt = MakeSignal(fs, Unit::kDegrees, t_rec, n_rec);
  rec.com_sway = MakeSignal(fs, Unit::kDegrees, t_rec, n_rec);
  for (int i = 0; i < n; ++i) {
    const std::string& name = config.controller.joints[i].name;
    rec.joint_names.push_back(name.empty() ? "joint" + std::to_string(i)
                                           : name);
    rec.joint_angles.push_back(MakeSignal(fs, Unit::kDegrees, t_rec, n_rec));
    rec.joint_torques.push_back(
        MakeSignal(fs, Unit::kNewtonMeters, t_rec, n_rec));
  }
  const nlohmann::json cfg_json = config;
  rec.metadata.source = "simulated";
  rec.metadata.label = config.preset;
  rec.metadata.seed = config.seed;
  rec.metadata.config = cfg_json;
  rec.metadata.config_hash = ConfigHash(cfg_json);

  std::mt19937_64 rng(config.seed);
  PlantState state = PlantState::Upright(n);
  std::vector<double> torques(n, 0.0);
  std::vector<double> phi(n);
  for (long k = 0; k < total; ++k) {
    if (k % per_tick == 0) {
      const SensorReadout r =
          ReadSensors(state, plant, torques, config.noise, rng);
      torques = controller.Tick(r);
      if (k >= warmup && (k - warmup) % per_record == 0) {
        // Segment angles reconstructed from the head and joint sensors.
        double above = 0.0;
        for (int i = n - 1; i >= 0; --i) {
          phi[i] = r.head_angle - above;
          above += r.joint_angles[i];
        }
        rec.stimulus.values.push_back(period.values[k % steps_per_period]);
        rec.measured_tilt.values.push_back((r.head_angle - above) / kDeg);
        rec.com_sway.values.push_back(
            ComSwayFromSegmentAngles(phi, plant) / kDeg);
        for (int i = 0; i < n; ++i) {
          rec.joint_angles[i].values.push_back(r.joint_angles[i] / kDeg);
          rec.joint_torques[i].values.push_back(torques[i]);
        }
      }
    }
    const double tilt =
        period.values[(k + 1) % steps_per_period] * kDeg;
    state = Step(state, torques, tilt, dt, plant);
  }
  return rec;
}

AlignmentResult AlignDetailed(const SampledSignal& recorded,
                              const SampledSignal& ideal) {
  if (recorded.sample_rate != ideal.sample_rate) {
    throw AlignmentError("recorded and ideal sample rates differ");
  }
  const std::size_t p = ideal.size();
  if (p < 2) throw AlignmentError("ideal stimulus period is empty");
  if (recorded.size() < p) {
    throw AlignmentError("recording (" + std::to_string(recorded.size()) +
                         " samples) is shorter than one stimulus period (" +
                         std::to_string(p) + ")");
  }
  // Fold whole periods into one and remove both means.
  const std::size_t periods = recorded.size() / p;
  std::vector<double> folded(p, 0.0);
  for (std::size_t k = 0; k < periods; ++k) {
    for (std::size_t i = 0; i < p; ++i) folded[i] += recorded.values[k * p + i];
  }
  double mean_r = 0.0;
  double mean_i = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    mean_r += folded[i];
    mean_i += ideal.values[i];
  }
  mean_r /= static_cast<double>(p);
  mean_i /= static_cast<double>(p);
  std::vector<double> a(p);
  std::vector<double> b(p);
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    a[i] = folded[i] - mean_r;
    b[i] = ideal.values[i] - mean_i;
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  const double denom = std::sqrt(norm_a * norm_b);
  if (!(denom > 0.0)) {
    throw AlignmentError("recording or ideal stimulus has no variation");
  }

  const long np = static_cast<long>(p);
  const long lo = -((np - 1) / 2);  // lags in (-P/2, P/2]
  const long hi = np / 2;
  double best = -std::numeric_limits<double>::infinity();
  long best_lag = 0;
  for (long lag = lo; lag <= hi; ++lag) {
    const std::size_t shift = static_cast<std::size_t>(((lag % np) + np) % np);
    double c = 0.0;
    // a[i] against b[i - lag]
    for (std::size_t i = 0; i < p; ++i) {
      const std::size_t j = i >= shift ? i - shift : i + p - shift;
      c += a[i] * b[j];
    }
    const bool better =
        c > best ||
        (c == best && (std::labs(lag) < std::labs(best_lag) ||
                       (std::labs(lag) == std::labs(best_lag) && lag > 0)));
    if (better) {
      best = c;
      best_lag = lag;
    }
  }
  const double rho = best / denom;
  if (rho < kAlignmentFloor) {
    throw AlignmentError("cross-correlation peak " + FormatDouble(rho) +
                         " is below the significance floor");
  }
  return {static_cast<int>(best_lag), rho};
}

int Align(const SampledSignal& recorded, const SampledSignal& ideal) {
  return AlignDetailed(recorded, ideal).lag;
}

double EstimateEnergy(const SampledSignal& torque,
                      const SampledSignal& angle) {
  if (torque.size() != angle.size()) {
    throw DimensionError("torque and angle lengths differ");
  }
  if (torque.sample_rate != angle.sample_rate) {
    throw DimensionError("torque and angle sample rates differ");
  }
  const std::size_t n = torque.size();
  if (n < 2) return 0.0;
  const double dt = angle.dt();
  auto theta = [&](std::size_t i) {
    return ToRadians(angle.values[i], angle.units);
  };
  auto power = [&](std::size_t i) {
    double omega;
    if (i == 0) {
      omega = (theta(1) - theta(0)) / dt;
    } else if (i == n - 1) {
      omega = (theta(n - 1) - theta(n - 2)) / dt;
    } else {
      omega = (theta(i + 1) - theta(i - 1)) / (2.0 * dt);
    }
    return std::abs(torque.values[i] * omega);
  };
  double work = 0.0;
  double previous = power(0);
  for (std::size_t i = 1; i < n; ++i) {
    const double current = power(i);
    work += 0.5 * (previous + current) * dt;
    previous = current;
  }
  return work;
}

EnergyEstimate EstimateTrialEnergy(const TrialRecording& recording) {
  EnergyEstimate e;
  e.joints = recording.joint_names;
  for (std::size_t i = 0; i < recording.joint_names.size(); ++i) {
    const double w = EstimateEnergy(recording.joint_torques[i],
                                    recording.joint_angles[i]);
    e.per_joint.push_back(w);
    e.total += w;
    if (recording.joint_names[i].find("ankle") != std::string::npos) {
      e.ankle += w;
    }
  }
  return e;
}

FrfMeasurement MeasureFrf(const TrialRecording& recording,
                          const PrtsConfig& stimulus, const BandPlan& plan) {
  FrfMeasurement m;
  PrtsConfig one = stimulus;
  one.n_periods = 1;
  one.sample_rate = recording.measured_tilt.sample_rate;
  const SampledSignal ideal = Staged("align", [&] {
    recording.Validate();
    return GeneratePrts(one);
  });
  m.alignment =
      Staged("align", [&] { return AlignDetailed(recording.measured_tilt,
                                                 ideal); });

  const std::size_t p = ideal.size();
  m.n_periods = static_cast<int>(recording.com_sway.size() / p);
  const std::size_t used = p * static_cast<std::size_t>(m.n_periods);
  SampledSignal u = ideal;
  SampledSignal y = recording.com_sway;
  u.values.resize(used);
  y.values.resize(used);
  const long np = static_cast<long>(p);
  for (std::size_t i = 0; i < used; ++i) {
    const long j = ((static_cast<long>(i % p) - m.alignment.lag) % np + np) % np;
    u.values[i] = ideal.values[static_cast<std::size_t>(j)];
  }
  std::vector<Complex> u_peaks;
  std::vector<Complex> y_peaks;
  Staged("extract", [&] {
    u_peaks = ExtractPeaks(u, plan, m.n_periods);
    y_peaks = ExtractPeaks(y, plan, m.n_periods);
    return 0;
  });
  Staged("frf", [&] {
    m.frf = EstimateFrf(u_peaks, y_peaks, plan);
    m.weights = WeightsFromInput(u_peaks, plan);
    return 0;
  });
  return m;
}

BenchmarkReport Analyze(const TrialRecording& recording,
                        const ReferenceStats& ref,
                        const AnalysisOptions& options) {
  BenchmarkReport report;
  report.label = recording.metadata.label;
  report.measurement = MeasureFrf(recording, options.stimulus, ref.plan);
  report.score = Staged("score", [&] {
    return Score(report.measurement.frf, ref, options.score);
  });
  if (!recording.joint_names.empty()) {
    report.energy =
        Staged("energy", [&] { return EstimateTrialEnergy(recording); });
  }
  report.manifest = {
      {"source", recording.metadata.source},
      {"seed", recording.metadata.seed},
      {"config_hash", recording.metadata.config_hash},
      {"config", recording.metadata.config},
      {"stimulus", options.stimulus},
      {"dft_convention", kDftConvention},
      {"alignment",
       {{"method", "circular cross-correlation, lags in (-P/2, P/2]"},
        {"significance_floor", kAlignmentFloor}}},
      {"energy_method", kEnergyMethod},
      {"bootstrap",
       {{"n", options.score.n_bootstrap}, {"seed", options.score.seed}}},
      {"reference_provenance", ref.provenance},
  };
  return report;
}

void to_json(nlohmann::json& j, const EnergyEstimate& e) {
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t i = 0; i < e.joints.size(); ++i) {
    per[e.joints[i]] = e.per_joint[i];
  }
  j = nlohmann::json{{"per_joint_j", per},
                     {"ankle_j", e.ankle},
                     {"total_j", e.total},
                     {"method", kEnergyMethod}};
}

nlohmann::json ReportToJson(const BenchmarkReport& r) {
  const auto& m = r.measurement;
  std::vector<double> magnitude;
  std::vector<double> phase;
  for (const auto& h : m.frf.h) {
    magnitude.push_back(std::abs(h));
    phase.push_back(std::arg(h) / kDeg);
  }
  nlohmann::json j = {
      {"label", r.label},
      {"score", r.score},
      {"frf", SpectrumToJson("frf", m.frf.h, m.frf.plan)},
      {"frf_magnitude", magnitude},
      {"frf_phase_deg", phase},
      {"input_weights", m.weights.w},
      {"alignment",
       {{"lag_samples", m.alignment.lag},
        {"correlation", m.alignment.correlation}}},
      {"analysed_periods", m.n_periods},
      {"energy", r.energy ? nlohmann::json(*r.energy) : nlohmann::json()},
      {"manifest", r.manifest},
  };
  return j;
}

nlohmann::json ReportsToJson(const std::vector<BenchmarkReport>& reports,
                             const ReferenceStats& ref) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& r : reports) trials.push_back(ReportToJson(r));
  return {{"schema", "swaybench.report"},
          {"schema_version", kReportSchemaVersion},
          {"band_plan", ref.plan},
          {"reference",
           {{"n_subjects", ref.n_subjects},
            {"sample_scores", ref.sample_scores},
            {"ridge", ref.ridge},
            {"provenance", ref.provenance}}},
          {"trials", trials}};
}

std::string ReportSummary(const std::vector<BenchmarkReport>& reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-12s %10s %12s %8s %17s %10s\n",
                "config", "score_D", "mahalanobis", "CDF", "CDF 95% CI",
                "energy_J");
  out << line;
  for (const auto& r : reports) {
    const double energy = r.energy ? r.energy->total : std::nan("");
    std::snprintf(line, sizeof(line),
                  "%-12s %10.4f %12.4f %7.1f%% [%5.1f%%, %5.1f%%] %10.3f\n",
                  r.label.c_str(), r.score.score_d, r.score.mahalanobis,
                  100.0 * r.score.cdf, 100.0 * r.score.cdf_ci_low,
                  100.0 * r.score.cdf_ci_high, energy);
    out << line;
  }
  return out.str();
}

void WritePlotData(const std::vector<BenchmarkReport>& reports,
                   const ReferenceStats& ref, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto path = [&](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };
  std::ofstream mag(path("frf_magnitude.dat"));
  std::ofstream ph(path("frf_phase.dat"));
  mag << "# f_hz";
  ph << "# f_hz";
  for (const auto& r : reports) {
    mag << ' ' << r.label;
    ph << ' ' << r.label;
  }
  mag << '\n';
  ph << '\n';
  for (int k = 0; k < ref.plan.NumBands(); ++k) {
    mag << FormatDouble(ref.plan.representative[k]);
    ph << FormatDouble(ref.plan.representative[k]);
    for (const auto& r : reports) {
      const Complex h = r.measurement.frf.h[k];
      mag << ' ' << FormatDouble(std::abs(h));
      ph << ' ' << FormatDouble(std::arg(h) / kDeg);
    }
    mag << '\n';
    ph << '\n';
  }
  std::ofstream cdf(path("score_cdf.dat"));
  cdf << "# kind label score_d cdf\n";
  std::vector<double> sorted = ref.sample_scores;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cdf << "reference - " << FormatDouble(sorted[i]) << ' '
        << FormatDouble(static_cast<double>(i) /
                        static_cast<double>(sorted.size()))
        << '\n';
  }
  for (const auto& r : reports) {
    cdf << "trial " << r.label << ' ' << FormatDouble(r.score.score_d) << ' '
        << FormatDouble(r.score.cdf) << '\n';
  }
  if (!mag || !ph || !cdf) {
    throw ConfigError("output", "cannot write plot data to " + dir);
  }
}

void ExportCsv(const TrialRecording& rec, std::ostream& out) {
  rec.Validate();
  out << "# schema: swaybench.recording\n"
      << "# schema_version: " << kRecordingSchemaVersion << '\n'
      << "# source: " << rec.metadata.source << '\n'
      << "# label: " << rec.metadata.label << '\n'
      << "# seed: " << rec.metadata.seed << '\n'
      << "# config_hash: " << rec.metadata.config_hash << '\n'
      << "# sample_rate_hz: " << FormatDouble(rec.measured_tilt.sample_rate)
      << '\n'
      << "# dt_s: " << FormatDouble(rec.measured_tilt.dt()) << '\n';
  const bool has_stimulus = !rec.stimulus.values.empty();
  out << "time_s";
  if (has_stimulus) out << ",stimulus_deg";
  out << ",support_tilt_deg,com_sway_deg";
  for (const auto& name : rec.joint_names) {
    out << ",angle_" << name << "_deg,torque_" << name << "_Nm";
  }
  out << '\n';
  for (std::size_t i = 0; i < rec.measured_tilt.size(); ++i) {
    out << FormatDouble(rec.measured_tilt.TimeAt(i));
    if (has_stimulus) out << ',' << FormatDouble(rec.stimulus.values[i]);
    out << ',' << FormatDouble(rec.measured_tilt.values[i]) << ','
        << FormatDouble(rec.com_sway.values[i]);
    for (std::size_t j = 0; j < rec.joint_names.size(); ++j) {
      out << ',' << FormatDouble(rec.joint_angles[j].values[i]) << ','
          << FormatDouble(rec.joint_torques[j].values[i]);
    }
    out << '\n';
  }
}

void ExportCsvFile(const TrialRecording& recording, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("output", "cannot write " + path);
  ExportCsv(recording, out);
}

TrialRecording IngestCsv(std::istream& in, const CsvSchema& schema_in) {
  CsvSchema schema = schema_in;
  std::map<std::string, std::string> header_meta;
  std::string line;
  std::vector<std::string> columns;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        header_meta[Trim(line.substr(1, colon - 1))] =
            Trim(line.substr(colon + 1));
      }
      continue;
    }
    columns = SplitCsvLine(line);
    break;
  }
  if (columns.empty()) throw IngestError(0, "no header row");
  std::map<std::string, int> index;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    index[columns[c]] = static_cast<int>(c);
  }
  auto require = [&](const std::string& name) {
    const auto it = index.find(name);
    if (it == index.end()) throw IngestError(0, "missing column " + name);
    return it->second;
  };
  if (schema.joints.empty()) {
    for (const auto& c : columns) {
      if (c.size() > 10 && c.rfind("angle_", 0) == 0 &&
          c.compare(c.size() - 4, 4, "_deg") == 0) {
        schema.joints.push_back(c.substr(6, c.size() - 10));
      }
    }
  }
  const int c_time = require(schema.time);
  const int c_tilt = require(schema.measured_tilt);
  const int c_sway = require(schema.com_sway);
  const auto stim_it = index.find(schema.stimulus);
  const int c_stim = stim_it == index.end() ? -1 : stim_it->second;
  std::vector<int> c_angle;
  std::vector<int> c_torque;
  for (const auto& joint : schema.joints) {
    const auto a = schema.angle_columns.find(joint);
    const auto t = schema.torque_columns.find(joint);
    c_angle.push_back(require(a != schema.angle_columns.end()
                                  ? a->second
                                  : "angle_" + joint + "_deg"));
    c_torque.push_back(require(t != schema.torque_columns.end()
                                   ? t->second
                                   : "torque_" + joint + "_Nm"));
  }

  std::vector<double> time;
  std::vector<std::vector<double>> data(columns.size());
  int row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ++row;
    const auto cells = SplitCsvLine(line);
    if (cells.size() != columns.size()) {
      throw IngestError(row, "expected " + std::to_string(columns.size()) +
                                 " cells, found " +
                                 std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      std::size_t used = 0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[c].size()) {
        throw IngestError(row, "column " + columns[c] + ": cannot parse '" +
                                   cells[c] + "'");
      }
      if (!std::isfinite(v)) {
        throw IngestError(row, "column " + columns[c] + " is not finite");
      }
      data[c].push_back(v);
    }
  }
  if (row < 2) throw IngestError(0, "at least two data rows required");

  const auto& t = data[c_time];
  double rate;
  if (header_meta.count("sample_rate_hz")) {
    rate = std::stod(header_meta["sample_rate_hz"]);
  } else {
    std::vector<double> steps;
    for (std::size_t i = 1; i < t.size(); ++i) steps.push_back(t[i] - t[i - 1]);
    std::nth_element(steps.begin(), steps.begin() + steps.size() / 2,
                     steps.end());
    rate = 1.0 / steps[steps.size() / 2];
  }
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw IngestError(0, "cannot determine a positive sample rate");
  }
  const double step = 1.0 / rate;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double dev = std::abs((t[i] - t[i - 1]) - step) / step;
    if (dev > kIngestJitter) {
      throw IngestError(static_cast<int>(i) + 1,
                        "timestamp step deviates " +
                            FormatDouble(100.0 * dev) +
                            "% from the nominal " + FormatDouble(step) +
                            " s");
    }
  }

  auto signal = [&](int c, Unit units) {
    SampledSignal s;
    s.values = data[c];
    s.sample_rate = rate;
    s.units = units;
    s.t0 = t.front();
    return s;
  };
  TrialRecording rec;
  if (c_stim >= 0) rec.stimulus = signal(c_stim, Unit::kDegrees);
  rec.measured_tilt = signal(c_tilt, Unit::kDegrees);
  rec.com_sway = signal(c_sway, Unit::kDegrees);
  for (std::size_t j = 0; j < schema.joints.size(); ++j) {
    rec.joint_names.push_back(schema.joints[j]);
    rec.joint_angles.push_back(signal(c_angle[j], Unit::kDegrees));
    rec.joint_torques.push_back(signal(c_torque[j], Unit::kNewtonMeters));
  }
  rec.metadata.source = "ingested";
  rec.metadata.label = header_meta.count("label") ? header_meta["label"] : "";
  if (header_meta.count("seed")) {
    rec.metadata.seed = std::stoull(header_meta["seed"]);
  }
  rec.metadata.config_hash =
      header_meta.count("config_hash") ? header_meta["config_hash"] : "";
  rec.metadata.config = {{"origin", header_meta.count("source")
                                        ? header_meta["source"]
                                        : "external"}};
  rec.Validate();
  return rec;
}

TrialRecording IngestCsvFile(const std::string& path,
                             const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IngestError(0, "cannot open " + path);
  return IngestCsv(in, schema);
}

void ParallelFor(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) {
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  threads = std::min(threads, n);
  std::vector<std::exception_ptr> errors(std::max(n, 0));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < n; i += threads) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void to_json(nlohmann::json& j, const TrialConfig& c) {
  j = nlohmann::json{{"schema_version", kTrialConfigSchemaVersion},
                     {"preset", c.preset},
                     {"plant", c.plant},
                     {"controller", c.controller},
                     {"stimulus", c.stimulus},
                     {"sim_rate_hz", c.sim_rate},
                     {"warmup_periods", c.warmup_periods},
                     {"noise", c.noise},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrialConfig& c) {
  c = TrialConfig::ForPreset(j.value("preset", std::string("standard")));
  if (j.contains("plant")) c.plant = j.at("plant").get<PlantParams>();
  if (j.contains("controller")) {
    nlohmann::json ctl = j.at("controller");
    if (!ctl.contains("preset")) ctl["preset"] = c.preset;
    c.controller = ctl.get<DecParams>();
  }
  if (j.contains("stimulus")) {
    nlohmann::json stim = nlohmann::json(c.stimulus);
    stim.update(j.at("stimulus"));
    c.stimulus = stim.get<PrtsConfig>();
  }
  c.sim_rate = j.value("sim_rate_hz", c.sim_rate);
  c.warmup_periods = j.value("warmup_periods", c.warmup_periods);
  if (j.contains("noise")) c.noise = j.at("noise").get<SensorNoise>();
  c.seed = j.value("seed", c.seed);
}

void from_json(const nlohmann::json& j, CsvSchema& s) {
  s = CsvSchema{};
  s.time = j.value("time", s.time);
  s.stimulus = j.value("stimulus", s.stimulus);
  s.measured_tilt = j.value("measured_tilt", s.measured_tilt);
  s.com_sway = j.value("com_sway", s.com_sway);
  s.joints = j.value("joints", s.joints);
  s.angle_columns = j.value("angle_columns", s.angle_columns);
  s.torque_columns = j.value("torque_columns", s.torque_columns);
}

}  // namespace swaybench
