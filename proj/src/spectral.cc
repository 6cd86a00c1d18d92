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

#include "swaybench/spectral.h"

#include <cmath>
#include <numbers>

#include "swaybench/errors.h"
#include "swaybench/stimulus.h"

namespace swaybench {

std::vector<int> BandPlan::BandSizes() const {
  std::vector<int> sizes;
  sizes.reserve(bands.size());
  for (const auto& band : bands) sizes.push_back(static_cast<int>(band.size()));
  return sizes;
}

bool BandPlan::SameAs(const BandPlan& other) const {
  if (bands != other.bands) return false;
  if (peak_frequencies.size() != other.peak_frequencies.size()) return false;
  for (std::size_t i = 0; i < peak_frequencies.size(); ++i) {
    if (std::abs(peak_frequencies[i] - other.peak_frequencies[i]) > 1e-9) {
      return false;
    }
  }
  return true;
}

void BandPlan::Validate() const {
  if (peak_frequencies.empty()) {
    throw ConfigError("peak_frequencies", "empty");
  }
  if (bands.empty()) throw ConfigError("bands", "empty");
  if (representative.size() != bands.size()) {
    throw ConfigError("representative", "one value per band required");
  }
  std::vector<bool> covered(peak_frequencies.size(), false);
  for (std::size_t k = 0; k < bands.size(); ++k) {
    if (bands[k].empty()) {
      throw ConfigError("bands", "band " + std::to_string(k) + " is empty");
    }
    for (int i : bands[k]) {
      if (i < 0 || i >= NumPeaks()) {
        throw ConfigError("bands", "band " + std::to_string(k) +
                                       " has out-of-range index " +
                                       std::to_string(i));
      }
      covered[i] = true;
    }
  }
  for (std::size_t i = 0; i < covered.size(); ++i) {
    if (!covered[i]) {
      throw ConfigError("bands",
                        "peak " + std::to_string(i) + " is in no band");
    }
  }
}

BandPlan MakeBandPlan(std::vector<double> peak_frequencies,
                      std::vector<std::vector<int>> bands) {
  BandPlan plan;
  plan.peak_frequencies = std::move(peak_frequencies);
  plan.bands = std::move(bands);
  plan.representative.assign(plan.bands.size(), 0.0);
  plan.Validate();
  for (std::size_t k = 0; k < plan.bands.size(); ++k) {
    double sum = 0.0;
    for (int i : plan.bands[k]) sum += plan.peak_frequencies[i];
    plan.representative[k] = sum / static_cast<double>(plan.bands[k].size());
  }
  return plan;
}

BandPlan DefaultBandPlan() {
  std::vector<std::vector<int>> bands = {
      {0},
      {1},
      {2},
      {3, 4},
      {4, 5},
      {5, 6, 7},
      {7, 8, 9},
      {9, 10, 11, 12},
      {12, 13, 14, 15},
      {15, 16, 17, 18, 19},
      {19, 20, 21, 22, 23, 24},
  };
  return MakeBandPlan(PeakFrequencies(PrtsConfig{}), std::move(bands));
}

BandSpectrum BandAverage(const std::vector<Complex>& peak_values,
                         const BandPlan& plan) {
  if (static_cast<int>(peak_values.size()) != plan.NumPeaks()) {
    throw DimensionError("expected " + std::to_string(plan.NumPeaks()) +
                         " peak values, got " +
                         std::to_string(peak_values.size()));
  }
  BandSpectrum out;
  out.plan = plan;
  out.values.reserve(plan.bands.size());
  for (const auto& band : plan.bands) {
    Complex sum = 0.0;
    for (int i : band) sum += peak_values[i];
    out.values.push_back(sum / static_cast<double>(band.size()));
  }
  return out;
}

std::vector<Complex> ExtractPeaks(const SampledSignal& signal,
                                  const BandPlan& plan, int n_periods) {
  const std::size_t total = signal.size();
  if (n_periods < 1 || total == 0 ||
      total % static_cast<std::size_t>(n_periods) != 0) {
    throw AlignmentError("signal of " + std::to_string(total) +
                         " samples is not " + std::to_string(n_periods) +
                         " whole periods");
  }
  const std::size_t period = total / static_cast<std::size_t>(n_periods);
  const double duration = static_cast<double>(period) / signal.sample_rate;

  std::vector<std::size_t> bins;
  bins.reserve(plan.peak_frequencies.size());
  for (double f : plan.peak_frequencies) {
    const double exact = f * duration;
    const double rounded = std::round(exact);
    if (std::abs(exact - rounded) > 1e-6 || rounded < 1.0 ||
        2.0 * rounded >= static_cast<double>(period)) {
      throw AlignmentError("peak " + std::to_string(f) +
                           " Hz is not on the DFT grid of a " +
                           std::to_string(duration) + " s period");
    }
    bins.push_back(static_cast<std::size_t>(rounded));
  }

  std::vector<Complex> twiddle(period);
  for (std::size_t m = 0; m < period; ++m) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(m) /
                         static_cast<double>(period);
    twiddle[m] = {std::cos(angle), std::sin(angle)};
  }

  std::vector<Complex> peaks(bins.size(), 0.0);
  for (int p = 0; p < n_periods; ++p) {
    const double* x = signal.values.data() + p * period;
    double mean = 0.0;
    for (std::size_t n = 0; n < period; ++n) mean += x[n];
    mean /= static_cast<double>(period);
    for (std::size_t b = 0; b < bins.size(); ++b) {
      Complex acc = 0.0;
      std::size_t index = 0;
      for (std::size_t n = 0; n < period; ++n) {
        acc += (x[n] - mean) * twiddle[index];
        index += bins[b];
        if (index >= period) index -= period;
      }
      peaks[b] += acc;
    }
  }
  const double norm = static_cast<double>(period) * n_periods;
  for (Complex& v : peaks) v /= norm;
  return peaks;
}

Frf EstimateFrf(const std::vector<Complex>& u_peaks,
                const std::vector<Complex>& y_peaks, const BandPlan& plan) {
  if (u_peaks.size() != y_peaks.size() ||
      static_cast<int>(u_peaks.size()) != plan.NumPeaks()) {
    throw DimensionError("input/output peak vectors must both have " +
                         std::to_string(plan.NumPeaks()) + " values");
  }
  Frf frf;
  frf.plan = plan;
  frf.h.reserve(plan.bands.size());
  for (std::size_t k = 0; k < plan.bands.size(); ++k) {
    Complex cross = 0.0;
    double power = 0.0;
    for (int i : plan.bands[k]) {
      cross += std::conj(u_peaks[i]) * y_peaks[i];
      power += std::norm(u_peaks[i]);
    }
    const double n = static_cast<double>(plan.bands[k].size());
    cross /= n;
    power /= n;
    if (power < 1e-15) {
      throw DegenerateExcitationError(
          static_cast<int>(k), "band " + std::to_string(k) +
                                   " has no input power (G_U = " +
                                   std::to_string(power) + ")");
    }
    frf.h.push_back(cross / power);
  }
  return frf;
}

WeightVector WeightsFromInput(const std::vector<Complex>& u_peaks,
                              const BandPlan& plan) {
  if (static_cast<int>(u_peaks.size()) != plan.NumPeaks()) {
    throw DimensionError("expected " + std::to_string(plan.NumPeaks()) +
                         " input peaks");
  }
  WeightVector out;
  out.w.reserve(plan.bands.size());
  for (const auto& band : plan.bands) {
    double power = 0.0;
    for (int i : band) power += std::norm(u_peaks[i]);
    out.w.push_back(std::sqrt(power));
  }
  return out;
}

void to_json(nlohmann::json& j, const BandPlan& plan) {
  j = nlohmann::json{{"schema_version", kBandPlanSchemaVersion},
                     {"peak_frequencies_hz", plan.peak_frequencies},
                     {"bands", plan.bands},
                     {"representative_frequencies_hz", plan.representative}};
}

void from_json(const nlohmann::json& j, BandPlan& plan) {
  const int version = j.at("schema_version").get<int>();
  if (version != kBandPlanSchemaVersion) {
    throw ConfigError("schema_version",
                      "unsupported band plan version " +
                          std::to_string(version));
  }
  plan = MakeBandPlan(j.at("peak_frequencies_hz").get<std::vector<double>>(),
                      j.at("bands").get<std::vector<std::vector<int>>>());
}

nlohmann::json ComplexArrayToJson(const std::vector<Complex>& values) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Complex& v : values) arr.push_back({v.real(), v.imag()});
  return arr;
}

std::vector<Complex> ComplexArrayFromJson(const nlohmann::json& j) {
  std::vector<Complex> out;
  out.reserve(j.size());
  for (const auto& pair : j) {
    out.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
  }
  return out;
}

nlohmann::json SpectrumToJson(const std::string& kind,
                              const std::vector<Complex>& values,
                              const BandPlan& plan) {
  return nlohmann::json{{"schema", "swaybench.spectrum"},
                        {"schema_version", kSpectrumSchemaVersion},
                        {"dft_convention", kDftConvention},
                        {"kind", kind},
                        {"band_plan", plan},
                        {"values", ComplexArrayToJson(values)}};
}

Frf FrfFromJson(const nlohmann::json& j) {
  if (j.value("schema", "") != "swaybench.spectrum" ||
      j.value("schema_version", 0) != kSpectrumSchemaVersion) {
    throw ConfigError("schema", "not a swaybench.spectrum v1 document");
  }
  Frf frf;
  frf.plan = j.at("band_plan").get<BandPlan>();
  frf.h = ComplexArrayFromJson(j.at("values"));
  if (static_cast<int>(frf.h.size()) != frf.plan.NumBands()) {
    throw DimensionError("FRF has " + std::to_string(frf.h.size()) +
                         " values for " + std::to_string(frf.plan.NumBands()) +
                         " bands");
  }
  return frf;
}

}  // namespace swaybench
