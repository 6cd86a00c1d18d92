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

#ifndef SWAYBENCH_SPECTRAL_H_
#define SWAYBENCH_SPECTRAL_H_

// Band-averaged frequency response estimation at the PRTS spectral peaks.
//
// DFT convention used throughout (and written into every exported spectrum):
//   X[k] = (1/N) * sum_{n=0}^{N-1} x[n] * exp(-2*pi*i*k*n/N)
// evaluated per stimulus period after removing that period's mean, then
// averaged over periods. A unit-amplitude cosine on bin k gives |X[k]| = 0.5.

#include <complex>
#include <string>
#include <vector>

#include "json.hpp"
#include "swaybench/signal.h"

namespace swaybench {

using Complex = std::complex<double>;

inline constexpr int kBandPlanSchemaVersion = 1;
inline constexpr int kSpectrumSchemaVersion = 1;
inline constexpr char kDftConvention[] =
    "X[k] = (1/N) sum_n x[n] exp(-2 pi i k n / N); per-period mean removed; "
    "averaged over periods";

struct BandPlan {
  std::vector<double> peak_frequencies;  // Hz
  std::vector<std::vector<int>> bands;   // indices into peak_frequencies
  std::vector<double> representative;    // Hz, mean of each band

  int NumPeaks() const { return static_cast<int>(peak_frequencies.size()); }
  int NumBands() const { return static_cast<int>(bands.size()); }
  std::vector<int> BandSizes() const;

  // Band membership and peak grid agree (frequencies to 1e-9 Hz).
  bool SameAs(const BandPlan& other) const;

  // Throws ConfigError on empty/out-of-range bands or uncovered peaks.
  void Validate() const;
};

// Builds a plan and fills `representative` by averaging each band.
BandPlan MakeBandPlan(std::vector<double> peak_frequencies,
                      std::vector<std::vector<int>> bands);

// The 25-peak grid of a 20 s PRTS (0.05, 0.15, ..., 2.45 Hz) grouped into
// 11 bands. The first three bands are single peaks; from the fourth on,
// contiguous bands grow in size and neighbours share their boundary peak,
// which spaces the band centres roughly logarithmically:
//   f_x = 0.05 0.15 0.25 0.40 0.50 0.65 0.85 1.10 1.40 1.75 2.20 Hz.
BandPlan DefaultBandPlan();

struct BandSpectrum {
  std::vector<Complex> values;
  BandPlan plan;
};

struct Frf {
  std::vector<Complex> h;
  BandPlan plan;
};

struct WeightVector {
  std::vector<double> w;
};

// Complex mean of the per-peak values over each band.
BandSpectrum BandAverage(const std::vector<Complex>& peak_values,
                         const BandPlan& plan);

// DFT bins at the plan's peak frequencies, averaged over `n_periods` equal
// periods of `signal`. Throws AlignmentError when the length is not a
// multiple of n_periods or a peak is off the one-period DFT grid.
std::vector<Complex> ExtractPeaks(const SampledSignal& signal,
                                  const BandPlan& plan, int n_periods);

// H_k = <conj(U) Y>_k / <conj(U) U>_k with <.>_k the mean over band k.
Frf EstimateFrf(const std::vector<Complex>& u_peaks,
                const std::vector<Complex>& y_peaks, const BandPlan& plan);

// w_k = sqrt(sum_{i in B_k} |U_i|^2).
WeightVector WeightsFromInput(const std::vector<Complex>& u_peaks,
                              const BandPlan& plan);

void to_json(nlohmann::json& j, const BandPlan& plan);
void from_json(const nlohmann::json& j, BandPlan& plan);

nlohmann::json ComplexArrayToJson(const std::vector<Complex>& values);
std::vector<Complex> ComplexArrayFromJson(const nlohmann::json& j);

// Versioned spectrum document: {"schema", "version", "convention", "kind",
// "band_plan", "values"}. `kind` is a free tag ("peaks", "bands", "frf").
nlohmann::json SpectrumToJson(const std::string& kind,
                              const std::vector<Complex>& values,
                              const BandPlan& plan);
Frf FrfFromJson(const nlohmann::json& j);

}  // namespace swaybench

#endif  // SWAYBENCH_SPECTRAL_H_
