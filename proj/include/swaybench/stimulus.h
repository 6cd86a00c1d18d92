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

#ifndef SWAYBENCH_STIMULUS_H_
#define SWAYBENCH_STIMULUS_H_

// Pseudorandom ternary sequence (PRTS) support-surface tilt stimulus.
//
// The velocity of the tilt follows a maximum-length ternary shift-register
// sequence; the tilt angle is its integral. Because the second half of a
// ternary m-sequence is the negation of the first half, the tilt profile is
// half-period antisymmetric and its spectrum has power only at odd
// harmonics of 1/period.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "json.hpp"
#include "swaybench/signal.h"

namespace swaybench {

struct PrtsConfig {
  int register_length = 5;             // ternary shift-register stages
  double state_duration = 20.0 / 242;  // s per sequence state
  double velocity_amplitude = 1.0;     // deg/s before rescaling; 0 -> flat
  double peak_to_peak = 1.0;           // deg
  double sample_rate = 100.0;          // Hz
  int n_periods = 1;
  // Upper edge of the analysed band. Peaks above it (or above Nyquist) are
  // not reported by PeakFrequencies().
  double max_frequency = 2.5;  // Hz

  // Throws ConfigError naming the first offending field.
  void Validate() const;

  int NumStates() const;       // 3^register_length - 1
  double NominalPeriod() const;  // NumStates() * state_duration
};

// Realized sampling of one period. When NominalPeriod() * sample_rate is not
// an integer the per-period sample count is rounded and the realized period
// differs from the nominal one.
struct PrtsTiming {
  int num_states = 0;
  int samples_per_period = 0;
  double nominal_period = 0.0;   // s
  double realized_period = 0.0;  // s
  double fundamental = 0.0;      // Hz, 1 / realized_period
};

PrtsTiming DescribeTiming(const PrtsConfig& config);

// Feedback coefficients c_0..c_{n-1} of the monic primitive polynomial
// x^n + c_{n-1} x^{n-1} + ... + c_0 over GF(3) used for a register of
// length n. The lexicographically smallest primitive polynomial is chosen.
std::vector<int> PrimitivePolynomial(int register_length);

// One period (3^n - 1 digits) of the ternary m-sequence, digits in {0,1,2}.
std::vector<std::int8_t> TernaryMSequence(int register_length);

// One period of the velocity states in {-1, 0, +1} (digit 2 maps to -1).
std::vector<int> PrtsVelocityStates(const PrtsConfig& config);

// Tilt angle profile in degrees, n_periods periods long, zero mean and
// max - min == peak_to_peak (unless velocity_amplitude is 0).
SampledSignal GeneratePrts(const PrtsConfig& config);

// Odd harmonics of the realized fundamental up to
// min(max_frequency, sample_rate / 2).
std::vector<double> PeakFrequencies(const PrtsConfig& config);

// Two-column CSV (time_s,tilt_deg) with header row.
void WriteStimulusCsv(std::ostream& out, const SampledSignal& stimulus);

void to_json(nlohmann::json& j, const PrtsConfig& config);
void from_json(const nlohmann::json& j, PrtsConfig& config);

}  // namespace swaybench

#endif  // SWAYBENCH_STIMULUS_H_
