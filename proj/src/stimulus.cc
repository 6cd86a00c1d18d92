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

#include "swaybench/stimulus.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>

#include "swaybench/errors.h"

namespace swaybench {
namespace {

constexpr int kMinRegisterLength = 2;
constexpr int kMaxRegisterLength = 8;

int Pow3(int n) {
  int p = 1;
  for (int i = 0; i < n; ++i) p *= 3;
  return p;
}

// Runs the recurrence s[k+n] = -(c_{n-1} s[k+n-1] + ... + c_0 s[k]) mod 3
// from state (0,...,0,1) and returns the state period, or 0 if the state
// does not come back within 3^n - 1 steps.
int RecurrencePeriod(const std::vector<int>& coeffs) {
  const int n = static_cast<int>(coeffs.size());
  const int max_period = Pow3(n) - 1;
  std::vector<int> state(n, 0);
  state[n - 1] = 1;
  const std::vector<int> start = state;
  for (int step = 1; step <= max_period; ++step) {
    int acc = 0;
    for (int i = 0; i < n; ++i) acc += coeffs[i] * state[i];
    const int next = (3 - acc % 3) % 3;
    std::rotate(state.begin(), state.begin() + 1, state.end());
    state[n - 1] = next;
    if (state == start) return step;
  }
  return 0;
}

}  // namespace

void PrtsConfig::Validate() const {
  if (register_length < kMinRegisterLength ||
      register_length > kMaxRegisterLength) {
    throw ConfigError("register_length", "must be in [2, 8]");
  }
  if (!(state_duration > 0.0) || !std::isfinite(state_duration)) {
    throw ConfigError("state_duration", "must be positive");
  }
  if (!std::isfinite(velocity_amplitude)) {
    throw ConfigError("velocity_amplitude", "must be finite");
  }
  if (!(peak_to_peak > 0.0) || !std::isfinite(peak_to_peak)) {
    throw ConfigError("peak_to_peak", "must be positive");
  }
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw ConfigError("sample_rate", "must be positive");
  }
  if (n_periods < 1) {
    throw ConfigError("n_periods", "must be >= 1");
  }
  if (!(max_frequency > 0.0)) {
    throw ConfigError("max_frequency", "must be positive");
  }
  const double samples = NominalPeriod() * sample_rate;
  if (samples < 2.0 || samples > 1e8) {
    throw ConfigError("sample_rate",
                      "period must span between 2 and 1e8 samples");
  }
}

int PrtsConfig::NumStates() const { return Pow3(register_length) - 1; }

double PrtsConfig::NominalPeriod() const {
  return NumStates() * state_duration;
}

PrtsTiming DescribeTiming(const PrtsConfig& config) {
  config.Validate();
  PrtsTiming timing;
  timing.num_states = config.NumStates();
  timing.nominal_period = config.NominalPeriod();
  timing.samples_per_period =
      static_cast<int>(std::lround(timing.nominal_period * config.sample_rate));
  timing.realized_period = timing.samples_per_period / config.sample_rate;
  timing.fundamental = 1.0 / timing.realized_period;
  return timing;
}

std::vector<int> PrimitivePolynomial(int register_length) {
  if (register_length < kMinRegisterLength ||
      register_length > kMaxRegisterLength) {
    throw ConfigError("register_length", "must be in [2, 8]");
  }
  const int n = register_length;
  const int target = Pow3(n) - 1;
  const int candidates = Pow3(n);
  std::vector<int> coeffs(n);
  for (int code = 0; code < candidates; ++code) {
    int rest = code;
    for (int i = n - 1; i >= 0; --i) {
      coeffs[i] = rest % 3;
      rest /= 3;
    }
    if (coeffs[0] == 0) continue;
    if (RecurrencePeriod(coeffs) == target) return coeffs;
  }
  // Primitive polynomials exist for every degree.
  throw Error("no primitive polynomial found");
}

std::vector<std::int8_t> TernaryMSequence(int register_length) {
  const std::vector<int> coeffs = PrimitivePolynomial(register_length);
  const int n = register_length;
  const int length = Pow3(n) - 1;
  std::vector<int> state(n, 0);
  state[n - 1] = 1;
  std::vector<std::int8_t> digits(length);
  for (int k = 0; k < length; ++k) {
    digits[k] = static_cast<std::int8_t>(state[0]);
    int acc = 0;
    for (int i = 0; i < n; ++i) acc += coeffs[i] * state[i];
    std::rotate(state.begin(), state.begin() + 1, state.end());
    state[n - 1] = (3 - acc % 3) % 3;
  }
  return digits;
}

std::vector<int> PrtsVelocityStates(const PrtsConfig& config) {
  config.Validate();
  const std::vector<std::int8_t> digits =
      TernaryMSequence(config.register_length);
  std::vector<int> states(digits.size());
  for (std::size_t k = 0; k < digits.size(); ++k) {
    states[k] = digits[k] == 0 ? 0 : (digits[k] == 1 ? 1 : -1);
  }
  return states;
}

SampledSignal GeneratePrts(const PrtsConfig& config) {
  const PrtsTiming timing = DescribeTiming(config);
  const std::vector<int> velocity = PrtsVelocityStates(config);
  const std::int64_t num_states = timing.num_states;
  const std::int64_t per_period = timing.samples_per_period;

  // Integral of the velocity at state boundaries, in units of v * Ts.
  std::vector<std::int64_t> boundary(num_states + 1, 0);
  for (std::int64_t k = 0; k < num_states; ++k) {
    boundary[k + 1] = boundary[k] + velocity[k];
  }

  // Sample i sits at state-time i * num_states / per_period, kept rational
  // so that state boundaries are located exactly.
  std::vector<double> period(per_period);
  for (std::int64_t i = 0; i < per_period; ++i) {
    const std::int64_t num = i * num_states;
    const std::int64_t k = num / per_period;
    const std::int64_t rem = num % per_period;
    period[i] = static_cast<double>(boundary[k]) +
                velocity[k] * (static_cast<double>(rem) / per_period);
  }

  SampledSignal out;
  out.sample_rate = config.sample_rate;
  out.units = Unit::kDegrees;
  out.values.assign(per_period * config.n_periods, 0.0);
  if (config.velocity_amplitude == 0.0) return out;

  double mean = 0.0;
  for (double v : period) mean += v;
  mean /= per_period;
  const auto [lo, hi] = std::minmax_element(period.begin(), period.end());
  const double range = *hi - *lo;
  const double scale = (config.velocity_amplitude > 0 ? 1.0 : -1.0) *
                       config.peak_to_peak / range;
  for (double& v : period) v = (v - mean) * scale;

  for (int p = 0; p < config.n_periods; ++p) {
    std::copy(period.begin(), period.end(),
              out.values.begin() + static_cast<std::ptrdiff_t>(p * per_period));
  }
  return out;
}

std::vector<double> PeakFrequencies(const PrtsConfig& config) {
  const PrtsTiming timing = DescribeTiming(config);
  const double limit = std::min(config.max_frequency, config.sample_rate / 2);
  // Relative slack so that a peak lying exactly on the limit is kept.
  const double slack = 1e-9 * timing.fundamental;
  std::vector<double> peaks;
  for (int h = 1;; h += 2) {
    const double f = h * timing.fundamental;
    if (f > limit + slack) break;
    peaks.push_back(f);
  }
  return peaks;
}

void WriteStimulusCsv(std::ostream& out, const SampledSignal& stimulus) {
  out << "time_s,tilt_deg\n" << std::setprecision(17);
  for (std::size_t i = 0; i < stimulus.size(); ++i) {
    out << stimulus.TimeAt(i) << ',' << stimulus.values[i] << '\n';
  }
}

void to_json(nlohmann::json& j, const PrtsConfig& c) {
  j = nlohmann::json{{"register_length", c.register_length},
                     {"state_duration", c.state_duration},
                     {"velocity_amplitude", c.velocity_amplitude},
                     {"peak_to_peak", c.peak_to_peak},
                     {"sample_rate", c.sample_rate},
                     {"n_periods", c.n_periods},
                     {"max_frequency", c.max_frequency}};
}

void from_json(const nlohmann::json& j, PrtsConfig& c) {
  const PrtsConfig d;
  c.register_length = j.value("register_length", d.register_length);
  c.state_duration = j.value("state_duration", d.state_duration);
  c.velocity_amplitude = j.value("velocity_amplitude", d.velocity_amplitude);
  c.peak_to_peak = j.value("peak_to_peak", d.peak_to_peak);
  c.sample_rate = j.value("sample_rate", d.sample_rate);
  c.n_periods = j.value("n_periods", d.n_periods);
  c.max_frequency = j.value("max_frequency", d.max_frequency);
}

}  // namespace swaybench
