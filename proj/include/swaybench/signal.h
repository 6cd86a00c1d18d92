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

#ifndef SWAYBENCH_SIGNAL_H_
#define SWAYBENCH_SIGNAL_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace swaybench {

enum class Unit {
  kDimensionless,
  kDegrees,
  kRadians,
  kDegreesPerSecond,
  kRadiansPerSecond,
  kNewtonMeters,
};

std::string_view UnitName(Unit unit);
Unit UnitFromName(std::string_view name);

// Uniformly sampled scalar time series.
struct SampledSignal {
  std::vector<double> values;
  double sample_rate = 100.0;  // Hz
  Unit units = Unit::kDimensionless;
  double t0 = 0.0;  // s

  std::size_t size() const { return values.size(); }
  double dt() const { return 1.0 / sample_rate; }
  double TimeAt(std::size_t i) const {
    return t0 + static_cast<double>(i) / sample_rate;
  }

  // Throws ConfigError if sample_rate <= 0 or any value is non-finite.
  void Validate() const;
};

}  // namespace swaybench

#endif  // SWAYBENCH_SIGNAL_H_
