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

#include "swaybench/signal.h"

#include <array>
#include <cmath>
#include <utility>

#include "swaybench/errors.h"

namespace swaybench {
namespace {

constexpr std::array<std::pair<Unit, std::string_view>, 6> kUnitNames = {{
    {Unit::kDimensionless, "1"},
    {Unit::kDegrees, "deg"},
    {Unit::kRadians, "rad"},
    {Unit::kDegreesPerSecond, "deg/s"},
    {Unit::kRadiansPerSecond, "rad/s"},
    {Unit::kNewtonMeters, "N*m"},
}};

}  // namespace

std::string_view UnitName(Unit unit) {
  for (const auto& [u, name] : kUnitNames) {
    if (u == unit) return name;
  }
  return "?";
}

Unit UnitFromName(std::string_view name) {
  for (const auto& [u, n] : kUnitNames) {
    if (n == name) return u;
  }
  throw ConfigError("units", "unknown unit '" + std::string(name) + "'");
}

void SampledSignal::Validate() const {
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw ConfigError("sample_rate", "must be positive and finite");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ConfigError("values",
                        "non-finite sample at index " + std::to_string(i));
    }
  }
}

}  // namespace swaybench
