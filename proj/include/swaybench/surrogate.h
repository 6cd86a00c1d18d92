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

#ifndef SWAYBENCH_SURROGATE_H_
#define SWAYBENCH_SURROGATE_H_

// Synthetic reference population: closed-loop simulations of the DEC
// controller with per-subject parameter jitter and sensor noise, passed
// through the analysis pipeline and fitted with FitReference().

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "swaybench/pipeline.h"
#include "swaybench/scoring.h"

namespace swaybench {

// Half-widths of the multiplicative uniform jitter, e.g. 0.15 draws a
// factor from [0.85, 1.15].
struct JitterFractions {
  double gains = 0.15;      // kp, kd of every module
  double loop_gain = 0.10;  // G
  double delay = 0.20;      // rounded to whole ticks afterwards
  double threshold = 0.30;  // dead band
  double passive = 0.15;    // passive stiffness and damping
  double mass = 0.05;       // segment masses (inertia scales along)
};

// Sensor noise used for surrogate subjects.
SensorNoise TypicalSensorNoise();

struct SurrogateConfig {
  int n_subjects = 38;
  std::uint64_t seed = 1;
  TrialConfig base = [] {
    TrialConfig c;
    c.noise = TypicalSensorNoise();
    return c;
  }();
  JitterFractions jitter;
  int threads = 0;  // 0: hardware concurrency
};

struct SubjectFailure {
  int subject = 0;
  double time = 0.0;  // s, time of the fall (or -1 for other failures)
  std::string what;
};

struct SurrogateResult {
  ReferenceStats stats;
  std::vector<SubjectFailure> failures;
};

// Deterministic per-subject seed.
std::uint64_t SubjectSeed(std::uint64_t seed, int subject);

// Trial configuration of one jittered subject.
TrialConfig SurrogateSubject(const SurrogateConfig& config, int subject);

// Simulates and fits the population. Subjects run in parallel and are
// reduced in index order, so the result does not depend on `threads`.
// StatisticsError when fewer than two subjects survive.
SurrogateResult SurrogateReference(const SurrogateConfig& config);

void to_json(nlohmann::json& j, const JitterFractions& f);
void from_json(const nlohmann::json& j, JitterFractions& f);
void from_json(const nlohmann::json& j, SurrogateConfig& c);

}  // namespace swaybench

#endif  // SWAYBENCH_SURROGATE_H_
