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

#include "swaybench/surrogate.h"

#include <optional>
#include <random>

#include "swaybench/errors.h"

namespace swaybench {

SensorNoise TypicalSensorNoise() {
  SensorNoise n;
  n.joint_angle = 1e-4;
  n.joint_velocity = 1e-3;
  n.vestibular_angle = 1e-3;
  n.vestibular_velocity = 1e-3;
  n.torque = 0.01;
  return n;
}

std::uint64_t SubjectSeed(std::uint64_t seed, int subject) {
  // splitmix64 of the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL *
                               (static_cast<std::uint64_t>(subject) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TrialConfig SurrogateSubject(const SurrogateConfig& config, int subject) {
  TrialConfig c = config.base;
  std::mt19937_64 rng(SubjectSeed(config.seed, subject));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto jitter = [&](double value, double fraction) {
    return value * (1.0 + fraction * unit(rng));
  };
  const JitterFractions& f = config.jitter;
  for (auto& g : c.controller.joints) {
    g.kp = jitter(g.kp, f.gains);
    g.kd = jitter(g.kd, f.gains);
    g.loop_gain = jitter(g.loop_gain, f.loop_gain);
    g.delay = jitter(g.delay, f.delay);
    g.threshold = jitter(g.threshold, f.threshold);
    g.kp_passive = jitter(g.kp_passive, f.passive);
    g.kd_passive = jitter(g.kd_passive, f.passive);
  }
  for (auto& s : c.plant.segments) {
    const double k = jitter(1.0, f.mass);
    s.mass *= k;
    s.inertia *= k;
  }
  c.seed = rng();
  c.preset = "subject-" + std::to_string(subject);
  return c;
}

SurrogateResult SurrogateReference(const SurrogateConfig& config) {
  if (config.n_subjects < 2) {
    throw ConfigError("n_subjects", "at least two subjects required");
  }
  const int n = config.n_subjects;
  std::vector<std::optional<FrfMeasurement>> measured(n);
  std::vector<std::optional<SubjectFailure>> failed(n);
  ParallelFor(n, config.threads, [&](int i) {
    try {
      const TrialRecording rec = RunTrial(SurrogateSubject(config, i));
      measured[i] = MeasureFrf(rec, config.base.stimulus);
    } catch (const FallError& e) {
      failed[i] = SubjectFailure{i, e.time(), e.what()};
    } catch (const AnalysisError& e) {
      failed[i] = SubjectFailure{i, -1.0, e.what()};
    }
  });

  SurrogateResult out;
  std::vector<Frf> frfs;
  WeightVector weights;
  for (int i = 0; i < n; ++i) {
    if (failed[i]) out.failures.push_back(*failed[i]);
    if (!measured[i]) continue;
    if (frfs.empty()) weights = measured[i]->weights;
    frfs.push_back(measured[i]->frf);
  }
  if (frfs.size() < 2) {
    throw StatisticsError("only " + std::to_string(frfs.size()) + " of " +
                          std::to_string(n) +
                          " surrogate subjects survived");
  }
  out.stats = FitReference(frfs, weights);
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : out.failures) {
    failures.push_back(
        {{"subject", f.subject}, {"time_s", f.time}, {"what", f.what}});
  }
  const nlohmann::json base = config.base;
  out.stats.provenance = {
      {"generator", "surrogate"},
      {"seed", config.seed},
      {"n_requested", n},
      {"n_survived", frfs.size()},
      {"jitter", config.jitter},
      {"base_config_hash", ConfigHash(base)},
      {"base_config", base},
      {"failures", failures},
      {"covariance", "unbiased, on unweighted expansions"},
  };
  return out;
}

void to_json(nlohmann::json& j, const JitterFractions& f) {
  j = nlohmann::json{{"gains", f.gains},         {"loop_gain", f.loop_gain},
                     {"delay", f.delay},         {"threshold", f.threshold},
                     {"passive", f.passive},     {"mass", f.mass}};
}

void from_json(const nlohmann::json& j, JitterFractions& f) {
  const JitterFractions d;
  f.gains = j.value("gains", d.gains);
  f.loop_gain = j.value("loop_gain", d.loop_gain);
  f.delay = j.value("delay", d.delay);
  f.threshold = j.value("threshold", d.threshold);
  f.passive = j.value("passive", d.passive);
  f.mass = j.value("mass", d.mass);
}

void from_json(const nlohmann::json& j, SurrogateConfig& c) {
  c = SurrogateConfig{};
  c.n_subjects = j.value("n_subjects", c.n_subjects);
  c.seed = j.value("seed", c.seed);
  if (j.contains("base")) c.base = j.at("base").get<TrialConfig>();
  if (j.contains("jitter")) c.jitter = j.at("jitter").get<JitterFractions>();
  c.threads = j.value("threads", c.threads);
}

}  // namespace swaybench
